"""
Test suite for the replicate seeding module.
"""

import numpy as np
import pytest
from src.rng import MAX_SEED, child_generator, root_generator, validate_seed


class TestSeeding:
    """Test seed validation and per-replicate generators"""

    def test_validate_seed(self):
        """Test the 64-bit seed range"""
        assert validate_seed(0) == 0
        assert validate_seed(MAX_SEED) == MAX_SEED
        with pytest.raises(ValueError):
            validate_seed(-1)
        with pytest.raises(ValueError):
            validate_seed(MAX_SEED + 1)

    def test_child_streams_are_reproducible(self):
        """Test that a replicate stream depends only on (seed, index)"""
        first = child_generator(42, 7).random(5)
        second = child_generator(42, 7).random(5)
        np.testing.assert_array_equal(first, second)

    def test_child_streams_differ(self):
        """Test that neighbouring replicates and seeds get different streams"""
        base = child_generator(42, 0).random(5)
        assert not np.array_equal(base, child_generator(42, 1).random(5))
        assert not np.array_equal(base, child_generator(43, 0).random(5))

    def test_philox_backend(self):
        """Test that generators are counter-based"""
        assert isinstance(child_generator(1, 0).bit_generator, np.random.Philox)
        assert isinstance(root_generator(1).bit_generator, np.random.Philox)

    def test_root_generator_is_reproducible(self):
        """Test the single-shot generator"""
        assert root_generator(9).integers(0, 1000) == root_generator(9).integers(0, 1000)


if __name__ == "__main__":
    pytest.main([__file__])

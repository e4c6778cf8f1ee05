"""
Test suite for the Monte Carlo sieve engine.

Tests the occupancy invariants of single samples, the shortcut samplers and
batch runs against closed forms known for the uniform law (W ~ beta(1,1)):
L_n is geometric(1/2) for n >= 1, E K_n = H_n, E M_n = 1 + H_n and
N_t = 1 + Poisson(t).
"""

import math

import numpy as np
import pytest
from scipy import integrate, stats

from src.errors import CapabilityError
from src.exact_engine import pmf_M, pmf_Z
from src.law_library import BetaLaw, LogParetoLaw, moment
from src.limit_laws import khat_mean
from src.rng import child_generator, root_generator
from src.sieve_sim import (BatchResult, OccupancySample, SimulationMode, _simulate_occupancy_with_walk,
                           batch_estimate, renewal_count, renewal_function_estimate, renewal_index,
                           sample_top_mark, shortcut_sample_M, shortcut_sample_Z, simulate_limit_partition,
                           simulate_occupancy, simulate_poissonised, small_box_count)


def harmonic(n: int) -> float:
    return sum(1.0 / k for k in range(1, n + 1))


class TestOccupancySample:
    """Test single realizations of the sieve"""

    def setup_method(self):
        """Set up test fixtures"""
        self.law = BetaLaw(1, 1)

    def test_invariants(self):
        """Test L = M - K, the spectrum sums and Z >= 1"""
        for seed in range(20):
            sample = simulate_occupancy(self.law, 100, root_generator(seed))
            assert sample.n_balls == 100
            assert sample.L == sample.M - sample.K
            assert sum(sample.spectrum.values()) == sample.K
            assert sum(r * c for r, c in sample.spectrum.items()) == 100
            assert 1 <= sample.Z <= 100
            assert sample.M >= sample.K >= 1

    def test_single_ball(self):
        """Test that one ball occupies one box"""
        sample = simulate_occupancy(self.law, 1, root_generator(3))
        assert sample.K == 1
        assert sample.Z == 1
        assert sample.spectrum == {1: 1}

    def test_empty_sieve(self):
        """Test the n = 0 sample"""
        assert simulate_occupancy(self.law, 0, root_generator(0)) == OccupancySample.empty()
        with pytest.raises(ValueError):
            simulate_occupancy(self.law, -1, root_generator(0))

    def test_inconsistent_sample_rejected(self):
        """Test the value-object validation"""
        with pytest.raises(ValueError):
            OccupancySample(n_balls=2, K=1, M=3, L=1, Z=2, spectrum={2: 1})
        with pytest.raises(ValueError):
            OccupancySample(n_balls=3, K=1, M=1, L=0, Z=2, spectrum={2: 1})

    def test_heavy_tailed_law(self):
        """Test that infinite-mean laws simulate as well"""
        sample = simulate_occupancy(LogParetoLaw(0.5), 1000, root_generator(1))
        assert sample.L == sample.M - sample.K
        assert sample.K >= 1

    def test_poissonised(self):
        """Test the poissonised sample and its domain check"""
        sample = simulate_poissonised(self.law, 50.0, root_generator(2))
        assert sample.L == sample.M - sample.K
        with pytest.raises(ValueError):
            simulate_poissonised(self.law, 0.0, root_generator(2))

    def test_k_r_accessor(self):
        """Test the spectrum accessor"""
        sample = simulate_occupancy(self.law, 30, root_generator(8))
        assert sum(sample.k_r(r) for r in range(1, 31)) == sample.K
        assert sample.k_r(1000) == 0
        assert sample.value('M') == sample.M


class TestRenewalCounts:
    """Test N_t, N*(x) and the renewal function estimate"""

    def setup_method(self):
        """Set up test fixtures"""
        self.law = BetaLaw(1, 1)

    def test_renewal_count_mean(self):
        """Test E N_t = 1 + t for exponential increments"""
        counts = np.array([renewal_count(self.law, 3.0, child_generator(17, r)) for r in range(2000)])
        se = counts.std(ddof=1) / math.sqrt(counts.size)
        assert abs(counts.mean() - 4.0) < 5 * se
        assert counts.min() >= 1

    def test_renewal_count_at_zero(self):
        """Test N_0 = 1"""
        assert renewal_count(self.law, 0.0, root_generator(1)) == 1
        with pytest.raises(ValueError):
            renewal_count(self.law, -1.0, root_generator(1))

    def test_renewal_function_estimate(self):
        """Test U(x) = 1 + x within five standard errors"""
        grid = [1.0, 2.0, 4.0]
        mean, se = renewal_function_estimate(self.law, grid, 1000, seed=5)
        for x, m, s in zip(grid, mean, se):
            assert abs(m - (1.0 + x)) < 5 * s

    def test_small_box_count(self):
        """Test N*(x) is a nonnegative count and its domain check"""
        value = small_box_count(self.law, 3.0, root_generator(4))
        assert value >= 0
        with pytest.raises(ValueError):
            small_box_count(self.law, 0.0, root_generator(4))

    def test_small_box_count_is_monotone(self):
        """Test that N*(x) grows with x along one realization of the walk"""
        for seed in range(10):
            counts = [small_box_count(self.law, x, root_generator(seed)) for x in (1.0, 2.0, 4.0, 8.0)]
            assert counts == sorted(counts)

    def test_small_box_count_mean(self):
        """Test E N*(x) = x for the uniform stick-breaking"""
        counts = np.array([small_box_count(self.law, 3.0, child_generator(8, r)) for r in range(2000)])
        se = counts.std(ddof=1) / math.sqrt(counts.size)
        assert abs(counts.mean() - 3.0) < 5 * se

    def test_renewal_function_laplace_transform(self):
        """Test s int e^(-s x) U(x) dx = 1 / (1 - E W^s) for beta(1,2) increments"""
        law = BetaLaw(1, 2)
        grid = np.linspace(0.0, 25.0, 2501)
        mean, _ = renewal_function_estimate(law, grid, 1000, seed=11)
        for s in (1, 2):
            transform = s * integrate.trapezoid(np.exp(-s * grid) * mean, grid)
            assert transform == pytest.approx(1.0 / (1.0 - moment(law, s)), abs=0.07)


class TestShortcutSamplers:
    """Test the samplers working from log n alone"""

    def setup_method(self):
        """Set up test fixtures"""
        self.law = BetaLaw(1, 1)

    def test_top_mark_mean(self):
        """Test E T_n = H_n for the maximum of n exponentials"""
        rng = root_generator(21)
        marks = np.array([sample_top_mark(math.log(1000), rng) for _ in range(2000)])
        se = marks.std(ddof=1) / math.sqrt(marks.size)
        assert abs(marks.mean() - harmonic(1000)) < 5 * se

    def test_top_mark_law(self):
        """Test T_n against P{T_n <= t} = (1 - e^-t)^n and its Gumbel limit"""
        rng = root_generator(23)
        marks = np.array([sample_top_mark(math.log(1000), rng) for _ in range(4000)])
        assert stats.kstest(marks, lambda t: (-np.expm1(-t)) ** 1000).pvalue > 1e-3
        shifted = np.array([sample_top_mark(20.0, rng) for _ in range(4000)]) - 20.0
        assert stats.kstest(shifted, 'gumbel_r').pvalue > 1e-3

    def test_top_mark_for_huge_n(self):
        """Test that astronomically large n stays finite"""
        value = sample_top_mark(1e6, root_generator(1))
        assert math.isfinite(value)
        assert value > 1e6 - 50

    def test_shortcut_M_mean(self):
        """Test E M_n = 1 + H_n"""
        rng = root_generator(33)
        values = np.array([shortcut_sample_M(self.law, math.log(50), rng) for _ in range(2000)])
        se = values.std(ddof=1) / math.sqrt(values.size)
        assert abs(values.mean() - (1.0 + harmonic(50))) < 5 * se

    def test_shortcut_M_is_renewal_count_at_top_mark(self):
        """Test M_n = N_{T_n} on a shared generator state"""
        for seed in range(10):
            rng = root_generator(seed)
            expected = renewal_count(self.law, sample_top_mark(math.log(50), rng), rng)
            assert shortcut_sample_M(self.law, math.log(50), root_generator(seed)) == expected

    def test_occupancy_range_is_renewal_index_of_top_mark(self):
        """Test that the range of a full sample is the box index of its largest mark"""
        for seed in range(10):
            sample, epochs, top = _simulate_occupancy_with_walk(BetaLaw(2, 1), 40, root_generator(seed))
            assert sample.M == renewal_index(epochs, top)

    def test_shortcut_M_matches_exact_mean(self):
        """Test the shortcut range against the exact mean of M_n for beta(2,1)"""
        law = BetaLaw(2, 1)
        rng = root_generator(35)
        values = np.array([shortcut_sample_M(law, math.log(30), rng) for _ in range(2000)])
        se = values.std(ddof=1) / math.sqrt(values.size)
        assert abs(values.mean() - pmf_M(law, 30).mean(30)) < 5 * se

    def test_shortcut_Z_matches_exact(self):
        """Test P{Z_n = 1} against the exact law of Z_n"""
        rng = root_generator(44)
        values = np.array([shortcut_sample_Z(self.law, math.log(50), rng) for _ in range(2000)])
        p = float(pmf_Z(self.law, 50)[1])
        observed = float(np.mean(values == 1))
        assert abs(observed - p) < 5 * math.sqrt(p * (1 - p) / values.size)
        assert values.min() >= 1
        assert values.max() <= 50

    def test_shortcut_Z_for_huge_n(self):
        """Test that Z_n is an integer even beyond int64 ball counts"""
        value = shortcut_sample_Z(self.law, 200.0, root_generator(2))
        assert isinstance(value, int)
        assert value >= 1

    def test_domain_checks(self):
        """Test that log n must be positive"""
        with pytest.raises(ValueError):
            shortcut_sample_M(self.law, 0.0, root_generator(1))
        with pytest.raises(ValueError):
            shortcut_sample_Z(self.law, -1.0, root_generator(1))


class TestLimitPartition:
    """Test simulation of the limit partition"""

    def test_counts_are_consistent(self):
        """Test that the per-r counts add up to the boxes in the window"""
        for seed in range(10):
            sample = simulate_limit_partition(BetaLaw(1, 1), 3.0, root_generator(seed))
            assert sum(sample.khat.values()) == sample.boxes_counted
            assert sample.y_leftmost > 0
            assert sample.atoms_discarded >= 0
            assert sample.window_depth == 3.0

    def test_khat_means(self):
        """Test the mean number of limit boxes holding r atoms"""
        for law, r in ((BetaLaw(1, 1), 1), (BetaLaw(2, 1), 2)):
            counts = np.array([simulate_limit_partition(law, 6.0, child_generator(13, i)).k_hat(r)
                               for i in range(1000)])
            se = counts.std(ddof=1) / math.sqrt(counts.size)
            assert abs(counts.mean() - khat_mean(law, r)) < 5 * se

    def test_infinite_mean_is_rejected(self):
        """Test that the stationary process needs mu < infinity"""
        with pytest.raises(CapabilityError):
            simulate_limit_partition(LogParetoLaw(0.5), 3.0, root_generator(1))

    def test_window_depth_must_be_positive(self):
        """Test the window check"""
        with pytest.raises(ValueError):
            simulate_limit_partition(BetaLaw(1, 1), 0.0, root_generator(1))


class TestBatchEstimate:
    """Test seeded batch runs"""

    def setup_method(self):
        """Set up test fixtures"""
        self.law = BetaLaw(1, 1)

    def test_uniform_means(self):
        """Test E L_n = 1, E K_n = H_n and E M_n = 1 + H_n"""
        batch = batch_estimate(self.law, 50, 2000, seed=42)
        assert abs(batch.mean('L') - 1.0) < 5 * batch.standard_error('L')
        assert abs(batch.mean('K') - harmonic(50)) < 5 * batch.standard_error('K')
        assert abs(batch.mean('M') - 1.0 - harmonic(50)) < 5 * batch.standard_error('M')

    def test_geometric_L(self):
        """Test P{L_n = 0} = 1/2"""
        batch = batch_estimate(self.law, 20, 2000, seed=7, statistics=('L',))
        p0 = float(batch.empirical_pmf('L')[0])
        assert abs(p0 - 0.5) < 5 * math.sqrt(0.25 / 2000)

    def test_reproducible_across_workers(self):
        """Test bit-identical results for any thread count"""
        single = batch_estimate(self.law, 40, 200, seed=9)
        threaded = batch_estimate(self.law, 40, 200, seed=9, workers=3)
        for name in single.columns:
            np.testing.assert_array_equal(single.columns[name], threaded.columns[name])
        np.testing.assert_array_equal(single.spectrum, threaded.spectrum)

    def test_seed_changes_result(self):
        """Test that different seeds give different batches"""
        a = batch_estimate(self.law, 40, 50, seed=1, statistics=('M',))
        b = batch_estimate(self.law, 40, 50, seed=2, statistics=('M',))
        assert not np.array_equal(a.values('M'), b.values('M'))

    def test_columns_and_spectrum(self):
        """Test the recorded columns of a fixed-n batch"""
        batch = batch_estimate(self.law, 30, 20, seed=3, statistics=('K', 'Z'), r_max=4)
        assert list(batch.columns) == ['n', 'K', 'Z']
        assert batch.spectrum.shape == (20, 4)
        np.testing.assert_array_equal(batch.values('n'), 30.0)
        with pytest.raises(KeyError):
            batch.values('L')

    def test_shortcut_mode(self):
        """Test that shortcut batches record M, Z and log Z"""
        batch = batch_estimate(self.law, math.log(1e6), 30, seed=3, mode=SimulationMode.SHORTCUT)
        assert set(batch.columns) == {'M', 'Z', 'log_Z'}
        assert batch.spectrum is None
        np.testing.assert_allclose(np.exp(batch.values('log_Z')), batch.values('Z'), rtol=1e-12)

    def test_poissonised_mode(self):
        """Test that poissonised batches record the realized ball count"""
        batch = batch_estimate(self.law, 25.0, 50, seed=3, mode=SimulationMode.POISSONISED)
        assert batch.values('n').min() >= 0
        assert batch.mode is SimulationMode.POISSONISED

    def test_summary(self):
        """Test the per-statistic summary"""
        batch = batch_estimate(self.law, 30, 100, seed=3, statistics=('L',))
        summary = batch.summary()
        assert set(summary) == {'n', 'L'}
        assert summary['L']['count'] == 100
        assert summary['L']['se'] == pytest.approx(batch.standard_error('L'))

    def test_invalid_arguments(self):
        """Test argument validation"""
        with pytest.raises(ValueError):
            batch_estimate(self.law, 10, 0, seed=1)
        with pytest.raises(ValueError):
            batch_estimate(self.law, 10, 10, seed=1, statistics=('Q',))
        with pytest.raises(ValueError):
            batch_estimate(self.law, 10, 10, seed=-5)

    def test_batch_result_type(self):
        """Test the result carries its provenance"""
        batch = batch_estimate(self.law, 10, 5, seed=11)
        assert isinstance(batch, BatchResult)
        assert batch.law == "beta(1,1)"
        assert batch.seed == 11
        assert batch.replicates == 5


if __name__ == "__main__":
    pytest.main([__file__])

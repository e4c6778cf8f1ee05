"""
Test suite for the W-law library.

Tests the law value objects, moment functionals, tail functions and the
Laplace functional against closed forms.
"""

import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import special

from src.errors import CapabilityError, LatticeLawError
from src.law_library import (BetaLaw, DiracLaw, ExampleGammaLaw, InverseCdfLaw, LogParetoLaw,
                             MomentProfile, log1mexp, m_function, mixed_moment, moment, moment_1m,
                             moment_profile, norming_c, open_uniform, phi, rational_mixed_moment,
                             sample_w, survival_log_w)
from src.rng import root_generator


class TestLawConstruction:
    """Test validation of law parameters"""

    def test_beta_parameters(self):
        """Test that beta parameters must be positive and finite"""
        assert BetaLaw(2, 1).a == 2
        with pytest.raises(ValueError):
            BetaLaw(0, 1)
        with pytest.raises(ValueError):
            BetaLaw(1, -2)
        with pytest.raises(ValueError):
            BetaLaw(math.inf, 1)

    def test_log_pareto_range(self):
        """Test the admissible tail index range (0, 2]"""
        assert LogParetoLaw(2).alpha == 2
        with pytest.raises(ValueError):
            LogParetoLaw(2.5)
        with pytest.raises(ValueError):
            LogParetoLaw(0)
        with pytest.raises(ValueError):
            LogParetoLaw(1.5, x0=0)

    def test_example_gamma_range(self):
        """Test that gamma must lie strictly inside (0, 1/2)"""
        ExampleGammaLaw(0.3)
        with pytest.raises(ValueError):
            ExampleGammaLaw(0.5)

    def test_dirac_is_rejected_without_override(self):
        """Test the lattice guard on point masses"""
        with pytest.raises(LatticeLawError):
            DiracLaw(0.5)
        law = DiracLaw(0.5, allow_lattice=True)
        assert moment_profile(law).mu == pytest.approx(math.log(2.0))

    def test_law_strings(self):
        """Test canonical law strings"""
        assert BetaLaw(1, 1).law_string() == "beta(1,1)"
        assert BetaLaw(0.5, 2.5).law_string() == "beta(0.5,2.5)"
        assert LogParetoLaw(1.5).law_string() == "logpareto(1.5)"
        assert LogParetoLaw(1.5, 2).law_string() == "logpareto(1.5,2)"
        assert str(ExampleGammaLaw(0.3)) == "examplegamma(0.3)"

    def test_laws_are_hashable(self):
        """Test that equal laws hash equally (moment caches key on them)"""
        assert BetaLaw(2, 1) == BetaLaw(2.0, 1.0)
        assert len({BetaLaw(2, 1), BetaLaw(2.0, 1.0), LogParetoLaw(0.5)}) == 2


class TestMomentProfile:
    """Test the moment profile (mu, sigma^2, nu)"""

    def test_uniform_profile(self):
        """Test beta(1,1): |log W| is standard exponential"""
        profile = moment_profile(BetaLaw(1, 1))
        assert profile.mu == pytest.approx(1.0)
        assert profile.sigma2 == pytest.approx(1.0)
        assert profile.nu == pytest.approx(1.0)
        assert profile.mu_finite and profile.sigma2_finite and profile.nu_finite

    def test_beta_two_one(self):
        """Test beta(2,1): mu = 1/2, nu = 3/2"""
        profile = moment_profile(BetaLaw(2, 1))
        assert profile.mu == pytest.approx(0.5)
        assert profile.nu == pytest.approx(1.5)
        assert profile.nu / profile.mu == pytest.approx(3.0)

    def test_log_pareto_profiles(self):
        """Test that heavy tails are declared infinite"""
        finite_mean = moment_profile(LogParetoLaw(1.5))
        assert finite_mean.mu == pytest.approx(3.0)
        assert not finite_mean.sigma2_finite
        assert finite_mean.tail_alpha == 1.5
        assert finite_mean.nu_finite

        infinite_mean = moment_profile(LogParetoLaw(0.5))
        assert not infinite_mean.mu_finite
        assert infinite_mean.nu > 0

    def test_example_gamma_has_infinite_nu(self):
        """Test that the gamma example law has finite mu but infinite nu"""
        profile = moment_profile(ExampleGammaLaw(0.3))
        assert profile.mu_finite
        assert profile.mu > 0
        assert not profile.nu_finite

    def test_quadrature_matches_closed_form(self):
        """Test a quantile-map law against the equivalent beta law"""
        law = InverseCdfLaw(quantile_fn=np.sqrt, name="sqrt")
        profile = moment_profile(law)
        assert profile.mu == pytest.approx(0.5, rel=1e-8)
        assert profile.nu == pytest.approx(1.5, rel=1e-8)

    def test_profile_validation(self):
        """Test invalid profiles"""
        with pytest.raises(ValueError):
            MomentProfile(mu=-1.0, sigma2=1.0, nu=1.0)
        with pytest.raises(ValueError):
            MomentProfile(mu=math.inf, sigma2=1.0, nu=1.0)
        with pytest.raises(ValueError):
            MomentProfile(mu=1.0, sigma2=1.0, nu=1.0, tail_alpha=3.0)


class TestMoments:
    """Test mixed moments E[W^a (1-W)^b]"""

    def test_beta_closed_form(self):
        """Test beta moments against beta functions"""
        law = BetaLaw(2, 3)
        assert moment(law, 1) == pytest.approx(0.4)
        assert moment_1m(law, 1) == pytest.approx(0.6)
        expected = special.beta(4, 5) / special.beta(2, 3)
        assert mixed_moment(law, 2, 2) == pytest.approx(expected, rel=1e-12)

    def test_quadrature_moments(self):
        """Test quadrature moments on the quantile representation"""
        law = InverseCdfLaw(quantile_fn=np.sqrt, name="sqrt")
        assert moment(law, 1) == pytest.approx(2.0 / 3.0, rel=1e-8)
        assert mixed_moment(law, 1, 1) == pytest.approx(1.0 / 6.0, rel=1e-8)

    def test_tiny_moments_keep_relative_accuracy(self):
        """Test E W^k for large k, far below double-precision epsilon"""
        law = LogParetoLaw(1.5)
        value = moment(law, 200)
        assert 0 < value < 1e-20
        assert moment(law, 201) < value

    def test_rational_moments(self):
        """Test exact rational moments"""
        assert rational_mixed_moment(BetaLaw(1, 1), 1, 1) == Fraction(1, 6)
        assert rational_mixed_moment(BetaLaw(2, 1), 1, 0) == Fraction(2, 3)
        assert rational_mixed_moment(BetaLaw(0.5, 0.5), 1, 0) == Fraction(1, 2)
        assert rational_mixed_moment(LogParetoLaw(1.5), 1, 0) is None

    def test_binomial_sum_is_one(self):
        """Test sum_m C(n, m) E[W^m (1-W)^(n-m)] = 1"""
        law = BetaLaw(2, 3)
        for n in (1, 10, 50, 100):
            total = sum(math.comb(n, m) * mixed_moment(law, m, n - m) for m in range(n + 1))
            assert total == pytest.approx(1.0, abs=1e-10)
        law = LogParetoLaw(1.5)
        for n in (1, 4, 10):
            total = sum(math.comb(n, m) * mixed_moment(law, m, n - m) for m in range(n + 1))
            assert total == pytest.approx(1.0, abs=1e-6)

    def test_symmetric_beta(self):
        """Test E[W^j (1-W)^k] = E[W^k (1-W)^j] when W and 1-W share a law"""
        for law in (BetaLaw(0.5, 0.5), BetaLaw(2, 2)):
            for j, k in ((0, 3), (1, 4), (2, 7)):
                assert mixed_moment(law, j, k) == pytest.approx(mixed_moment(law, k, j), rel=1e-12)
        assert mixed_moment(BetaLaw(2, 1), 0, 3) != pytest.approx(mixed_moment(BetaLaw(2, 1), 3, 0))

    def test_monotone_in_each_order(self):
        """Test that raising either exponent lowers the moment"""
        law = BetaLaw(2, 3)
        for a, b in ((0, 0), (1, 2), (3, 1)):
            assert mixed_moment(law, a + 1, b) < mixed_moment(law, a, b)
            assert mixed_moment(law, a, b + 1) < mixed_moment(law, a, b)

    def test_negative_orders(self):
        """Test that negative moment orders are rejected"""
        with pytest.raises(ValueError):
            mixed_moment(BetaLaw(1, 1), -1, 0)


class TestTails:
    """Test tail functions, m(x) and the norming function c(x)"""

    def test_uniform_survival(self):
        """Test P{|log W| > x} = exp(-x) under beta(1,1)"""
        law = BetaLaw(1, 1)
        xs = np.array([0.0, 0.5, 2.0, 10.0])
        np.testing.assert_allclose(survival_log_w(law, xs), np.exp(-xs), rtol=1e-10)
        assert survival_log_w(law, 1.0) == pytest.approx(math.exp(-1.0))
        with pytest.raises(ValueError):
            survival_log_w(law, -1.0)

    def test_log_pareto_survival(self):
        """Test the Pareto tail and its flat part below x0"""
        law = LogParetoLaw(1.5, 2.0)
        assert survival_log_w(law, 1.0) == 1.0
        assert survival_log_w(law, 8.0) == pytest.approx(4.0 ** -1.5)

    def test_m_function(self):
        """Test the truncated mean m(x)"""
        assert m_function(LogParetoLaw(1), math.e) == pytest.approx(2.0)
        assert m_function(LogParetoLaw(1.5), 0.5) == pytest.approx(0.5)
        assert m_function(BetaLaw(1, 1), 3.0) == pytest.approx(-math.expm1(-3.0), rel=1e-8)
        with pytest.raises(ValueError):
            m_function(BetaLaw(1, 1), 0.0)

    def test_m_function_is_concave_and_below_identity(self):
        """Test that m is nondecreasing, concave and at most x"""
        xs = np.arange(0.5, 10.01, 0.5)
        for law in (BetaLaw(1, 1), BetaLaw(2, 3), LogParetoLaw(1.5, 2.0), LogParetoLaw(1), ExampleGammaLaw(0.3)):
            values = np.array([m_function(law, x) for x in xs])
            assert np.all(values <= xs + 1e-12)
            assert np.all(np.diff(values) >= -1e-10)
            assert np.all(np.diff(values, 2) <= 1e-8)

    def test_norming_c(self):
        """Test c(x) for log-Pareto laws"""
        assert norming_c(LogParetoLaw(1.5), 8.0) == pytest.approx(4.0)
        c = norming_c(LogParetoLaw(2), 100.0)
        assert c * c == pytest.approx(2.0 * 100.0 * math.log(c), rel=1e-8)
        with pytest.raises(CapabilityError):
            norming_c(BetaLaw(1, 1), 10.0)


class TestLaplaceFunctional:
    """Test phi(t) = E exp(-t(1-W))"""

    def test_uniform_phi(self):
        """Test the closed form (1 - e^-t)/t"""
        law = BetaLaw(1, 1)
        assert phi(law, 0.0) == 1.0
        assert phi(law, 2.0) == pytest.approx(-math.expm1(-2.0) / 2.0)

    def test_beta_phi(self):
        """Test the confluent hypergeometric closed form"""
        values = phi(BetaLaw(2, 1), np.array([0.5, 1.0, 4.0]))
        np.testing.assert_allclose(values, special.hyp1f1(1, 3, -np.array([0.5, 1.0, 4.0])), rtol=1e-12)

    def test_quadrature_phi(self):
        """Test phi on the quantile representation against the closed form"""
        law = InverseCdfLaw(quantile_fn=np.sqrt, name="sqrt")
        assert phi(law, 1.0) == pytest.approx(float(special.hyp1f1(1, 3, -1.0)), rel=1e-8)

    def test_phi_lower_bound(self):
        """Test phi(t) e^t = E e^(t W) >= 1"""
        ts = np.array([0.5, 1.0, 5.0, 20.0])
        for law in (BetaLaw(1, 1), BetaLaw(2, 1), BetaLaw(0.5, 3)):
            assert np.all(phi(law, ts) * np.exp(ts) >= 1.0 - 1e-9)
        ts = np.array([0.5, 1.0, 5.0])
        for law in (LogParetoLaw(1.5), InverseCdfLaw(quantile_fn=np.sqrt, name="sqrt")):
            assert np.all(phi(law, ts) * np.exp(ts) >= 1.0 - 1e-6)

    def test_phi_rejects_negative_arguments(self):
        """Test the domain check"""
        with pytest.raises(ValueError):
            phi(BetaLaw(1, 1), -1.0)


class TestSampling:
    """Test sampling of W and the numerical helpers"""

    def test_sample_is_deterministic(self):
        """Test that the same generator state gives the same variate"""
        first = sample_w(BetaLaw(2, 1), root_generator(5))
        second = sample_w(BetaLaw(2, 1), root_generator(5))
        assert first == second
        assert 0 < first < 1

    def test_log_pairs_are_consistent(self):
        """Test exp(log W) + exp(log(1-W)) = 1 for every family"""
        rng = root_generator(11)
        for law in (BetaLaw(0.5, 0.5), LogParetoLaw(1.5), ExampleGammaLaw(0.3)):
            log_w, log_1m = law.sample_log_pairs(rng, 200)
            np.testing.assert_allclose(np.exp(log_w) + np.exp(log_1m), 1.0, atol=1e-12)

    def test_open_uniform(self):
        """Test that uniforms never hit the endpoints"""
        u = open_uniform(root_generator(3), 10000)
        assert np.all(u > 0) and np.all(u < 1)

    def test_log1mexp(self):
        """Test log(1 - e^-x) at both ends"""
        assert float(log1mexp(1e-20)) == pytest.approx(math.log(1e-20))
        assert float(log1mexp(50.0)) == pytest.approx(-math.exp(-50.0), rel=1e-12)
        assert float(log1mexp(math.log(2.0))) == pytest.approx(-math.log(2.0))


if __name__ == "__main__":
    pytest.main([__file__])

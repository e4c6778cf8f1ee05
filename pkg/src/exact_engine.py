"""
Exact finite-n distributions of the sieve statistics.

This module implements the dynamic programs over the Markov kernels
q*(n, m) = C(n, m) E[W^m (1-W)^(n-m)] (m balls pass the first box) and
q(n, m) = q*(n, m)/(1 - E W^n), m < n (the first occupied box is skipped to):
- Probability tables for L_n, K_n and M_n with automatic support truncation
- The potential function g(n, m), the probability that the chain started at
  n ever visits m, and the law of Z_n built from it
- Exact and integral representations of the mean of L_n
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy import integrate, signal, special

from .errors import CapabilityError, InternalConsistencyError, PrecisionError, QuadratureError
from .law_library import (BetaLaw, DEFAULT_QUADRATURE, WLaw, expectation, log_mixed_moment,
                          moment_profile, phi, rational_mixed_moment)

logger = logging.getLogger(__name__)


class Statistic(Enum):
    """Occupancy statistics with an exact table"""
    L = "L"
    K = "K"
    M = "M"
    Z = "Z"


@dataclass
class DPConfig:
    """Configuration of the table dynamic programs"""
    mass_tolerance: float = 1e-9
    initial_k_max: int = 32
    k_max_cap: int = 8192


@dataclass
class RenewalGridConfig:
    """Grid for the discretised renewal measure"""
    step: float = 0.01
    # the grid reaches log t plus this margin
    extra_horizon: float = 40.0


DOUBLE_PRECISION_N_MAX = 30
SERIES_T_MAX = 30.0


@dataclass(frozen=True)
class KernelRow:
    """
    One row of a transition kernel.

    Attributes:
        n: current state (number of balls)
        probs: probabilities over m = 0..n (q*) or m = 0..n-1 (q)
        kind: "qstar" or "q"
    """
    n: int
    probs: np.ndarray
    kind: str = "qstar"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"kernel rows start at n = 1, got {self.n}")
        expected = self.n + 1 if self.kind == "qstar" else self.n
        if self.probs.shape != (expected,):
            raise ValueError(f"{self.kind} row {self.n} must have {expected} entries")
        if np.any(self.probs < 0):
            raise ValueError("kernel probabilities must be nonnegative")
        if abs(float(self.probs.sum()) - 1.0) > 1e-12:
            raise ValueError(f"kernel row {self.n} does not sum to 1")

    def __getitem__(self, m: int) -> float:
        return float(self.probs[m])


@dataclass
class PmfTable:
    """
    Exact probabilities P{X_n = k} for n = 0..n_max and k = 0..k_max.

    Attributes:
        statistic: which statistic the table describes
        law: law string
        probs: (n_max + 1) x (k_max + 1) array
        mass_deficit: per-n missing mass 1 - sum_k P{X_n = k}
        truncated: True when some deficit exceeds the tolerance
        method: how the table was computed
    """
    statistic: Statistic
    law: str
    probs: np.ndarray
    mass_deficit: np.ndarray
    truncated: bool = False
    method: str = "dp"
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def n_max(self) -> int:
        return self.probs.shape[0] - 1

    @property
    def k_max(self) -> int:
        return self.probs.shape[1] - 1

    def pmf(self, n: int) -> np.ndarray:
        return self.probs[n]

    def probability(self, n: int, k: int) -> float:
        if k < 0 or k > self.k_max:
            return 0.0
        return float(self.probs[n, k])

    def cdf(self, n: int) -> np.ndarray:
        return np.cumsum(self.probs[n])

    def moment(self, n: int, order: int) -> float:
        k = np.arange(self.k_max + 1, dtype=float)
        return float(np.dot(k ** order, self.probs[n]))

    def mean(self, n: int) -> float:
        return self.moment(n, 1)

    def variance(self, n: int) -> float:
        mean = self.mean(n)
        return self.moment(n, 2) - mean * mean

    def to_rows(self, min_probability: float = 0.0) -> List[Tuple[int, int, float]]:
        """(n, k, probability) triples for CSV export"""
        rows = []
        for n in range(self.n_max + 1):
            for k in np.nonzero(self.probs[n] > min_probability)[0]:
                rows.append((n, int(k), float(self.probs[n, k])))
        return rows

    def to_dict(self) -> Dict[str, Any]:
        return {
            'statistic': self.statistic.value,
            'law': self.law,
            'n_max': self.n_max,
            'k_max': self.k_max,
            'truncated': self.truncated,
            'max_mass_deficit': float(self.mass_deficit.max()) if self.mass_deficit.size else 0.0,
            'method': self.method,
            'metadata': dict(self.metadata),
            'pmf': [row[:int(np.max(np.nonzero(row)[0], initial=0)) + 1].tolist() for row in self.probs],
        }


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------

def _log_binomials(n: int) -> np.ndarray:
    m = np.arange(n + 1)
    return special.gammaln(n + 1) - special.gammaln(m + 1) - special.gammaln(n - m + 1)


def _qstar_log_terms(law: WLaw, n: int) -> np.ndarray:
    m = np.arange(n + 1, dtype=float)
    if isinstance(law, BetaLaw):
        return (_log_binomials(n) + special.betaln(law.a + m, law.b + n - m)
                - special.betaln(law.a, law.b))
    if law.closed_log_mixed_moment(1, 1) is not None:
        return _log_binomials(n) + np.array([law.closed_log_mixed_moment(k, n - k) for k in range(n + 1)])
    return None


def _qstar_by_quadrature(law: WLaw, n: int) -> np.ndarray:
    log_binomials = _log_binomials(n)
    m = np.arange(n + 1, dtype=float)
    config = DEFAULT_QUADRATURE

    def integrand(u):
        lw, l1 = law.log_pair(u)
        lw, l1 = float(lw), float(l1)
        # binomial pmf at W assembled in log space, with 0 * -inf = 0
        with np.errstate(invalid='ignore'):
            logs = (log_binomials + np.where(m > 0, m * lw, 0.0)
                    + np.where(m < n, (n - m) * l1, 0.0))
        return np.exp(logs)

    values, abserr = integrate.quad_vec(integrand, 0.0, 1.0, epsabs=config.epsabs,
                                        epsrel=config.epsrel, norm='max', limit=config.limit)
    if not np.all(np.isfinite(values)) or abserr > config.slack * max(config.epsabs, 1e-10):
        raise QuadratureError(f"kernel row {n} under {law} did not converge", achieved=float(abserr))
    return np.clip(values, 0.0, None)


@lru_cache(maxsize=8192)
def _qstar_probs(law: WLaw, n: int) -> np.ndarray:
    log_terms = _qstar_log_terms(law, n)
    if log_terms is None:
        probs = _qstar_by_quadrature(law, n)
    else:
        probs = np.exp(log_terms)
    probs = probs / probs.sum()
    probs.setflags(write=False)
    return probs


@lru_cache(maxsize=8192)
def _q_probs(law: WLaw, n: int) -> np.ndarray:
    qstar = _qstar_probs(law, n)
    # 1 - E W^n taken as the mass below n avoids cancellation when E W^n is near 1
    probs = qstar[:n] / qstar[:n].sum()
    probs.setflags(write=False)
    return probs


def kernel_qstar(law: WLaw, n: int) -> KernelRow:
    """
    Row n of q*: probs[m] = C(n, m) E[W^m (1-W)^(n-m)], m = 0..n.

    Binomials and moments are combined in log space, so rows stay finite
    for n in the tens of thousands.
    """
    if n < 1:
        raise ValueError(f"kernel_qstar requires n >= 1, got {n}")
    return KernelRow(n=n, probs=_qstar_probs(law, n), kind="qstar")


def kernel_q(law: WLaw, n: int) -> KernelRow:
    """Row n of q: q*(n, m)/(1 - E W^n) for m < n"""
    if n < 1:
        raise ValueError(f"kernel_q requires n >= 1, got {n}")
    return KernelRow(n=n, probs=_q_probs(law, n), kind="q")


# ---------------------------------------------------------------------------
# Tables
# ---------------------------------------------------------------------------

def _self_loop_table(law: WLaw, n_max: int, k_max: int, shift: int) -> np.ndarray:
    """
    Solve P{X_n = k} = sum_{m<n} q*(n,m) P{X_m = k - shift} + q*(n,n) P{X_n = k-1}
    with X_0 = 0. shift = 0 gives L, shift = 1 gives M.
    """
    table = np.zeros((n_max + 1, k_max + 1))
    table[0, 0] = 1.0
    for n in range(1, n_max + 1):
        qstar = _qstar_probs(law, n)
        base = qstar[:n] @ table[:n]
        if shift:
            base = np.concatenate([[0.0], base[:-1]])
        # the self-loop term is a first-order recursion in k
        table[n] = signal.lfilter([1.0], [1.0, -qstar[n]], base)
    return np.clip(table, 0.0, 1.0)


def _grown_table(law: WLaw, statistic: Statistic, n_max: int, k_max: Optional[int],
                 config: DPConfig) -> PmfTable:
    shift = 1 if statistic is Statistic.M else 0
    automatic = k_max is None
    size = config.initial_k_max if automatic else k_max
    while True:
        probs = _self_loop_table(law, n_max, size, shift)
        deficit = np.clip(1.0 - probs.sum(axis=1), 0.0, None)
        if not automatic or deficit.max() <= config.mass_tolerance or size >= config.k_max_cap:
            break
        size = min(2 * size, config.k_max_cap)
        logger.info("growing k_max of the %s table to %d", statistic.value, size)

    truncated = bool(deficit.max() > config.mass_tolerance)
    if truncated:
        logger.warning("%s table for %s truncated at k_max=%d: mass deficit %.3g",
                       statistic.value, law, size, deficit.max())
    return PmfTable(statistic=statistic, law=law.law_string(), probs=probs, mass_deficit=deficit,
                    truncated=truncated, metadata={'k_max_automatic': automatic})


def pmf_L(law: WLaw, n_max: int, k_max: Optional[int] = None,
          config: Optional[DPConfig] = None) -> PmfTable:
    """
    Table of P{L_n = k} from L_n = L_{Q*_n(1)} + 1{Q*_n(1) = n}.

    Each equation is explicit in increasing k: the self-loop term refers to
    P{L_n = k - 1}. Without k_max the truncation grows until the mass
    deficit is below the tolerance.
    """
    if n_max < 0:
        raise ValueError(f"n_max must be nonnegative, got {n_max}")
    return _grown_table(law, Statistic.L, n_max, k_max, config or DPConfig())


def pmf_M(law: WLaw, n_max: int, k_max: Optional[int] = None,
          config: Optional[DPConfig] = None) -> PmfTable:
    """Table of P{M_n = k} from M_n = M_{Q*_n(1)} + 1"""
    if n_max < 0:
        raise ValueError(f"n_max must be nonnegative, got {n_max}")
    return _grown_table(law, Statistic.M, n_max, k_max, config or DPConfig())


def pmf_K(law: WLaw, n_max: int) -> PmfTable:
    """Table of P{K_n = k} from K_n = K_{Q_n(1)} + 1; support is 0..n_max"""
    if n_max < 0:
        raise ValueError(f"n_max must be nonnegative, got {n_max}")
    probs = np.zeros((n_max + 1, n_max + 1))
    probs[0, 0] = 1.0
    for n in range(1, n_max + 1):
        probs[n, 1:] = _q_probs(law, n) @ probs[:n, :-1]
    probs = np.clip(probs, 0.0, 1.0)
    deficit = np.clip(1.0 - probs.sum(axis=1), 0.0, None)
    return PmfTable(statistic=Statistic.K, law=law.law_string(), probs=probs, mass_deficit=deficit)


# ---------------------------------------------------------------------------
# Potential function and Z_n
# ---------------------------------------------------------------------------

@lru_cache(maxsize=256)
def potential_row(law: WLaw, n: int) -> np.ndarray:
    """
    g(n, m) for m = 0..n: probability that the chain Q_n visits m.

    Visit probabilities are pushed forward from n downwards:
    g(n, l) = sum_{j=l+1..n} g(n, j) q(j, l).
    """
    if n < 0:
        raise ValueError(f"potential_row requires n >= 0, got {n}")
    visits = np.zeros(n + 1)
    visits[n] = 1.0
    for j in range(n, 0, -1):
        if visits[j] > 0:
            visits[:j] += visits[j] * _q_probs(law, j)
    visits = np.clip(visits, 0.0, 1.0)
    visits.setflags(write=False)
    return visits


def potential_table(law: WLaw, n_max: int) -> np.ndarray:
    """Lower-triangular g(n, m) for 0 <= m <= n <= n_max by g(n, m) = sum_l q(n, l) g(l, m)"""
    table = np.zeros((n_max + 1, n_max + 1))
    table[0, 0] = 1.0
    for n in range(1, n_max + 1):
        table[n, :n] = _q_probs(law, n) @ table[:n, :n]
        table[n, n] = 1.0
    return np.clip(table, 0.0, 1.0)


def potential_g(law: WLaw, n: int, m: int) -> float:
    """g(n, m); g(m, m) = 1"""
    if not 0 <= m <= n:
        raise ValueError(f"potential_g requires 0 <= m <= n, got n={n}, m={m}")
    return float(potential_row(law, n)[m])


def _absorption_probabilities(law: WLaw, m_max: int) -> np.ndarray:
    """q(m, 0) = E(1-W)^m / (1 - E W^m) for m = 1..m_max (index 0 unused)"""
    values = np.zeros(m_max + 1)
    for m in range(1, m_max + 1):
        values[m] = _q_probs(law, m)[0]
    return values


def pmf_Z(law: WLaw, n: int, tolerance: float = 1e-6) -> np.ndarray:
    """
    P{Z_n = m} = g(n, m) q(m, 0) for m = 1..n (index 0 holds 0).

    Raises:
        InternalConsistencyError: if the probabilities miss 1 by more than `tolerance`
    """
    if n < 1:
        raise ValueError(f"pmf_Z requires n >= 1, got {n}")
    probs = potential_row(law, n) * _absorption_probabilities(law, n)
    probs[0] = 0.0
    total = float(probs.sum())
    if abs(total - 1.0) > tolerance:
        raise InternalConsistencyError(
            f"P{{Z_{n} = m}} sums to {total!r} under {law}; potential and kernels disagree")
    return probs


def pmf_Z_table(law: WLaw, n_max: int) -> PmfTable:
    """Table of P{Z_n = m} for n = 0..n_max (Z_0 = 0)"""
    absorption = _absorption_probabilities(law, max(n_max, 1))[:n_max + 1]
    probs = potential_table(law, n_max) * absorption[np.newaxis, :]
    probs[0, 0] = 1.0
    deficit = 1.0 - probs.sum(axis=1)
    if np.any(np.abs(deficit) > 1e-6):
        raise InternalConsistencyError(f"Z table under {law} fails normalisation ({np.abs(deficit).max():.3g})")
    return PmfTable(statistic=Statistic.Z, law=law.law_string(), probs=probs,
                    mass_deficit=np.clip(deficit, 0.0, None), method="potential")


def exact_table(law: WLaw, statistic: Statistic, n_max: int,
                k_max: Optional[int] = None) -> PmfTable:
    """Dispatch to the table builder of a statistic"""
    if statistic is Statistic.L:
        return pmf_L(law, n_max, k_max)
    if statistic is Statistic.M:
        return pmf_M(law, n_max, k_max)
    if statistic is Statistic.K:
        return pmf_K(law, n_max)
    return pmf_Z_table(law, n_max)


# ---------------------------------------------------------------------------
# Means of L_n
# ---------------------------------------------------------------------------

def s_ratio(law: WLaw, n: int) -> float:
    """s_n = E W^n / E(1-W)^n, formed from log moments"""
    if n < 1:
        raise ValueError(f"s_ratio requires n >= 1, got {n}")
    return math.exp(log_mixed_moment(law, n, 0) - log_mixed_moment(law, 0, n))


def _explicit_term_rational(law: WLaw, k: int) -> Optional[Fraction]:
    moment_w = rational_mixed_moment(law, k, 0)
    moment_1m = rational_mixed_moment(law, 0, k)
    if moment_w is None or moment_1m is None:
        return None
    return (1 - moment_1m) / (1 - moment_w)


def _explicit_term(law: WLaw, k: int) -> float:
    # (1 - E(1-W)^k) / (1 - E W^k) with both complements taken by expm1
    return math.expm1(log_mixed_moment(law, 0, k)) / math.expm1(log_mixed_moment(law, k, 0))


def mean_L_explicit(law: WLaw, n: int, exact: Optional[bool] = None) -> float:
    """
    E L_n = sum_{k=1..n} (-1)^(k+1) C(n, k) (1 - E(1-W)^k) / (1 - E W^k).

    Laws with rational moments are summed exactly with Fractions; otherwise
    the alternating sum cancels catastrophically and double precision is only
    accepted up to n = 30. `exact` forces one of the two paths.

    Raises:
        CapabilityError: if exact=True and the law has no rational moments
        PrecisionError: for n > 30 in double precision
    """
    if n < 1:
        raise ValueError(f"mean_L_explicit requires n >= 1, got {n}")
    rational = _explicit_term_rational(law, 1) is not None
    if exact and not rational:
        raise CapabilityError(f"{law} has no rational moments; supported: beta laws and dirac(p)")
    if rational and exact is not False:
        total = Fraction(0)
        for k in range(1, n + 1):
            total += (-1) ** (k + 1) * math.comb(n, k) * _explicit_term_rational(law, k)
        return float(total)
    if n > DOUBLE_PRECISION_N_MAX:
        raise PrecisionError(
            f"the alternating sum for E L_{n} loses all digits in double precision beyond "
            f"n = {DOUBLE_PRECISION_N_MAX} under {law}; use exact arithmetic (beta laws), "
            "the DP table (pmf_L) or mean_L_via_Z instead.")
    return float(sum((-1) ** (k + 1) * math.comb(n, k) * _explicit_term(law, k) for k in range(1, n + 1)))


def alternating_sum_scale(law: WLaw, n: int) -> float:
    """
    sum_k C(n, k) |(1 - E(1-W)^k)/(1 - E W^k)|; a relative error d in the
    terms moves the double-precision sum by up to d times this.
    """
    return float(sum(math.comb(n, k) * abs(_explicit_term(law, k)) for k in range(1, n + 1)))


def mean_L_via_Z(law: WLaw, n: int) -> float:
    """E L_n = E s_{Z_n}"""
    probs = pmf_Z(law, n)
    ratios = np.array([0.0] + [s_ratio(law, m) for m in range(1, n + 1)])
    return float(np.dot(probs, ratios))


@dataclass(frozen=True)
class MeanEstimate:
    """A computed mean with the method that produced it"""
    value: float
    method: str
    error_estimate: float = 0.0


@dataclass(frozen=True)
class RenewalMeasure:
    """
    Discretised renewal measure U = sum_k P{S_{k-1} in .} on a uniform grid.

    Attributes:
        grid: x_i = i * step
        weights: mass of U attached to x_i
        tail_density: Blackwell density 1/mu used beyond the grid (0 when mu is infinite)
        kind: "analytic" or "discrete"
    """
    grid: np.ndarray
    weights: np.ndarray
    tail_density: float
    kind: str

    def cumulative(self) -> np.ndarray:
        """U(x_i) = E N_{x_i}"""
        return np.cumsum(self.weights)


def _is_exponential_renewal(law: WLaw) -> bool:
    return isinstance(law, BetaLaw) and law.b == 1.0


def renewal_measure(law: WLaw, horizon: float, step: float = 0.01) -> RenewalMeasure:
    """
    Renewal measure of the walk |log W_1| + |log W_2| + ... on [0, horizon].

    For beta(theta, 1) the increments are exponential and U = delta_0 + theta dx.
    Otherwise the renewal equation U = delta_0 + F * U is solved on the grid
    with F discretised by midpoint increments.
    """
    if horizon <= 0 or step <= 0:
        raise ValueError("renewal_measure requires positive horizon and step")
    size = int(math.ceil(horizon / step)) + 1
    grid = step * np.arange(size)
    profile = moment_profile(law)
    tail_density = 1.0 / profile.mu if profile.mu_finite else 0.0

    if _is_exponential_renewal(law):
        weights = np.full(size, law.a * step)
        weights[0] = 1.0 + 0.5 * law.a * step
        weights[-1] = 0.5 * law.a * step
        return RenewalMeasure(grid=grid, weights=weights, tail_density=tail_density, kind="analytic")

    edges = np.concatenate([[0.0], grid[:-1] + 0.5 * step, [grid[-1] + 0.5 * step]])
    survival = law.survival(edges)
    increments = np.clip(survival[:-1] - survival[1:], 0.0, None)
    increments[0] = 1.0 - survival[1]
    denominator = np.concatenate([[1.0 - increments[0]], -increments[1:]])
    impulse = np.zeros(size)
    impulse[0] = 1.0
    weights = signal.lfilter([1.0], denominator, impulse)
    return RenewalMeasure(grid=grid, weights=weights, tail_density=tail_density, kind="discrete")


def _poissonised_summand(law: WLaw, t: float, x: np.ndarray) -> np.ndarray:
    """phi(t e^{-x}) - exp(-t e^{-x})"""
    s = t * np.exp(-np.asarray(x, dtype=float))
    return phi(law, s) - np.exp(-s)


def _poissonised_series(law: WLaw, t: float) -> Tuple[Optional[float], str, float]:
    terms_needed = int(math.ceil(math.e * t)) + 60
    if _explicit_term_rational(law, 1) is not None:
        t_exact = Fraction(str(t))
        total, power = Fraction(0), Fraction(1)
        for k in range(1, terms_needed + 1):
            power = power * t_exact / k
            total += (-1) ** (k + 1) * power * _explicit_term_rational(law, k)
        return float(total), "series-rational", 0.0

    log_terms = np.array([k * math.log(t) - math.lgamma(k + 1) for k in range(1, terms_needed + 1)])
    terms = [(-1) ** (k + 1) * math.exp(log_terms[k - 1]) * _explicit_term(law, k)
             for k in range(1, terms_needed + 1)]
    # quadrature moments carry about 1e-10 relative error each
    moment_error = 1e-10 if law.closed_log_mixed_moment(1, 0) is None else np.finfo(float).eps
    error = float(np.max(np.abs(terms))) * moment_error
    if error > 1e-8:
        return None, "series-double", error
    return float(math.fsum(terms)), "series-double", error


def _poissonised_integral(law: WLaw, t: float, grid_config: RenewalGridConfig) -> MeanEstimate:
    if _is_exponential_renewal(law):
        theta = law.a
        value, abserr = integrate.quad(lambda x: float(_poissonised_summand(law, t, x)), 0.0, np.inf,
                                       epsabs=1e-12, epsrel=1e-10, limit=DEFAULT_QUADRATURE.limit)
        atom = float(_poissonised_summand(law, t, 0.0))
        return MeanEstimate(atom + theta * value, "integral-analytic", theta * abserr)

    horizon = max(math.log(t), 0.0) + grid_config.extra_horizon
    measure = renewal_measure(law, horizon, grid_config.step)
    summand = _poissonised_summand(law, t, measure.grid)
    value = float(np.dot(summand, measure.weights))
    # beyond the grid the summand is about E W t e^{-x}
    tail = measure.tail_density * math.exp(log_mixed_moment(law, 1, 0)) * t * math.exp(-measure.grid[-1])
    return MeanEstimate(value + tail, "integral-renewal-grid", grid_config.step ** 2 * abs(value))


def mean_L_poissonised(law: WLaw, t: float,
                       grid_config: Optional[RenewalGridConfig] = None) -> MeanEstimate:
    """
    E L_{Pi_t} with Pi_t ~ Poisson(t).

    For t <= 30 the alternating series sum (-1)^(k+1) t^k/k! (1 - E(1-W)^k)/(1 - E W^k)
    is used (exact rationals when available); on cancellation or for larger t
    the integral int (phi(t e^{-x}) - exp(-t e^{-x})) U(dx) against the
    renewal measure is evaluated instead.
    """
    if t <= 0:
        raise ValueError(f"mean_L_poissonised requires t > 0, got {t}")
    grid_config = grid_config or RenewalGridConfig()
    if t <= SERIES_T_MAX:
        value, method, error = _poissonised_series(law, t)
        if value is not None:
            return MeanEstimate(value, method, error)
        logger.info("series for E L at t=%s cancels (error %.3g); switching to the integral", t, error)
    estimate = _poissonised_integral(law, t, grid_config)
    if not math.isfinite(estimate.value):
        raise QuadratureError(f"neither the series nor the integral for E L at t={t} converged")
    return estimate


def mean_L_asymptotic_iii(law: WLaw, n: float) -> float:
    """
    (1/mu) int_1^n phi(y)/y dy, the growth of E L_n when mu < inf and nu = inf.

    By Fubini the integral equals E[E1(1-W) - E1(n(1-W))] with E1 the
    exponential integral, evaluated as a single quadrature.

    Raises:
        CapabilityError: unless mu < infinity and nu = infinity
    """
    profile = moment_profile(law)
    if not profile.mu_finite:
        raise CapabilityError(f"the logarithmic-integral growth needs mu < infinity; {law} has mu = infinity")
    if profile.nu_finite:
        raise CapabilityError(
            f"{law} has nu = {profile.nu:.6g} < infinity: E L_n converges to nu/mu instead")
    if n <= 1:
        return 0.0
    log_n = math.log(n)

    def difference(lw, l1):
        l1 = float(l1)
        if l1 + log_n < -18.0:
            return log_n
        c = math.exp(l1)
        return float(special.exp1(c) - special.exp1(c * n))

    return expectation(law, difference) / profile.mu

"""
Reference limit laws of the sieve statistics and their norming constants.

This module provides:
- Gil-Pelaez inversion for the alpha-stable (1 < alpha < 2), 1-stable and
  positive-stable laws, with a Chambers-Mallows-Stuck sampler as oracle
- Mittag-Leffler moments, sampling (Kanter's representation) and CDF
- The mixed Poisson limit of L_n for beta(theta, 1), the limit of Z_n and
  the tail series of the limit of L_n
- Norming constants (a_n, b_n) for M_n and K_n in the five regimes
- LimitLawHandle objects with CDF/pmf/moments and tabulation
"""

import logging
import math
import re
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate, interpolate, special, stats

from .errors import CapabilityError, LawParseError, QuadratureError
from .exact_engine import PmfTable, pmf_L
from .law_library import (LogParetoLaw, WLaw, expectation, log_mixed_moment, m_function,
                          moment_profile, norming_c, open_uniform)
from .law_parser import parse_law

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class InversionConfig:
    """Quadrature settings for characteristic-function inversion"""
    epsabs: float = 1e-9
    epsrel: float = 1e-8
    limit: int = 2000
    # |phi(t)| is below exp(-decay) beyond the truncation point
    decay: float = 23.0
    # failure is declared when the error estimate exceeds this
    max_error: float = 1e-6


DEFAULT_INVERSION = InversionConfig()


def _inversion_integral(integrand: Callable[[float], float], lower: float, upper: float,
                        config: InversionConfig, what: str) -> float:
    value, abserr = integrate.quad(integrand, lower, upper, epsabs=config.epsabs,
                                   epsrel=config.epsrel, limit=config.limit)
    if not math.isfinite(value) or abserr > config.max_error:
        raise QuadratureError(f"Gil-Pelaez inversion for {what} did not converge", achieved=abserr)
    return value


def _stable_constants(alpha: float) -> Tuple[float, float]:
    """c = Gamma(1-alpha) cos(pi alpha/2) > 0 and d = Gamma(1-alpha) sin(pi alpha/2)"""
    g = special.gamma(1.0 - alpha)
    return g * math.cos(math.pi * alpha / 2.0), g * math.sin(math.pi * alpha / 2.0)


def stable_cdf(alpha: float, x: float, config: InversionConfig = DEFAULT_INVERSION) -> float:
    """
    CDF of the alpha-stable law with characteristic function
    exp{-|t|^alpha Gamma(1-alpha)(cos(pi alpha/2) + i sin(pi alpha/2) sgn t)}.

    F(x) = 1/2 + (1/pi) int_0^T exp(-c t^alpha) sin(t x + d t^alpha)/t dt,
    with T chosen so that the characteristic function is below exp(-decay).
    """
    if not 1 < alpha < 2:
        raise ValueError(f"stable_cdf requires alpha in (1, 2), got {alpha}")
    c, d = _stable_constants(alpha)
    upper = (config.decay / c) ** (1.0 / alpha)

    def integrand(t):
        ta = t ** alpha
        return math.exp(-c * ta) * math.sin(t * x + d * ta) / t

    value = 0.5 + _inversion_integral(integrand, 0.0, upper, config, f"stable({alpha})") / math.pi
    return min(max(value, 0.0), 1.0)


def one_stable_cdf(x: float, config: InversionConfig = DEFAULT_INVERSION,
                   patch: float = 1e-6) -> float:
    """
    CDF of the 1-stable law with characteristic function
    exp{-|t|(pi/2 - i log|t| sgn t)}.

    F(x) = 1/2 - (1/pi) int_0^inf exp(-pi t/2) sin(t log t - t x)/t dt; on
    (0, patch) the integrand is log t - x to first order and is integrated
    in closed form.
    """
    upper = 2.0 * config.decay / math.pi

    def integrand(t):
        return math.exp(-math.pi * t / 2.0) * math.sin(t * math.log(t) - t * x) / t

    head = patch * (math.log(patch) - 1.0) - x * patch
    value = 0.5 - (head + _inversion_integral(integrand, patch, upper, config, "one-stable")) / math.pi
    return min(max(value, 0.0), 1.0)


def positive_stable_cdf(alpha: float, s: float, config: InversionConfig = DEFAULT_INVERSION) -> float:
    """
    CDF of the positive alpha-stable law with Laplace transform exp(-lambda^alpha).

    After the substitution t = v^(1/alpha) the inversion integrand is bounded
    at the origin.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"positive_stable_cdf requires alpha in (0, 1), got {alpha}")
    if s <= 0:
        return 0.0
    a, b = math.cos(math.pi * alpha / 2.0), math.sin(math.pi * alpha / 2.0)
    upper = config.decay / a
    inv = 1.0 / alpha

    def integrand(v):
        return math.exp(-a * v) * math.sin(b * v - s * v ** inv) / (alpha * v)

    value = 0.5 - _inversion_integral(integrand, 0.0, upper, config, f"positive stable({alpha})") / math.pi
    return min(max(value, 0.0), 1.0)


def stable_sample(alpha: float, beta: float, scale: float, rng: np.random.Generator,
                  size: Optional[int] = None) -> ArrayLike:
    """
    Chambers-Mallows-Stuck sampler in the S1 parameterisation:
    characteristic function exp{-scale^alpha |t|^alpha (1 - i beta sgn(t) tan(pi alpha/2))}
    for alpha != 1 and exp{-scale |t| (1 + i beta (2/pi) sgn(t) log|t|)} for alpha = 1.
    """
    if not 0 < alpha <= 2 or not -1 <= beta <= 1 or scale <= 0:
        raise ValueError(f"invalid stable parameters alpha={alpha}, beta={beta}, scale={scale}")
    u = math.pi * (open_uniform(rng, size) - 0.5)
    w = rng.standard_exponential(size)
    if alpha == 1.0:
        half_pi = math.pi / 2.0
        t1 = (half_pi + beta * u) * np.tan(u)
        t2 = beta * np.log(half_pi * w * np.cos(u) / (half_pi + beta * u))
        x = (2.0 / math.pi) * (t1 - t2)
        return scale * x + beta * (2.0 / math.pi) * scale * math.log(scale)
    skew = math.atan(beta * math.tan(math.pi * alpha / 2.0)) / alpha
    t1 = np.sin(alpha * (u + skew)) / (math.cos(alpha * skew) * np.cos(u)) ** (1.0 / alpha)
    t2 = (np.cos(alpha * skew + (alpha - 1.0) * u) / w) ** ((1.0 - alpha) / alpha)
    return scale * t1 * t2


def stable_limit_sample(alpha: float, rng: np.random.Generator, size: Optional[int] = None) -> ArrayLike:
    """Variates of the law behind stable_cdf: S1 with beta = -1 and scale c^(1/alpha)"""
    c, _ = _stable_constants(alpha)
    return stable_sample(alpha, -1.0, c ** (1.0 / alpha), rng, size)


def one_stable_limit_sample(rng: np.random.Generator, size: Optional[int] = None) -> ArrayLike:
    """Variates of the law behind one_stable_cdf: S1 with alpha = 1, beta = -1, scale pi/2"""
    return stable_sample(1.0, -1.0, math.pi / 2.0, rng, size)


# ---------------------------------------------------------------------------
# Mittag-Leffler law
# ---------------------------------------------------------------------------

def mittag_leffler_moment(alpha: float, k: int) -> float:
    """k! / (Gamma(1-alpha)^k Gamma(1 + alpha k))"""
    if not 0 <= alpha < 1:
        raise ValueError(f"Mittag-Leffler index must lie in [0, 1), got {alpha}")
    if k < 1:
        raise ValueError(f"moment order must be positive, got {k}")
    return math.exp(math.lgamma(k + 1) - k * math.lgamma(1.0 - alpha) - math.lgamma(1.0 + alpha * k))


def positive_stable_sample(alpha: float, rng: np.random.Generator, size: Optional[int] = None) -> ArrayLike:
    """Kanter's representation of the positive stable law with Laplace transform exp(-lambda^alpha)"""
    u = math.pi * open_uniform(rng, size)
    e = rng.standard_exponential(size)
    log_s = (np.log(np.sin(alpha * u)) - np.log(np.sin(u)) / alpha
             + (1.0 - alpha) / alpha * (np.log(np.sin((1.0 - alpha) * u)) - np.log(e)))
    return np.exp(log_s)


def mittag_leffler_sample(alpha: float, rng: np.random.Generator, size: Optional[int] = None) -> ArrayLike:
    """Variates S^(-alpha)/Gamma(1-alpha); alpha = 0 gives the standard exponential"""
    if not 0 <= alpha < 1:
        raise ValueError(f"Mittag-Leffler index must lie in [0, 1), got {alpha}")
    if alpha == 0:
        return rng.standard_exponential(size)
    s = positive_stable_sample(alpha, rng, size)
    return np.exp(-alpha * np.log(s) - math.lgamma(1.0 - alpha))


def mittag_leffler_cdf(alpha: float, x: float, config: InversionConfig = DEFAULT_INVERSION) -> float:
    """P{S^(-alpha)/Gamma(1-alpha) <= x} = 1 - F_S((x Gamma(1-alpha))^(-1/alpha))"""
    if not 0 <= alpha < 1:
        raise ValueError(f"Mittag-Leffler index must lie in [0, 1), got {alpha}")
    if x <= 0:
        return 0.0
    if alpha == 0:
        return -math.expm1(-x)
    s = math.exp(-(math.log(x) + math.lgamma(1.0 - alpha)) / alpha)
    return 1.0 - positive_stable_cdf(alpha, s, config)


# ---------------------------------------------------------------------------
# Limits of L_n and Z_n
# ---------------------------------------------------------------------------

def pgf_L_infinity(theta: float, s: float) -> float:
    """E s^L = Gamma(1+theta) Gamma(1+theta-theta s) / Gamma(1+2 theta-theta s)"""
    if theta <= 0:
        raise ValueError(f"theta must be positive, got {theta}")
    if not 0 <= s <= 1:
        raise ValueError(f"pgf argument must lie in [0, 1], got {s}")
    return math.exp(math.lgamma(1.0 + theta) + math.lgamma(1.0 + theta - theta * s)
                    - math.lgamma(1.0 + 2.0 * theta - theta * s))


def pmf_L_infinity(theta: float, k: int, tolerance: float = 1e-10) -> float:
    """
    P{L = k} for the mixed Poisson limit with intensity theta |log(1-W)|, W ~ beta(theta, 1).

    With y = |log(1-W)| of density theta (1-e^-y)^(theta-1) e^-y the
    probability is int Poisson(k; theta y) density(y) dy.
    """
    if theta <= 0:
        raise ValueError(f"theta must be positive, got {theta}")
    if k < 0:
        return 0.0
    log_theta = math.log(theta)

    def integrand(y):
        if y <= 0:
            return 0.0
        log_one_minus = math.log(-math.expm1(-y))
        log_value = (-theta * y + k * (log_theta + math.log(y)) - math.lgamma(k + 1)
                     + log_theta + (theta - 1.0) * log_one_minus - y)
        return math.exp(log_value)

    peak = max(k / (1.0 + theta), 1e-3)
    total, error = 0.0, 0.0
    for lower, upper in ((0.0, peak), (peak, np.inf)):
        value, abserr = integrate.quad(integrand, lower, upper, epsabs=1e-14, epsrel=tolerance, limit=2000)
        total += value
        error += abserr
    if error > max(1e-12, 100 * tolerance * total):
        raise QuadratureError(f"mixed Poisson probability P{{L = {k}}} did not converge", achieved=error)
    return total


def pmf_Z_limit(law: WLaw, k: int) -> float:
    """
    P{Z = k} = E(1-W)^k / (mu k), the limit law of Z_n when mu < infinity.

    Raises:
        CapabilityError: if mu is infinite
    """
    profile = moment_profile(law)
    if not profile.mu_finite:
        raise CapabilityError(f"the Z_n limit needs mu < infinity; {law} has mu = infinity")
    if k < 1:
        return 0.0
    return math.exp(log_mixed_moment(law, 0, k)) / (profile.mu * k)


def mean_L_limit(law: WLaw) -> float:
    """lim E L_n = nu/mu (0 when mu is infinite and nu finite, inf when nu is infinite)"""
    profile = moment_profile(law)
    if not profile.nu_finite:
        return math.inf
    if not profile.mu_finite:
        return 0.0
    return profile.nu / profile.mu


@dataclass(frozen=True)
class SeriesEstimate:
    """A truncated series with an upper bound on the neglected terms"""
    value: float
    remainder_bound: float
    terms: int
    widened: bool = False


def survival_L_infinity_series(law: WLaw, i: int, pmf_L_table: Optional[PmfTable] = None,
                               terms: int = 200, tolerance: float = 1e-2) -> SeriesEstimate:
    """
    P{L >= i} = (1/mu) sum_j (E W^j / j) P{L_j = i - 1}, truncated at j = terms.

    Every state j of the chain is left through E W^j/(mu j) expected
    self-loops in the limit, and a self-loop at j adds one empty box.
    Since P{L_j = i-1} <= 1 the tail of the series is at most
    (nu - sum_{j <= terms} E W^j / j) / mu.

    Raises:
        CapabilityError: unless mu and nu are both finite
    """
    profile = moment_profile(law)
    if not (profile.mu_finite and profile.nu_finite):
        raise CapabilityError(f"the L_n limit series needs mu < infinity and nu < infinity; got {law}")
    if i < 1:
        raise ValueError(f"survival index must be positive, got {i}")
    if pmf_L_table is None or pmf_L_table.n_max < terms:
        pmf_L_table = pmf_L(law, terms)

    weights = np.array([math.exp(log_mixed_moment(law, j, 0)) / j for j in range(1, terms + 1)])
    probabilities = np.array([pmf_L_table.probability(j, i - 1) for j in range(1, terms + 1)])
    value = float(np.dot(weights, probabilities)) / profile.mu
    bound = max(profile.nu - float(weights.sum()), 0.0) / profile.mu
    widened = bound > tolerance
    if widened:
        logger.warning("series for P{L >= %d} under %s: remainder bound %.3g exceeds %.3g",
                       i, law, bound, tolerance)
    return SeriesEstimate(value=value, remainder_bound=bound, terms=terms, widened=widened)


# ---------------------------------------------------------------------------
# Norming constants
# ---------------------------------------------------------------------------

class NormalizationCase(Enum):
    """Regimes of the limit theorem for M_n"""
    A = "a"  # sigma^2 finite: normal
    B = "b"  # sigma^2 infinite, truncated second moment slowly varying: normal
    C = "c"  # tail index in (1, 2): alpha-stable
    D = "d"  # tail index 1: 1-stable
    E = "e"  # tail index in [0, 1): Mittag-Leffler, no centering


@dataclass(frozen=True)
class Normalization:
    """
    Norming constants: (X_n - b)/a converges to the case's limit law.

    Attributes:
        a: scale a_n > 0
        b: centering b_n
        case: regime
        notes: validity notes
    """
    a: float
    b: float
    case: NormalizationCase
    notes: str = ""

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"norming scale must be positive, got {self.a}")

    def standardize(self, values: ArrayLike) -> ArrayLike:
        return (np.asarray(values, dtype=float) - self.b) / self.a


def classify(law: WLaw) -> NormalizationCase:
    """Select the regime from the moment profile"""
    profile = moment_profile(law)
    if profile.sigma2_finite:
        return NormalizationCase.A
    alpha = profile.tail_alpha
    if alpha is None:
        raise CapabilityError(
            f"{law} has sigma^2 = infinity but no recorded regularly varying tail; "
            "cases (b)-(e) need P{|log W| > x} ~ x^-alpha L(x)")
    if alpha == 2:
        return NormalizationCase.B
    if alpha > 1:
        return NormalizationCase.C
    if alpha == 1:
        return NormalizationCase.D
    return NormalizationCase.E


def _centering_function(law: WLaw, case: NormalizationCase) -> Callable[[float], float]:
    """b as a function of x = log n"""
    profile = moment_profile(law)
    if case in (NormalizationCase.A, NormalizationCase.B, NormalizationCase.C):
        return lambda x: x / profile.mu
    if case is NormalizationCase.D:
        x0 = law.x0

        def centering(x):
            if x <= 0:
                return 0.0
            # r(y) = y x0 solves y P{|log W| > r(y)} = 1
            return x / m_function(law, x / (x0 * m_function(law, x)))
        return centering
    return lambda x: 0.0


def _scale(law: WLaw, case: NormalizationCase, log_n: float) -> Tuple[float, str]:
    profile = moment_profile(law)
    if case is NormalizationCase.A:
        return math.sqrt(profile.sigma2 * log_n / profile.mu ** 3), ""
    if not isinstance(law, LogParetoLaw):
        raise CapabilityError(f"case ({case.value}) norming needs a closed-form tail; {law} is not log-Pareto")
    alpha, x0 = law.alpha, law.x0
    if case is NormalizationCase.B:
        return profile.mu ** -1.5 * norming_c(law, log_n), "c solves c^2 = 2 x0^2 x log(c/x0)"
    if case is NormalizationCase.C:
        return profile.mu ** (-(alpha + 1.0) / alpha) * norming_c(law, log_n), ""
    if case is NormalizationCase.D:
        m = m_function(law, log_n)
        return x0 * (log_n / m) / m, "r(x) = x x0"
    return log_n ** alpha / x0 ** alpha, "L(x) = x0^alpha"


def normalization(law: WLaw, log_n: float, statistic: str = 'M') -> Normalization:
    """
    Norming constants for M_n (or K_n) at n = exp(log_n).

    For K_n the centering is b_K = int_0^{log n} g(log n - y) P{|log(1-W)| in dy}
    with g the centering function of M_n, evaluated by quadrature; the scale
    is that of M_n.

    Raises:
        CapabilityError: when the regime cannot be determined or needs an
            unsupported tail
    """
    if log_n <= 0:
        raise ValueError(f"normalization requires log n > 0, got {log_n}")
    statistic = statistic.upper()
    if statistic not in ('M', 'K'):
        raise ValueError(f"normalization is defined for M and K, got {statistic!r}")
    case = classify(law)
    scale, notes = _scale(law, case, log_n)
    centering = _centering_function(law, case)
    if statistic == 'M':
        return Normalization(a=scale, b=centering(log_n), case=case, notes=notes)

    def shifted(lw, l1):
        y = -float(l1)
        return centering(log_n - y) if y <= log_n else 0.0

    b_k = expectation(law, shifted) if case is not NormalizationCase.E else 0.0
    return Normalization(a=scale, b=b_k, case=case, notes=(notes + "; K centering by convolution").strip("; "))


def g_limit(law: WLaw, m: int) -> float:
    """lim_n g(n, m) = (1 - E W^m)/(mu m), 0 when mu is infinite"""
    profile = moment_profile(law)
    if not profile.mu_finite:
        return 0.0
    return -math.expm1(log_mixed_moment(law, m, 0)) / (profile.mu * m)


def khat_mean(law: WLaw, r: int) -> float:
    """E Khat_r = 1/(r mu) for the limit partition, 0 when mu is infinite"""
    if r < 1:
        raise ValueError(f"khat_mean requires r >= 1, got {r}")
    profile = moment_profile(law)
    return 1.0 / (r * profile.mu) if profile.mu_finite else 0.0


# ---------------------------------------------------------------------------
# Handles
# ---------------------------------------------------------------------------

class LimitKind(Enum):
    """Reference laws exposed through LimitLawHandle"""
    NORMAL = "normal"
    STABLE_ALPHA = "stable"
    ONE_STABLE = "one-stable"
    MITTAG_LEFFLER = "ml"
    MIXED_POISSON_L = "mixedpoisson"
    Z_LIMIT = "zlimit"
    ARCSINE_BETA = "arcsine"
    GEOMETRIC = "geometric"


DISCRETE_KINDS = {LimitKind.MIXED_POISSON_L, LimitKind.Z_LIMIT, LimitKind.GEOMETRIC}
INTERPOLATED_KINDS = {LimitKind.STABLE_ALPHA, LimitKind.ONE_STABLE, LimitKind.MITTAG_LEFFLER}

# grid ranges of the interpolated CDFs; points outside are inverted directly
_CDF_RANGES = {
    LimitKind.STABLE_ALPHA: (-40.0, 15.0),
    LimitKind.ONE_STABLE: (-30.0, 15.0),
    LimitKind.MITTAG_LEFFLER: (0.0, 12.0),
}
_CDF_GRID_POINTS = 1101


@lru_cache(maxsize=32)
def _cdf_interpolant(kind: LimitKind, param: float) -> interpolate.PchipInterpolator:
    lo, hi = _CDF_RANGES[kind]
    grid = np.linspace(lo, hi, _CDF_GRID_POINTS)
    point_cdf = _point_cdf(kind, param)
    values = np.maximum.accumulate(np.array([point_cdf(x) for x in grid]))
    logger.info("tabulated %s(%s) CDF on %d points", kind.value, param, grid.size)
    return interpolate.PchipInterpolator(grid, values, extrapolate=False)


def _point_cdf(kind: LimitKind, param: float) -> Callable[[float], float]:
    if kind is LimitKind.STABLE_ALPHA:
        return lambda x: stable_cdf(param, x)
    if kind is LimitKind.ONE_STABLE:
        return lambda x: one_stable_cdf(x)
    return lambda x: mittag_leffler_cdf(param, x)


@dataclass(frozen=True)
class LimitLawHandle:
    """
    Evaluable reference law.

    Attributes:
        kind: which limit law
        param: alpha for stable/Mittag-Leffler/arcsine laws, theta for the
            mixed Poisson law, p for the geometric law
        law: the W-law of a Z-limit handle
        config: inversion settings
    """
    kind: LimitKind
    param: Optional[float] = None
    law: Optional[WLaw] = None
    config: InversionConfig = field(default=DEFAULT_INVERSION, compare=False)

    def __post_init__(self):
        p = self.param
        if self.kind is LimitKind.STABLE_ALPHA and not (p is not None and 1 < p < 2):
            raise ValueError(f"stable handle needs alpha in (1, 2), got {p}")
        if self.kind is LimitKind.MITTAG_LEFFLER and not (p is not None and 0 <= p < 1):
            raise ValueError(f"Mittag-Leffler handle needs alpha in [0, 1), got {p}")
        if self.kind is LimitKind.MIXED_POISSON_L and not (p is not None and p > 0):
            raise ValueError(f"mixed Poisson handle needs theta > 0, got {p}")
        if self.kind is LimitKind.ARCSINE_BETA and not (p is not None and 0 < p < 1):
            raise ValueError(f"arcsine handle needs alpha in (0, 1), got {p}")
        if self.kind is LimitKind.GEOMETRIC and not (p is not None and 0 < p <= 1):
            raise ValueError(f"geometric handle needs p in (0, 1], got {p}")
        if self.kind is LimitKind.Z_LIMIT:
            if self.law is None:
                raise ValueError("Z-limit handle needs a W-law")
            if not moment_profile(self.law).mu_finite:
                raise CapabilityError(f"the Z_n limit needs mu < infinity; {self.law} has mu = infinity")

    @property
    def is_discrete(self) -> bool:
        return self.kind in DISCRETE_KINDS

    def label(self) -> str:
        if self.kind is LimitKind.NORMAL or self.kind is LimitKind.ONE_STABLE:
            return self.kind.value
        if self.kind is LimitKind.Z_LIMIT:
            return f"zlimit:{self.law.law_string()}"
        return f"{self.kind.value}:{self.param:g}"

    def __str__(self) -> str:
        return self.label()

    def pmf(self, k: ArrayLike) -> ArrayLike:
        """Probability mass at integer points (discrete kinds only)"""
        if not self.is_discrete:
            raise CapabilityError(f"{self.label()} is continuous; use cdf")
        ks = np.atleast_1d(np.asarray(k, dtype=int))
        if self.kind is LimitKind.GEOMETRIC:
            p = self.param
            values = np.where(ks >= 0, p * (1.0 - p) ** np.maximum(ks, 0), 0.0)
        elif self.kind is LimitKind.MIXED_POISSON_L:
            values = np.array([pmf_L_infinity(self.param, int(j)) for j in ks])
        else:
            values = np.array([pmf_Z_limit(self.law, int(j)) for j in ks])
        return float(values[0]) if np.ndim(k) == 0 else values

    def pmf_vector(self, k_max: int) -> np.ndarray:
        """pmf at 0..k_max"""
        return self.pmf(np.arange(k_max + 1))

    def cdf(self, x: ArrayLike) -> ArrayLike:
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        if self.is_discrete:
            top = int(max(np.floor(xs.max()), 0))
            cumulative = np.cumsum(self.pmf_vector(top))
            idx = np.floor(xs).astype(int)
            values = np.where(idx < 0, 0.0, cumulative[np.clip(idx, 0, top)])
        elif self.kind is LimitKind.NORMAL:
            values = stats.norm.cdf(xs)
        elif self.kind is LimitKind.ARCSINE_BETA:
            values = stats.beta.cdf(xs, 1.0 - self.param, self.param)
        elif self.kind is LimitKind.MITTAG_LEFFLER and self.param == 0:
            values = np.where(xs > 0, -np.expm1(-np.maximum(xs, 0.0)), 0.0)
        else:
            values = self._interpolated_cdf(xs)
        return float(values[0]) if np.ndim(x) == 0 else values

    def _interpolated_cdf(self, xs: np.ndarray) -> np.ndarray:
        param = self.param if self.param is not None else 1.0
        spline = _cdf_interpolant(self.kind, param)
        values = spline(xs)
        outside = np.isnan(values)
        if np.any(outside):
            point_cdf = _point_cdf(self.kind, param)
            values[outside] = [point_cdf(v) for v in xs[outside]]
        return np.clip(values, 0.0, 1.0)

    def mean(self) -> float:
        """First moment where the law has one"""
        return self.moment(1)

    def moment(self, k: int) -> float:
        """k-th moment; discrete laws are summed until the terms vanish"""
        if self.kind is LimitKind.NORMAL:
            return 0.0 if k % 2 else float(special.factorial2(k - 1, exact=True)) if k else 1.0
        if self.kind is LimitKind.MITTAG_LEFFLER:
            return mittag_leffler_moment(self.param, k)
        if self.kind is LimitKind.ARCSINE_BETA:
            return float(stats.beta.moment(k, 1.0 - self.param, self.param))
        if self.kind is LimitKind.STABLE_ALPHA and k == 1:
            return 0.0
        if self.kind is LimitKind.GEOMETRIC and k == 1:
            return (1.0 - self.param) / self.param
        if self.kind is LimitKind.MIXED_POISSON_L and k == 1:
            theta = self.param
            return theta * (special.digamma(1.0 + theta) - special.digamma(1.0))
        if self.kind is LimitKind.Z_LIMIT:
            ks = np.arange(1, 4001)
            return float(np.dot(ks.astype(float) ** k, self.pmf(ks)))
        if self.kind is LimitKind.MIXED_POISSON_L or self.kind is LimitKind.GEOMETRIC:
            ks = np.arange(0, 400)
            return float(np.dot(ks.astype(float) ** k, self.pmf(ks)))
        raise CapabilityError(f"{self.label()} has no finite moment of order {k}")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Variates from the reference law (continuous kinds)"""
        if self.kind is LimitKind.NORMAL:
            return rng.standard_normal(size)
        if self.kind is LimitKind.STABLE_ALPHA:
            return stable_limit_sample(self.param, rng, size)
        if self.kind is LimitKind.ONE_STABLE:
            return one_stable_limit_sample(rng, size)
        if self.kind is LimitKind.MITTAG_LEFFLER:
            return mittag_leffler_sample(self.param, rng, size)
        if self.kind is LimitKind.ARCSINE_BETA:
            return rng.beta(1.0 - self.param, self.param, size)
        if self.kind is LimitKind.GEOMETRIC:
            return rng.geometric(self.param, size) - 1
        raise CapabilityError(f"no sampler for {self.label()}")


def case_limit_handle(law: WLaw) -> LimitLawHandle:
    """The limit law of (M_n - b_n)/a_n for this law"""
    case = classify(law)
    if case in (NormalizationCase.A, NormalizationCase.B):
        return LimitLawHandle(LimitKind.NORMAL)
    if case is NormalizationCase.C:
        return LimitLawHandle(LimitKind.STABLE_ALPHA, moment_profile(law).tail_alpha)
    if case is NormalizationCase.D:
        return LimitLawHandle(LimitKind.ONE_STABLE)
    return LimitLawHandle(LimitKind.MITTAG_LEFFLER, moment_profile(law).tail_alpha)


_HANDLE_PATTERN = re.compile(r'^\s*([a-z-]+)\s*(?::\s*(.+?))?\s*$', re.IGNORECASE)


def limit_handle(spec: str) -> LimitLawHandle:
    """
    Parse a reference-law string.

    Accepted forms: normal, stable:1.5, one-stable, ml:0.5, mixedpoisson:1,
    zlimit:beta(1,1), arcsine:0.5, geometric:0.5.

    Raises:
        LawParseError: if the string is malformed
    """
    match = _HANDLE_PATTERN.match(spec or "")
    if not match:
        raise LawParseError(f"Cannot parse reference law {spec!r}")
    name, arg = match.group(1).lower(), match.group(2)
    kinds = {kind.value: kind for kind in LimitKind}
    if name not in kinds:
        raise LawParseError(f"Unknown reference law {name!r}; expected one of {', '.join(kinds)}")
    kind = kinds[name]
    try:
        if kind in (LimitKind.NORMAL, LimitKind.ONE_STABLE):
            if arg:
                raise LawParseError(f"{name} takes no parameter")
            return LimitLawHandle(kind)
        if arg is None:
            raise LawParseError(f"{name} needs a parameter, e.g. {name}:0.5")
        if kind is LimitKind.Z_LIMIT:
            return LimitLawHandle(kind, law=parse_law(arg))
        return LimitLawHandle(kind, float(arg))
    except LawParseError:
        raise
    except ValueError as e:
        raise LawParseError(f"Invalid reference law {spec!r}: {e}")


def tabulate(handle: LimitLawHandle, grid: Sequence[float]) -> List[Tuple[float, float, float]]:
    """
    Plot-ready rows (x or k, value, tolerance): pmf for discrete handles,
    CDF otherwise.
    """
    points = np.asarray(grid, dtype=float)
    if handle.is_discrete:
        ks = np.unique(np.round(points).astype(int))
        values = handle.pmf(ks)
        return [(float(k), float(v), 1e-10) for k, v in zip(ks, values)]
    values = handle.cdf(points)
    tolerance = handle.config.max_error if handle.kind in INTERPOLATED_KINDS else 1e-12
    return [(float(x), float(v), tolerance) for x, v in zip(points, values)]

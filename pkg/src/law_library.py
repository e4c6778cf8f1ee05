"""
Laws of the stick-breaking factor W and their moment functionals.

This module provides the value objects every other module consumes:
- The family of W-laws (beta, log-Pareto, the gamma example law, user
  quantile maps and the rejected lattice Dirac law)
- Sampling of W together with log W and log(1-W) without cancellation
- Mixed moments E[W^a (1-W)^b], the moment profile (mu, sigma^2, nu),
  tail functions and the Laplace functional phi(t) = E exp(-t(1-W))

All expectations for laws without closed forms are computed on the quantile
representation E f(W) = int_0^1 f(quantile(u)) du.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Callable, ClassVar, Optional, Tuple, Union

import numpy as np
from scipy import integrate, optimize, special, stats

from .errors import CapabilityError, LatticeLawError, QuadratureError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

# Probe levels used to locate the peak of an integrand before quadrature
_PROBE_LEVELS = np.unique(np.concatenate([
    np.logspace(-15, -1, 57),
    np.linspace(0.1, 0.9, 33),
    1.0 - np.logspace(-1, -15, 57),
]))


class LawFamily(Enum):
    """Shipped families of W-laws"""
    BETA = "beta"
    LOG_PARETO = "logpareto"
    EXAMPLE_GAMMA = "examplegamma"
    INVERSE_CDF = "inversecdf"
    DIRAC = "dirac"


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances for adaptive Gauss-Kronrod quadrature"""
    epsabs: float = 1e-12
    epsrel: float = 1e-10
    limit: int = 2000
    # failure is declared when the error estimate exceeds the target by this factor
    slack: float = 100.0


DEFAULT_QUADRATURE = QuadratureConfig()


@dataclass(frozen=True)
class MomentProfile:
    """
    Moments of the multiplicative walk increments.

    Attributes:
        mu: E|log W| (may be +inf)
        sigma2: Var(log W) (may be +inf)
        nu: E|log(1-W)| (may be +inf)
        tail_alpha: index alpha of P{|log W| > x} ~ L x^{-alpha}, when regularly varying
        tail_constant: the constant slowly varying factor L
    """
    mu: float
    sigma2: float
    nu: float
    tail_alpha: Optional[float] = None
    tail_constant: Optional[float] = None

    def __post_init__(self):
        if math.isfinite(self.mu) and self.mu <= 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if self.sigma2 < 0:
            raise ValueError(f"sigma2 must be nonnegative, got {self.sigma2}")
        if math.isfinite(self.sigma2) and not math.isfinite(self.mu):
            raise ValueError("finite sigma2 requires finite mu")
        if self.nu <= 0:
            raise ValueError(f"nu must be positive, got {self.nu}")
        if self.tail_alpha is not None and not 0 <= self.tail_alpha <= 2:
            raise ValueError(f"tail index must lie in [0, 2], got {self.tail_alpha}")

    @property
    def mu_finite(self) -> bool:
        return math.isfinite(self.mu)

    @property
    def sigma2_finite(self) -> bool:
        return math.isfinite(self.sigma2)

    @property
    def nu_finite(self) -> bool:
        return math.isfinite(self.nu)


def _fmt(value: float) -> str:
    """Render a parameter so that parsing it back yields the same float"""
    if float(value).is_integer():
        return str(int(value))
    return repr(float(value))


def log1mexp(x: ArrayLike) -> ArrayLike:
    """log(1 - exp(-x)) for x >= 0, accurate at both ends"""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide='ignore'):
        return np.where(x > math.log(2.0),
                        np.log1p(-np.exp(-x)),
                        np.log(-np.expm1(-np.minimum(x, math.log(2.0)))))


def open_uniform(rng: np.random.Generator, size=None) -> ArrayLike:
    """Uniform variates strictly inside (0, 1)"""
    return (rng.integers(0, 2 ** 53, size=size) + 0.5) / 2.0 ** 53


@dataclass(frozen=True)
class WLaw:
    """
    Base class of the law of the stick-breaking factor W on (0, 1).

    Subclasses implement log_pair (the quantile map in log coordinates),
    a law string and, where available, closed forms that override the
    quadrature defaults below.
    """
    family: ClassVar[LawFamily]

    def log_pair(self, u: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
        """Return (log W, log(1-W)) at quantile level u in (0, 1)"""
        raise NotImplementedError

    def law_string(self) -> str:
        raise NotImplementedError

    def __str__(self) -> str:
        return self.law_string()

    def quantile(self, u: ArrayLike) -> ArrayLike:
        """Quantile map of W"""
        log_w, _ = self.log_pair(u)
        return np.exp(log_w)

    def sample_log_pairs(self, rng: np.random.Generator, size: int) -> Tuple[np.ndarray, np.ndarray]:
        """Draw (log W, log(1-W)) for `size` independent factors"""
        return self.log_pair(open_uniform(rng, size))

    def closed_log_mixed_moment(self, a: float, b: float) -> Optional[float]:
        """Closed form of log E[W^a (1-W)^b], or None when quadrature is needed"""
        return None

    def closed_phi(self, t: np.ndarray) -> Optional[np.ndarray]:
        return None

    def compute_profile(self) -> MomentProfile:
        raise NotImplementedError

    def survival(self, x: np.ndarray) -> np.ndarray:
        """P{|log W| > x} for x >= 0 (vectorised)"""
        raise NotImplementedError

    def rational_mixed_moment(self, a: int, b: int) -> Optional[Fraction]:
        return None


@dataclass(frozen=True)
class BetaLaw(WLaw):
    """Beta(a, b) law, density proportional to x^(a-1) (1-x)^(b-1)"""
    a: float
    b: float
    family: ClassVar[LawFamily] = LawFamily.BETA

    def __post_init__(self):
        for name, value in (("a", self.a), ("b", self.b)):
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"beta parameter {name} must be positive, got {value}")

    def law_string(self) -> str:
        return f"beta({_fmt(self.a)},{_fmt(self.b)})"

    def log_pair(self, u):
        u = np.asarray(u, dtype=float)
        w = stats.beta.ppf(u, self.a, self.b)
        one_minus_w = stats.beta.isf(u, self.b, self.a)
        with np.errstate(divide='ignore'):
            return np.log(w), np.log(one_minus_w)

    def sample_log_pairs(self, rng, size):
        w = rng.beta(self.a, self.b, size=size)
        w = np.clip(w, np.finfo(float).tiny, 1.0 - np.finfo(float).epsneg)
        return np.log(w), np.log1p(-w)

    def closed_log_mixed_moment(self, a, b):
        return float(special.betaln(self.a + a, self.b + b) - special.betaln(self.a, self.b))

    def closed_phi(self, t):
        t = np.asarray(t, dtype=float)
        if self.a == 1.0 and self.b == 1.0:
            safe = np.where(t > 0, t, 1.0)
            return np.where(t > 0, -np.expm1(-safe) / safe, 1.0)
        if np.any(t > 50.0):
            return None
        # 1 - W ~ beta(b, a), whose moment generating function is 1F1(b; a+b; s)
        return special.hyp1f1(self.b, self.a + self.b, -t)

    def compute_profile(self) -> MomentProfile:
        return MomentProfile(
            mu=float(special.digamma(self.a + self.b) - special.digamma(self.a)),
            sigma2=float(special.polygamma(1, self.a) - special.polygamma(1, self.a + self.b)),
            nu=float(special.digamma(self.a + self.b) - special.digamma(self.b)),
        )

    def survival(self, x):
        x = np.asarray(x, dtype=float)
        return stats.beta.cdf(np.exp(-x), self.a, self.b)

    def rational_mixed_moment(self, a, b):
        pa, pb = Fraction(str(self.a)), Fraction(str(self.b))
        value = Fraction(1)
        for i in range(a):
            value *= (pa + i) / (pa + pb + i)
        for i in range(b):
            value *= (pb + i) / (pa + pb + a + i)
        return value


@dataclass(frozen=True)
class LogParetoLaw(WLaw):
    """W = exp(-X) with X Pareto: P{X > x} = min(1, (x/x0)^(-alpha))"""
    alpha: float
    x0: float = 1.0
    family: ClassVar[LawFamily] = LawFamily.LOG_PARETO

    def __post_init__(self):
        if not 0 < self.alpha <= 2:
            raise ValueError(f"log-Pareto alpha must lie in (0, 2], got {self.alpha}")
        if not (math.isfinite(self.x0) and self.x0 > 0):
            raise ValueError(f"log-Pareto x0 must be positive, got {self.x0}")

    def law_string(self) -> str:
        if self.x0 == 1.0:
            return f"logpareto({_fmt(self.alpha)})"
        return f"logpareto({_fmt(self.alpha)},{_fmt(self.x0)})"

    def log_pair(self, u):
        u = np.asarray(u, dtype=float)
        x = self.x0 * u ** (-1.0 / self.alpha)
        return -x, log1mexp(x)

    def compute_profile(self) -> MomentProfile:
        mu = self.alpha * self.x0 / (self.alpha - 1.0) if self.alpha > 1 else math.inf
        nu = _expectation(self, lambda lw, l1: -l1)
        return MomentProfile(mu=mu, sigma2=math.inf, nu=nu,
                             tail_alpha=self.alpha, tail_constant=self.x0 ** self.alpha)

    def survival(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide='ignore'):
            return np.where(x <= self.x0, 1.0, (np.maximum(x, self.x0) / self.x0) ** (-self.alpha))


@dataclass(frozen=True)
class ExampleGammaLaw(WLaw):
    """P{W > x} = 1 / (1 + |log(1-x)|^gamma), gamma in (0, 1/2)"""
    gamma: float
    family: ClassVar[LawFamily] = LawFamily.EXAMPLE_GAMMA

    def __post_init__(self):
        if not 0 < self.gamma < 0.5:
            raise ValueError(f"example law gamma must lie in (0, 1/2), got {self.gamma}")

    def law_string(self) -> str:
        return f"examplegamma({_fmt(self.gamma)})"

    def log_pair(self, u):
        u = np.asarray(u, dtype=float)
        # y = |log(1-W)| = ((1-u)/u)^(1/gamma)
        with np.errstate(over='ignore'):
            y = np.exp((np.log1p(-u) - np.log(u)) / self.gamma)
        return log1mexp(y), -y

    def compute_profile(self) -> MomentProfile:
        mu = _expectation(self, lambda lw, l1: -lw)
        second = _expectation(self, lambda lw, l1: lw * lw)
        return MomentProfile(mu=mu, sigma2=max(second - mu * mu, 0.0), nu=math.inf)

    def survival(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide='ignore', over='ignore'):
            ell = -log1mexp(x)
            return 1.0 / (1.0 + ell ** (-self.gamma))


@dataclass(frozen=True)
class InverseCdfLaw(WLaw):
    """
    Extension point: a law given by a monotone quantile map (0,1) -> (0,1).

    Finiteness of the moments cannot be read off a quantile map, so it is
    declared by the caller; declared-finite moments are computed by quadrature.
    """
    quantile_fn: Callable[[np.ndarray], np.ndarray]
    name: str = "inversecdf"
    mu_finite: bool = True
    sigma2_finite: bool = True
    nu_finite: bool = True
    family: ClassVar[LawFamily] = LawFamily.INVERSE_CDF

    def law_string(self) -> str:
        return self.name

    def log_pair(self, u):
        q = np.asarray(self.quantile_fn(np.asarray(u, dtype=float)), dtype=float)
        with np.errstate(divide='ignore'):
            return np.log(q), np.log1p(-q)

    def compute_profile(self) -> MomentProfile:
        mu = _expectation(self, lambda lw, l1: -lw) if self.mu_finite else math.inf
        sigma2 = math.inf
        if self.sigma2_finite and self.mu_finite:
            sigma2 = max(_expectation(self, lambda lw, l1: lw * lw) - mu * mu, 0.0)
        nu = _expectation(self, lambda lw, l1: -l1) if self.nu_finite else math.inf
        return MomentProfile(mu=mu, sigma2=sigma2, nu=nu)

    def _cdf(self, w: float) -> float:
        if w <= 0:
            return 0.0
        if w >= 1:
            return 1.0
        f = lambda u: float(self.quantile_fn(np.asarray(u))) - w
        lo, hi = 1e-15, 1.0 - 1e-15
        if f(lo) >= 0:
            return 0.0
        if f(hi) <= 0:
            return 1.0
        return optimize.brentq(f, lo, hi, xtol=1e-14)

    def survival(self, x):
        x = np.asarray(x, dtype=float)
        return np.vectorize(lambda v: self._cdf(math.exp(-v)))(x)


@dataclass(frozen=True)
class DiracLaw(WLaw):
    """Point mass at p; lattice, hence only usable with an explicit override"""
    p: float
    allow_lattice: bool = False
    family: ClassVar[LawFamily] = LawFamily.DIRAC

    def __post_init__(self):
        if not 0 < self.p < 1:
            raise ValueError(f"Dirac location must lie in (0, 1), got {self.p}")
        if not self.allow_lattice:
            raise LatticeLawError(
                f"dirac({_fmt(self.p)}) makes |log W| lattice (geometric frequencies); "
                "limit theorems assume a non-lattice law. Pass allow_lattice=True "
                "for exploratory use only.")

    def law_string(self) -> str:
        return f"dirac({_fmt(self.p)})"

    def log_pair(self, u):
        shape = np.shape(u)
        return np.full(shape, math.log(self.p)), np.full(shape, math.log1p(-self.p))

    def closed_log_mixed_moment(self, a, b):
        return a * math.log(self.p) + b * math.log1p(-self.p)

    def closed_phi(self, t):
        return np.exp(-np.asarray(t, dtype=float) * (1.0 - self.p))

    def compute_profile(self) -> MomentProfile:
        return MomentProfile(mu=-math.log(self.p), sigma2=0.0, nu=-math.log1p(-self.p))

    def survival(self, x):
        return (np.asarray(x, dtype=float) < -math.log(self.p)).astype(float)

    def rational_mixed_moment(self, a, b):
        p = Fraction(str(self.p))
        return p ** a * (1 - p) ** b


def _weighted(coef: float, logs: np.ndarray) -> np.ndarray:
    """coef * logs with the convention 0 * (-inf) = 0"""
    if coef == 0:
        return np.zeros_like(logs)
    return coef * logs


def _check_quad(value: float, abserr: float, config: QuadratureConfig, what: str) -> None:
    target = max(config.epsabs, config.epsrel * abs(value))
    if not math.isfinite(value) or abserr > config.slack * target:
        raise QuadratureError(f"quadrature for {what} did not converge", achieved=abserr)


def _expectation(law: WLaw, fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
                 config: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """E fn(log W, log(1-W)) on the quantile representation"""
    def integrand(u):
        lw, l1 = law.log_pair(u)
        return float(fn(lw, l1))

    value, abserr = integrate.quad(integrand, 0.0, 1.0, epsabs=config.epsabs,
                                   epsrel=config.epsrel, limit=config.limit)
    _check_quad(value, abserr, config, f"an expectation under {law}")
    return value


def _log_expectation(law: WLaw, log_fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
                     config: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """
    log E exp(log_fn(log W, log(1-W))) with the integrand rescaled by its peak,
    so that tiny expectations keep relative accuracy.
    """
    lw, l1 = law.log_pair(_PROBE_LEVELS)
    probe = np.nan_to_num(log_fn(lw, l1), nan=-np.inf)
    peak_index = int(np.argmax(probe))
    shift = probe[peak_index]
    if not np.isfinite(shift):
        return -math.inf
    u_peak = _PROBE_LEVELS[peak_index]

    def integrand(u):
        a, b = law.log_pair(u)
        value = log_fn(a, b) - shift
        return float(np.exp(value)) if np.isfinite(value) else 0.0

    points = [u_peak] if 0.0 < u_peak < 1.0 else None
    value, abserr = integrate.quad(integrand, 0.0, 1.0, points=points, epsabs=config.epsabs,
                                   epsrel=config.epsrel, limit=config.limit)
    _check_quad(value, abserr, config, f"a log-moment under {law}")
    if value <= 0:
        return -math.inf
    return shift + math.log(value)


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def sample_w(law: WLaw, rng: np.random.Generator) -> float:
    """One variate of W; deterministic given the generator state"""
    log_w, _ = law.sample_log_pairs(rng, 1)
    return float(np.exp(log_w[0]))


def log_pair_quantile(law: WLaw, u: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    return law.log_pair(u)


def expectation(law: WLaw, fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
                config: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """E fn(log W, log(1-W)) by quadrature on the quantile representation"""
    return _expectation(law, fn, config)


@lru_cache(maxsize=65536)
def log_mixed_moment(law: WLaw, a: float, b: float) -> float:
    """log E[W^a (1-W)^b]"""
    if a < 0 or b < 0:
        raise ValueError(f"moment orders must be nonnegative, got ({a}, {b})")
    if a == 0 and b == 0:
        return 0.0
    closed = law.closed_log_mixed_moment(a, b)
    if closed is not None:
        return closed
    logger.debug("quadrature for E[W^%s (1-W)^%s] under %s", a, b, law)
    return _log_expectation(law, lambda lw, l1: _weighted(a, lw) + _weighted(b, l1))


def mixed_moment(law: WLaw, a: int, b: int) -> float:
    """
    E[W^a (1-W)^b].

    Beta laws use the beta-function closed form; every other law is integrated
    on the quantile representation.

    Raises:
        QuadratureError: if the quadrature does not converge
    """
    return math.exp(log_mixed_moment(law, a, b))


def moment(law: WLaw, k: int) -> float:
    """E W^k"""
    return mixed_moment(law, k, 0)


def moment_1m(law: WLaw, k: int) -> float:
    """E (1-W)^k"""
    return mixed_moment(law, 0, k)


def rational_mixed_moment(law: WLaw, a: int, b: int) -> Optional[Fraction]:
    """Exact E[W^a (1-W)^b] for laws with rational parameters, else None"""
    return law.rational_mixed_moment(a, b)


@lru_cache(maxsize=256)
def moment_profile(law: WLaw) -> MomentProfile:
    """mu, sigma^2 and nu with infinite moments declared per family"""
    return law.compute_profile()


def survival_log_w(law: WLaw, x: ArrayLike) -> ArrayLike:
    """P{|log W| > x}"""
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 0):
        raise ValueError("survival_log_w requires x >= 0")
    result = law.survival(x_arr)
    return float(result) if np.ndim(result) == 0 else result


def _integrate_survival(law: WLaw, upper: float) -> float:
    # geometric splitting keeps exponentially decaying tails resolved
    edges = [0.0]
    edge = 1.0
    while edge < upper:
        edges.append(edge)
        edge *= 2.0
    edges.append(upper)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        value, abserr = integrate.quad(lambda y: float(law.survival(y)), lo, hi,
                                       epsabs=1e-13, epsrel=1e-11, limit=DEFAULT_QUADRATURE.limit)
        total += value
    return total


def m_function(law: WLaw, x: float) -> float:
    """m(x) = int_0^x P{|log W| > y} dy"""
    if x <= 0:
        raise ValueError(f"m_function requires x > 0, got {x}")
    if isinstance(law, LogParetoLaw):
        alpha, x0 = law.alpha, law.x0
        if x <= x0:
            return x
        if alpha == 1.0:
            return x0 + x0 * math.log(x / x0)
        return x0 + x0 ** alpha * (x ** (1.0 - alpha) - x0 ** (1.0 - alpha)) / (1.0 - alpha)
    return _integrate_survival(law, x)


def norming_c(law: WLaw, x: float) -> float:
    """
    Norming function c(x) with x L(c(x)) / c(x)^alpha -> 1.

    For LogPareto with alpha < 2 the slowly varying factor is the constant
    x0^alpha and c(x) = x0 x^(1/alpha). For alpha = 2 the truncated second
    moment is 2 x0^2 log(x/x0) and c solves c^2 = 2 x0^2 x log(c/x0).

    Raises:
        CapabilityError: for families without a closed-form tail
    """
    if x <= 0:
        raise ValueError(f"norming_c requires x > 0, got {x}")
    if not isinstance(law, LogParetoLaw):
        raise CapabilityError(
            f"norming_c is not available for {law}; supported families: logpareto(alpha in (0,2])")
    if law.alpha < 2:
        return law.x0 * x ** (1.0 / law.alpha)
    x0 = law.x0
    f = lambda c: c * c - 2.0 * x0 * x0 * x * math.log(c / x0)
    # f is minimal at x0 sqrt(x); the norming constant is the larger root
    lo = x0 * math.sqrt(max(x, 1.0))
    if f(lo) >= 0:
        return lo
    hi = 2.0 * lo
    while f(hi) < 0:
        hi *= 2.0
    return optimize.brentq(f, lo, hi)


def phi(law: WLaw, t: ArrayLike, config: QuadratureConfig = DEFAULT_QUADRATURE) -> ArrayLike:
    """phi(t) = E exp(-t (1-W)), vectorised over t"""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t_arr < 0):
        raise ValueError("phi requires t >= 0")
    values = law.closed_phi(t_arr)
    if values is None:
        def integrand(u):
            _, l1 = law.log_pair(u)
            return np.exp(-t_arr * math.exp(float(l1)))

        values, abserr = integrate.quad_vec(integrand, 0.0, 1.0, epsabs=config.epsabs,
                                            epsrel=config.epsrel, norm='max', limit=config.limit)
        _check_quad(float(np.max(values)), float(abserr), config, f"phi under {law}")
        values = np.clip(values, 0.0, 1.0)
    if np.ndim(t) == 0:
        return float(values[0])
    return np.asarray(values)

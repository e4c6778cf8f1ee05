"""
Monte Carlo engine for the Bernoulli sieve.

This module simulates the occupancy scheme with the paintbox coupling:
- Balls carry exponential marks E_j = -log U_j, boxes are the gaps of the
  additive walk S_k = |log W_1| + ... + |log W_k| (carried in log space)
- Fixed-n and poissonised samples, the renewal count N_t, the small-box
  count N*(x) and the stationary limit partition
- Exact large-n samplers for M_n = N_{T_n} and Z_n working from log n alone
- Seeded batch runs with per-replicate counter-based generators
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from enum import Enum
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from .errors import CapabilityError
from .law_library import WLaw, log1mexp, moment_profile, open_uniform
from .rng import child_generator, validate_seed

logger = logging.getLogger(__name__)

STATISTICS = ('K', 'M', 'L', 'Z')


@dataclass(frozen=True)
class OccupancySample:
    """
    Statistics of one realization of the sieve.

    Attributes:
        n_balls: number of balls thrown
        K: occupied boxes
        M: occupancy range (index of the last occupied box)
        L: empty boxes within the range, M - K
        Z: balls in box M
        spectrum: r -> K_r, the number of boxes holding exactly r balls
    """
    n_balls: int
    K: int
    M: int
    L: int
    Z: int
    spectrum: Dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.L != self.M - self.K:
            raise ValueError(f"L must equal M - K, got L={self.L}, M={self.M}, K={self.K}")
        if sum(self.spectrum.values()) != self.K:
            raise ValueError("occupancy spectrum does not add up to K")
        if sum(r * c for r, c in self.spectrum.items()) != self.n_balls:
            raise ValueError("occupancy spectrum does not add up to the ball count")
        if self.n_balls >= 1 and self.Z < 1:
            raise ValueError("the last occupied box holds at least one ball")

    @classmethod
    def empty(cls) -> 'OccupancySample':
        return cls(n_balls=0, K=0, M=0, L=0, Z=0, spectrum={})

    def value(self, statistic: str) -> int:
        return getattr(self, statistic)

    def k_r(self, r: int) -> int:
        return self.spectrum.get(r, 0)


@dataclass(frozen=True)
class LimitPartitionSample:
    """
    One draw of the limit partition.

    Attributes:
        khat: r -> number of component intervals right of Y holding exactly r atoms
        y_leftmost: leftmost atom of the unit Poisson process
        window_depth: log of the window edge; atoms live on (0, exp(window_depth))
        boxes_counted: number of complete boxes inside the window
        atoms_discarded: atoms lying in boxes that cross the window edge
    """
    khat: Dict[int, int]
    y_leftmost: float
    window_depth: float
    boxes_counted: int
    atoms_discarded: int

    def k_hat(self, r: int) -> int:
        return self.khat.get(r, 0)


class _WalkStream:
    """
    Lazily extended additive walk S_0 = 0, S_k = |log W_1| + ... + |log W_k|.

    Chunks are drawn with a fixed doubling schedule so the consumed stream does
    not depend on the level the walk is extended to.
    """

    FIRST_CHUNK = 64
    MAX_CHUNK = 1 << 20

    def __init__(self, law: WLaw, rng: np.random.Generator):
        self.law = law
        self.rng = rng
        self._epochs: List[np.ndarray] = [np.zeros(1)]
        self._log_one_minus: List[np.ndarray] = [np.full(1, np.nan)]
        self._chunk = self.FIRST_CHUNK
        self._cache: Optional[Tuple[np.ndarray, np.ndarray]] = None
        self.last = 0.0

    def extend_until(self, level: float) -> None:
        """Draw factors until the last epoch exceeds `level`"""
        while self.last <= level:
            log_w, log_one_minus = self.law.sample_log_pairs(self.rng, self._chunk)
            epochs = self.last + np.cumsum(-log_w)
            self._epochs.append(epochs)
            self._log_one_minus.append(log_one_minus)
            self.last = float(epochs[-1])
            self._chunk = min(2 * self._chunk, self.MAX_CHUNK)
            self._cache = None

    def _arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        if self._cache is None:
            self._cache = (np.concatenate(self._epochs), np.concatenate(self._log_one_minus))
        return self._cache

    @property
    def epochs(self) -> np.ndarray:
        """S_0, S_1, ... drawn so far"""
        return self._arrays()[0]

    @property
    def log_one_minus(self) -> np.ndarray:
        """log(1 - W_k) aligned with the epochs (index 0 unused)"""
        return self._arrays()[1]


def renewal_index(epochs: np.ndarray, t: float) -> int:
    """N_t = inf{k >= 1: S_k > t} read off a walk that already passed t"""
    return int(np.searchsorted(epochs, t, side='right'))


def _simulate_occupancy_with_walk(law: WLaw, n: int, rng: np.random.Generator
                                  ) -> Tuple[OccupancySample, np.ndarray, float]:
    if n < 0:
        raise ValueError(f"number of balls must be nonnegative, got {n}")
    if n == 0:
        return OccupancySample.empty(), np.zeros(1), 0.0

    marks = -np.log(open_uniform(rng, n))
    top = float(marks.max())
    walk = _WalkStream(law, rng)
    walk.extend_until(top)
    epochs = walk.epochs

    # a mark in [S_{k-1}, S_k) falls in box k; ties share a box
    boxes = np.searchsorted(epochs, marks, side='right')
    m_range = int(boxes.max())
    counts = np.bincount(boxes, minlength=m_range + 1)[1:m_range + 1]
    occupied = counts[counts > 0]
    tally = np.bincount(occupied)
    spectrum = {int(r): int(c) for r, c in enumerate(tally) if r > 0 and c > 0}
    k_occupied = int(occupied.size)
    sample = OccupancySample(n_balls=n, K=k_occupied, M=m_range, L=m_range - k_occupied,
                             Z=int(counts[-1]), spectrum=spectrum)
    return sample, epochs, top


def simulate_occupancy(law: WLaw, n: int, rng: np.random.Generator) -> OccupancySample:
    """
    Throw n balls into the sieve and record K, M, L, Z and the spectrum.

    Cost is O(n log n + M): the marks are bucketed into the walk's gaps by
    binary search.
    """
    sample, _, _ = _simulate_occupancy_with_walk(law, n, rng)
    return sample


def simulate_poissonised(law: WLaw, t: float, rng: np.random.Generator) -> OccupancySample:
    """Sieve with a Poisson(t) number of balls"""
    if t <= 0:
        raise ValueError(f"poissonisation intensity must be positive, got {t}")
    return simulate_occupancy(law, int(rng.poisson(t)), rng)


def renewal_count(law: WLaw, t: float, rng: np.random.Generator) -> int:
    """N_t, the first index at which the additive walk exceeds t"""
    if t < 0:
        raise ValueError(f"renewal level must be nonnegative, got {t}")
    walk = _WalkStream(law, rng)
    walk.extend_until(t)
    return renewal_index(walk.epochs, t)


def small_box_count(law: WLaw, x: float, rng: np.random.Generator) -> int:
    """N*(x) = #{k: p_k >= exp(-x)}"""
    if x <= 0:
        raise ValueError(f"small_box_count requires x > 0, got {x}")
    walk = _WalkStream(law, rng)
    # once Q_k < exp(-x) no later stick can reach exp(-x)
    walk.extend_until(x)
    epochs, log_one_minus = walk.epochs, walk.log_one_minus
    last = renewal_index(epochs, x)
    log_lengths = -epochs[:last] + log_one_minus[1:last + 1]
    return int(np.count_nonzero(log_lengths >= -x))


def sample_top_mark(log_n: float, rng: np.random.Generator) -> float:
    """
    T_n = max of n standard exponentials, sampled from log n alone.

    T_n = -log(1 - U^(1/n)); with w = -log U and v = -w/n this is
    log n - log w - log((1 - e^v)/(-v)), stable for astronomically large n.
    """
    if log_n < 0:
        raise ValueError(f"log n must be nonnegative, got {log_n}")
    w = float(rng.standard_exponential())
    v = -w * math.exp(-log_n) if log_n < 745.0 else 0.0
    correction = 0.0 if v == 0.0 else math.log(-math.expm1(v) / -v)
    return log_n - math.log(w) - correction


def shortcut_sample_M(law: WLaw, log_n: float, rng: np.random.Generator) -> int:
    """Exact draw of M_n through M_n = N_{T_n}"""
    if log_n <= 0:
        raise ValueError(f"shortcut samplers require log n > 0, got {log_n}")
    top = sample_top_mark(log_n, rng)
    return renewal_count(law, top, rng)


def _int_from_log(log_value: float) -> int:
    if log_value < 700.0:
        return int(round(math.exp(log_value)))
    with localcontext() as ctx:
        ctx.prec = 40
        return int(Decimal(log_value).exp())


def shortcut_sample_Z(law: WLaw, log_n: float, rng: np.random.Generator) -> int:
    """
    Draw of Z_n from log n.

    Given T_n the other n-1 marks are iid exponentials conditioned to lie
    below T_n; each of them shares the last box with probability
    p = (e^{-s} - e^{-T})/(1 - e^{-T}), s = S_{N-1} the last renewal epoch
    below T. Z_n = 1 + Binomial(n-1, p), which is the joint law behind the
    top-spacing representation P{Z_n > k} = P{undershoot > E_{n,n} - E_{n-k,n}}.
    The binomial draw is exact for log n <= 40. Beyond that it is replaced by
    its Poisson limit when the mean n p is below 1e7 and by a normal draw in
    log space otherwise, so the draw is approximate for log n > 40.
    """
    if log_n <= 0:
        raise ValueError(f"shortcut samplers require log n > 0, got {log_n}")
    top = sample_top_mark(log_n, rng)
    walk = _WalkStream(law, rng)
    walk.extend_until(top)
    epochs = walk.epochs
    last_epoch = float(epochs[renewal_index(epochs, top) - 1])
    undershoot = top - last_epoch
    if undershoot <= 0:
        return 1
    log_p = -last_epoch + float(log1mexp(undershoot)) - float(log1mexp(top))
    log_p = min(log_p, 0.0)

    if log_n <= 40.0:
        n = int(round(math.exp(log_n)))
        if n <= 1:
            return 1
        return 1 + int(rng.binomial(n - 1, math.exp(log_p)))

    log_mean = log_n + log_p
    if log_mean < math.log(1e7):
        return 1 + int(rng.poisson(math.exp(log_mean)))
    # relative fluctuation sqrt((1-p)/mean) is below 3e-4 here
    relative_sd = math.exp(-0.5 * log_mean) * math.sqrt(max(-math.expm1(log_p), 0.0))
    log_z = log_mean + math.log1p(relative_sd * float(rng.standard_normal()))
    return 1 + _int_from_log(log_z)


class _StationaryDelay:
    """Inverse-CDF sampler of the stationary delay density P{|log W| > x}/mu"""

    GRID_POINTS = 4000

    def __init__(self, law: WLaw):
        upper = 1.0
        while float(law.survival(upper)) > 1e-16 and upper < 1e12:
            upper *= 2.0
        grid = np.concatenate([[0.0], np.geomspace(1e-8, upper, self.GRID_POINTS)])
        cumulative = integrate.cumulative_trapezoid(law.survival(grid), grid, initial=0.0)
        self.grid = grid
        self.cumulative = cumulative / cumulative[-1]

    def sample(self, rng: np.random.Generator) -> float:
        return float(np.interp(rng.random(), self.cumulative, self.grid))


@lru_cache(maxsize=64)
def _stationary_delay(law: WLaw) -> _StationaryDelay:
    return _StationaryDelay(law)


def simulate_limit_partition(law: WLaw, window_depth: float, rng: np.random.Generator
                             ) -> LimitPartitionSample:
    """
    Simulate the limit partition of the sieve.

    The stationary renewal process is started one mean increment left of
    -window_depth with a stationary delay, boxes are the gaps of exp(-P),
    balls are the atoms of a unit Poisson process on (0, exp(window_depth)).
    Boxes crossing the window edge are discarded and reported.

    Raises:
        CapabilityError: if mu is infinite (no stationary renewal process)
    """
    profile = moment_profile(law)
    if not profile.mu_finite:
        raise CapabilityError(f"the limit partition needs mu < infinity; {law} has mu = infinity")
    if window_depth <= 0:
        raise ValueError(f"window depth must be positive, got {window_depth}")

    window = math.exp(window_depth)
    atoms = np.empty(0)
    while atoms.size == 0:
        atoms = np.sort(rng.random(int(rng.poisson(window))) * window)
    y_leftmost = float(atoms[0])

    first = -window_depth - profile.mu + _stationary_delay(law).sample(rng)
    walk = _WalkStream(law, rng)
    walk.extend_until(-math.log(y_leftmost) - first)
    # box i is (points[i-1], points[i]) with the points ascending
    points = np.exp(-(first + walk.epochs))[::-1]

    boxes = np.searchsorted(points, atoms, side='right')
    counts = np.bincount(boxes, minlength=points.size + 1)
    first_box = int(np.searchsorted(points, y_leftmost, side='right'))
    last_box = int(np.searchsorted(points, window, side='right')) - 1
    kept = counts[first_box:last_box + 1] if last_box >= first_box else np.empty(0, dtype=int)
    tally = np.bincount(kept) if kept.size else np.empty(0, dtype=int)
    return LimitPartitionSample(
        khat={int(r): int(c) for r, c in enumerate(tally) if c > 0},
        y_leftmost=y_leftmost,
        window_depth=window_depth,
        boxes_counted=int(kept.size),
        atoms_discarded=int(atoms.size - kept.sum()),
    )


def renewal_function_estimate(law: WLaw, grid: Sequence[float], replicates: int, seed: int
                              ) -> Tuple[np.ndarray, np.ndarray]:
    """Monte Carlo estimate of U(x) = E N_x on a grid, with standard errors"""
    grid = np.asarray(grid, dtype=float)
    counts = np.empty((replicates, grid.size))
    for r in range(replicates):
        walk = _WalkStream(law, child_generator(seed, r))
        walk.extend_until(float(grid.max()))
        counts[r] = np.searchsorted(walk.epochs, grid, side='right')
    return counts.mean(axis=0), counts.std(axis=0, ddof=1) / math.sqrt(replicates)


class SimulationMode(Enum):
    """How each replicate of a batch is generated"""
    FIXED = "fixed"              # n balls
    POISSONISED = "poissonised"  # Poisson(t) balls
    SHORTCUT = "shortcut"        # M_n and Z_n from log n


@dataclass
class BatchResult:
    """
    Per-replicate statistics of a batch run.

    Attributes:
        law: law string
        mode: simulation mode
        size: n (fixed), t (poissonised) or log n (shortcut)
        replicates: number of replicates
        seed: master seed
        columns: statistic name -> per-replicate values (float64)
        spectrum: replicates x r_max array of K_1..K_rmax (fixed and poissonised modes)
    """
    law: str
    mode: SimulationMode
    size: float
    replicates: int
    seed: int
    columns: Dict[str, np.ndarray]
    spectrum: Optional[np.ndarray] = None

    def values(self, statistic: str) -> np.ndarray:
        if statistic not in self.columns:
            raise KeyError(f"statistic {statistic!r} not recorded; have {sorted(self.columns)}")
        return self.columns[statistic]

    def mean(self, statistic: str) -> float:
        return float(np.mean(self.values(statistic)))

    def standard_error(self, statistic: str) -> float:
        values = self.values(statistic)
        if values.size < 2:
            return math.nan
        return float(np.std(values, ddof=1) / math.sqrt(values.size))

    def tally(self, statistic: str) -> np.ndarray:
        """Counts of each integer value 0, 1, 2, ..."""
        return np.bincount(self.values(statistic).astype(np.int64))

    def empirical_pmf(self, statistic: str) -> np.ndarray:
        return self.tally(statistic) / self.replicates

    def summary(self) -> Dict[str, Dict[str, float]]:
        """Mean, standard error and variance per recorded statistic"""
        result = {}
        for name, values in self.columns.items():
            result[name] = {
                'mean': float(np.mean(values)),
                'se': self.standard_error(name),
                'variance': float(np.var(values, ddof=1)) if values.size > 1 else math.nan,
                'count': int(values.size),
            }
        return result


def _run_replicate(law: WLaw, mode: SimulationMode, size: float, seed: int, index: int,
                   r_max: int) -> Tuple[Dict[str, float], Optional[np.ndarray]]:
    rng = child_generator(seed, index)
    if mode is SimulationMode.SHORTCUT:
        m_value = shortcut_sample_M(law, size, rng)
        z_value = shortcut_sample_Z(law, size, rng)
        z_float = float(z_value) if z_value.bit_length() < 1024 else math.inf
        return {'M': float(m_value), 'Z': z_float, 'log_Z': math.log(z_value)}, None
    if mode is SimulationMode.POISSONISED:
        sample = simulate_poissonised(law, size, rng)
    else:
        sample = simulate_occupancy(law, int(size), rng)
    row = {'n': float(sample.n_balls), 'K': float(sample.K), 'M': float(sample.M),
           'L': float(sample.L), 'Z': float(sample.Z)}
    spectrum = np.array([sample.k_r(r) for r in range(1, r_max + 1)], dtype=float)
    return row, spectrum


def batch_estimate(law: WLaw, size: float, replicates: int, seed: int,
                   statistics: Sequence[str] = STATISTICS,
                   mode: SimulationMode = SimulationMode.FIXED,
                   r_max: int = 5, workers: int = 1) -> BatchResult:
    """
    Run `replicates` independent samples and collect the selected statistics.

    Replicate r draws from child_generator(seed, r), so the result is
    bit-identical for any number of workers.

    Args:
        law: W-law
        size: n for fixed mode, t for poissonised mode, log n for shortcut mode
        replicates: number of replicates (>= 1)
        seed: 64-bit master seed
        statistics: subset of K, M, L, Z (shortcut mode records M, Z and log_Z)
        mode: simulation mode
        r_max: number of spectrum columns K_1..K_rmax kept
        workers: thread count
    """
    if replicates < 1:
        raise ValueError(f"replicates must be positive, got {replicates}")
    seed = validate_seed(seed)
    unknown = set(statistics) - set(STATISTICS)
    if unknown:
        raise ValueError(f"unknown statistics {sorted(unknown)}; choose from {STATISTICS}")
    logger.info("batch: law=%s mode=%s size=%s replicates=%d seed=%d",
                law, mode.value, size, replicates, seed)

    run = lambda index: _run_replicate(law, mode, size, seed, index, r_max)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(replicates), chunksize=256))
    else:
        results = [run(index) for index in range(replicates)]

    if mode is SimulationMode.SHORTCUT:
        names = [s for s in ('M', 'Z') if s in statistics] + (['log_Z'] if 'Z' in statistics else [])
    else:
        names = ['n'] + [s for s in STATISTICS if s in statistics]
    columns = {name: np.array([row[name] for row, _ in results]) for name in names}
    spectrum = None
    if mode is not SimulationMode.SHORTCUT:
        spectrum = np.vstack([spec for _, spec in results])
    logger.info("batch finished: %s", {k: round(float(np.mean(v)), 6) for k, v in columns.items()})
    return BatchResult(law=law.law_string(), mode=mode, size=size, replicates=replicates,
                       seed=seed, columns=columns, spectrum=spectrum)

"""
Goodness-of-fit and oracle-equivalence checks.

This module turns simulated samples, exact tables and reference laws into
GofReport records:
- One- and two-sample Kolmogorov-Smirnov tests
- Chi-square goodness-of-fit and homogeneity tests with automatic pooling of sparse cells
- Total-variation distances, moment z-scores and stochastic dominance checks
"""

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from .errors import GofError
from .limit_laws import LimitLawHandle

logger = logging.getLogger(__name__)


class CheckKind(Enum):
    """Kinds of checks a report can come from"""
    KS1 = "KS1"
    KS2 = "KS2"
    CHI_SQUARE = "ChiSquare"
    MOMENT_Z = "MomentZ"
    TV_DISTANCE = "TVDistance"
    DOMINANCE = "DominanceCheck"


@dataclass
class HarnessConfig:
    """Thresholds shared by the checks"""
    significance: float = 1e-3
    min_expected: float = 5.0
    bonferroni_threshold: int = 10
    min_ks_samples: int = 100
    min_chi_square_total: int = 1000
    z_limit: float = 4.0
    dominance_bands: float = 3.0


DEFAULT_HARNESS = HarnessConfig()


@dataclass
class GofReport:
    """
    Outcome of one check.

    Attributes:
        kind: which test produced the report
        statistic: test statistic (KS distance, chi-square, z-score, TV distance, worst CDF gap)
        p_value: p-value where the test has one
        distance: distance measure compared against the threshold, if any
        threshold: significance level or distance bound
        passed: outcome of the threshold comparison
        sample_sizes: sizes of the samples involved
        name: label used in summaries
        metadata: law, n, seed and other context
        warnings: misuse warnings (ties in KS data, replaced tests)
    """
    kind: CheckKind
    statistic: float
    threshold: float
    passed: bool
    p_value: Optional[float] = None
    distance: Optional[float] = None
    sample_sizes: Tuple[int, ...] = ()
    name: str = ""
    metadata: Dict[str, Any] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)

    def __post_init__(self):
        if self.p_value is not None:
            if math.isnan(self.p_value) or not 0.0 <= self.p_value <= 1.0:
                raise ValueError(f"p-value must lie in [0, 1], got {self.p_value}")

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['kind'] = self.kind.value
        data['sample_sizes'] = list(self.sample_sizes)
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), default=_json_default, sort_keys=True)

    def __str__(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        value = f"p={self.p_value:.3g}" if self.p_value is not None else f"d={self.distance:.3g}"
        return f"[{verdict}] {self.name or self.kind.value}: stat={self.statistic:.4g} {value}"


def _json_default(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    return str(value)


def ks_one_sample(samples: Sequence[float], handle: LimitLawHandle,
                  config: HarnessConfig = DEFAULT_HARNESS, max_distance: Optional[float] = None,
                  name: str = "", metadata: Optional[Dict[str, Any]] = None) -> GofReport:
    """
    Kolmogorov-Smirnov distance of the samples to a reference CDF with the
    asymptotic Kolmogorov p-value.

    Discrete reference laws are tested with chi_square_gof instead, and the
    report carries a warning saying so.

    Raises:
        GofError: for fewer than config.min_ks_samples samples
    """
    data = np.asarray(samples, dtype=float)
    if data.size < config.min_ks_samples:
        raise GofError(f"KS test needs at least {config.min_ks_samples} samples, got {data.size}")
    if handle.is_discrete:
        counts = np.bincount(np.round(data).astype(np.int64).clip(min=0))
        report = chi_square_gof(counts, handle.pmf_vector(counts.size - 1), config,
                                name=name, metadata=metadata)
        report.warnings.append(f"KS against discrete law {handle.label()} replaced by chi-square")
        return report

    warnings = []
    if np.unique(data).size < data.size:
        warnings.append("ties in sample: KS p-value assumes continuous data")
    result = stats.kstest(data, handle.cdf, method='asymp')
    p_value = float(min(max(result.pvalue, 0.0), 1.0))
    passed = p_value > config.significance
    if max_distance is not None:
        passed = passed and result.statistic < max_distance
    return GofReport(kind=CheckKind.KS1, statistic=float(result.statistic), p_value=p_value,
                     distance=float(result.statistic), threshold=config.significance, passed=passed,
                     sample_sizes=(int(data.size),), name=name,
                     metadata={'reference': handle.label(), **(metadata or {})}, warnings=warnings)


def ks_two_sample(samples_a: Sequence[float], samples_b: Sequence[float],
                  config: HarnessConfig = DEFAULT_HARNESS, name: str = "",
                  metadata: Optional[Dict[str, Any]] = None) -> GofReport:
    """Two-sample Kolmogorov-Smirnov test"""
    a, b = np.asarray(samples_a, dtype=float), np.asarray(samples_b, dtype=float)
    if min(a.size, b.size) < config.min_ks_samples:
        raise GofError(f"KS test needs at least {config.min_ks_samples} samples per group")
    result = stats.ks_2samp(a, b)
    p_value = float(result.pvalue)
    return GofReport(kind=CheckKind.KS2, statistic=float(result.statistic), p_value=p_value,
                     distance=float(result.statistic), threshold=config.significance,
                     passed=p_value > config.significance, sample_sizes=(int(a.size), int(b.size)),
                     name=name, metadata=dict(metadata or {}))


def pool_cells(observed: np.ndarray, expected: np.ndarray,
               min_expected: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Merge neighbouring categories from the left until each pooled cell has
    expected count >= min_expected; an underfilled tail joins the last cell.
    """
    pooled_obs, pooled_exp = [], []
    acc_obs, acc_exp = 0.0, 0.0
    for obs, exp in zip(observed, expected):
        acc_obs += obs
        acc_exp += exp
        if acc_exp >= min_expected:
            pooled_obs.append(acc_obs)
            pooled_exp.append(acc_exp)
            acc_obs, acc_exp = 0.0, 0.0
    if acc_exp > 0 or acc_obs > 0:
        if pooled_exp:
            pooled_obs[-1] += acc_obs
            pooled_exp[-1] += acc_exp
        else:
            pooled_obs.append(acc_obs)
            pooled_exp.append(acc_exp)
    return np.array(pooled_obs), np.array(pooled_exp)


def chi_square_gof(counts: Sequence[int], expected_pmf: Sequence[float],
                   config: HarnessConfig = DEFAULT_HARNESS, ddof: int = 0, name: str = "",
                   metadata: Optional[Dict[str, Any]] = None) -> GofReport:
    """
    Pearson chi-square test of category counts against a pmf.

    counts[k] and expected_pmf[k] refer to category k; mass of the pmf not
    covered by its entries forms a final "rest" category together with the
    counts beyond the pmf's length.

    Raises:
        GofError: if fewer than config.min_chi_square_total observations are
            given or pooling leaves fewer than two cells
    """
    observed = np.asarray(counts, dtype=float)
    pmf = np.clip(np.asarray(expected_pmf, dtype=float), 0.0, None)
    total = observed.sum()
    if total < config.min_chi_square_total:
        raise GofError(f"chi-square test needs at least {config.min_chi_square_total} observations, got {int(total)}")

    size = pmf.size
    head = np.zeros(size)
    head[:min(size, observed.size)] = observed[:size]
    rest_observed = observed[size:].sum()
    rest_mass = max(1.0 - pmf.sum(), 0.0)
    observed_cells = np.append(head, rest_observed)
    expected_cells = np.append(pmf, rest_mass) * total

    pooled_obs, pooled_exp = pool_cells(observed_cells, expected_cells, config.min_expected)
    dof = pooled_obs.size - 1 - ddof
    if dof < 1:
        raise GofError(f"chi-square test has {dof} degrees of freedom after pooling into {pooled_obs.size} cell(s)")
    if np.any(pooled_exp <= 0):
        return GofReport(kind=CheckKind.CHI_SQUARE, statistic=math.inf, p_value=0.0, threshold=config.significance,
                         passed=False, sample_sizes=(int(total),), name=name, metadata=dict(metadata or {}),
                         warnings=["observations in a category of zero expected mass"])
    statistic = float(np.sum((pooled_obs - pooled_exp) ** 2 / pooled_exp))
    p_value = float(stats.chi2.sf(statistic, dof))
    return GofReport(kind=CheckKind.CHI_SQUARE, statistic=statistic, p_value=p_value,
                     threshold=config.significance, passed=p_value > config.significance,
                     sample_sizes=(int(total),), name=name,
                     metadata={'cells': int(pooled_obs.size), 'dof': dof, **(metadata or {})})


def chi_square_two_sample(counts_a: Sequence[int], counts_b: Sequence[int],
                          config: HarnessConfig = DEFAULT_HARNESS, name: str = "",
                          metadata: Optional[Dict[str, Any]] = None) -> GofReport:
    """
    Chi-square homogeneity test of two tallies over the same categories.

    Categories are visited in decreasing order of their combined count and
    pooled until every cell of the 2 x C table has expected count at least
    config.min_expected.
    """
    a, b = np.asarray(counts_a, dtype=float), np.asarray(counts_b, dtype=float)
    size = max(a.size, b.size)
    a, b = np.pad(a, (0, size - a.size)), np.pad(b, (0, size - b.size))
    total_a, total_b = a.sum(), b.sum()
    if min(total_a, total_b) < config.min_chi_square_total:
        raise GofError(f"chi-square test needs at least {config.min_chi_square_total} observations per group")

    order = np.argsort(-(a + b), kind='stable')
    order = order[(a + b)[order] > 0]
    # a column is large enough when the smaller row gets min_expected in it
    needed = config.min_expected * (total_a + total_b) / min(total_a, total_b)
    cells_a, cells_b, acc_a, acc_b = [], [], 0.0, 0.0
    for index in order:
        acc_a += a[index]
        acc_b += b[index]
        if acc_a + acc_b >= needed:
            cells_a.append(acc_a)
            cells_b.append(acc_b)
            acc_a, acc_b = 0.0, 0.0
    if acc_a + acc_b > 0 and cells_a:
        cells_a[-1] += acc_a
        cells_b[-1] += acc_b
    if len(cells_a) < 2:
        raise GofError(f"chi-square test has {len(cells_a) - 1} degrees of freedom after pooling")

    statistic, p_value, dof, _ = stats.chi2_contingency(np.array([cells_a, cells_b]), correction=False)
    return GofReport(kind=CheckKind.CHI_SQUARE, statistic=float(statistic), p_value=float(p_value),
                     threshold=config.significance, passed=float(p_value) > config.significance,
                     sample_sizes=(int(total_a), int(total_b)), name=name,
                     metadata={'cells': len(cells_a), 'dof': int(dof), **(metadata or {})})


def tv_distance(pmf_a: Sequence[float], pmf_b: Sequence[float], threshold: Optional[float] = None,
                name: str = "", metadata: Optional[Dict[str, Any]] = None) -> GofReport:
    """Total-variation distance (1/2) sum |a_k - b_k| of two pmfs on 0, 1, 2, ..."""
    a, b = np.asarray(pmf_a, dtype=float), np.asarray(pmf_b, dtype=float)
    size = max(a.size, b.size)
    a = np.pad(a, (0, size - a.size))
    b = np.pad(b, (0, size - b.size))
    distance = 0.5 * float(np.abs(a - b).sum())
    bound = math.inf if threshold is None else threshold
    return GofReport(kind=CheckKind.TV_DISTANCE, statistic=distance, distance=distance,
                     threshold=bound, passed=distance < bound, name=name, metadata=dict(metadata or {}))


def moment_z(samples: Sequence[float], target_mean: float, target_variance: Optional[float] = None,
             config: HarnessConfig = DEFAULT_HARNESS, name: str = "",
             metadata: Optional[Dict[str, Any]] = None) -> GofReport:
    """
    z-score of the sample mean against a target; the standard error uses the
    target variance when given, the sample variance otherwise.
    """
    data = np.asarray(samples, dtype=float)
    if data.size < 2:
        raise GofError("moment check needs at least two samples")
    variance = target_variance if target_variance is not None else float(np.var(data, ddof=1))
    standard_error = math.sqrt(variance / data.size)
    difference = float(data.mean()) - target_mean
    if standard_error == 0:
        z = 0.0 if difference == 0 else math.copysign(math.inf, difference)
    else:
        z = difference / standard_error
    p_value = float(2.0 * stats.norm.sf(abs(z)))
    return GofReport(kind=CheckKind.MOMENT_Z, statistic=z, p_value=p_value, threshold=config.z_limit,
                     passed=abs(z) <= config.z_limit, sample_sizes=(int(data.size),), name=name,
                     metadata={'mean': float(data.mean()), 'target': target_mean,
                               'standard_error': standard_error, **(metadata or {})})


def dominance_check(samples_x: Sequence[float], samples_y: Sequence[float],
                    config: HarnessConfig = DEFAULT_HARNESS, name: str = "",
                    metadata: Optional[Dict[str, Any]] = None) -> GofReport:
    """
    Check that X is stochastically smaller than Y: F_X(z) >= F_Y(z) - eps at
    every z, eps = bands * sqrt((1/|X| + 1/|Y|)/2).
    """
    x, y = np.sort(np.asarray(samples_x, dtype=float)), np.sort(np.asarray(samples_y, dtype=float))
    if x.size == 0 or y.size == 0:
        raise GofError("dominance check needs nonempty samples")
    points = np.union1d(x, y)
    cdf_x = np.searchsorted(x, points, side='right') / x.size
    cdf_y = np.searchsorted(y, points, side='right') / y.size
    worst = float(np.max(cdf_y - cdf_x))
    band = config.dominance_bands * math.sqrt((1.0 / x.size + 1.0 / y.size) / 2.0)
    return GofReport(kind=CheckKind.DOMINANCE, statistic=worst, distance=worst, threshold=band,
                     passed=worst <= band, sample_sizes=(int(x.size), int(y.size)), name=name,
                     metadata=dict(metadata or {}))


def bonferroni_note(n_tests: int, config: HarnessConfig = DEFAULT_HARNESS) -> Optional[str]:
    """Note on the family-wise error rate when many tests run at once"""
    if n_tests <= config.bonferroni_threshold:
        return None
    note = (f"{n_tests} tests at significance {config.significance:g}: expected false failures "
            f"{n_tests * config.significance:.3g}; Bonferroni level would be {config.significance / n_tests:.3g}")
    logger.warning(note)
    return note


def reports_to_jsonl(reports: Iterable[GofReport]) -> str:
    """One JSON object per line"""
    return "".join(report.to_json() + "\n" for report in reports)


def summary_table(reports: Sequence[GofReport]) -> str:
    """Human-readable table of reports"""
    header = f"{'test':<40} {'kind':<15} {'statistic':>12} {'p/dist':>12} {'threshold':>10}  result"
    lines = [header, "-" * len(header)]
    for report in reports:
        measure = report.p_value if report.p_value is not None else report.distance
        measure_text = f"{measure:>12.4g}" if measure is not None else f"{'-':>12}"
        lines.append(f"{(report.name or '-')[:40]:<40} {report.kind.value:<15} {report.statistic:>12.4g} "
                     f"{measure_text} {report.threshold:>10.3g}  {'PASS' if report.passed else 'FAIL'}")
    passed = sum(1 for report in reports if report.passed)
    lines.append(f"{passed}/{len(reports)} passed")
    return "\n".join(lines)

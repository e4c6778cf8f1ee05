"""
Scenario files for `verify --scenario`.

A scenario is a flat JSON object naming a law, the statistics to record, the
sizes to simulate at, a replicate count and a seed, plus a list of checks
comparing the simulated statistic with a reference law or the exact table.

Example:
    {
      "name": "uniform L_n",
      "law": "beta(1,1)",
      "statistics": ["L"],
      "n": [1000],
      "replicates": 10000,
      "seed": 42,
      "tests": [{"statistic": "L", "kind": "ChiSquare", "target": "geometric:0.5"}]
    }
"""

import json
import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from .errors import LawParseError, ScenarioError
from .exact_engine import Statistic, exact_table, pmf_Z
from .law_library import WLaw
from .law_parser import parse_law
from .limit_laws import LimitLawHandle, limit_handle, normalization
from .sieve_sim import STATISTICS, BatchResult, SimulationMode, batch_estimate
from .stats_harness import (DEFAULT_HARNESS, CheckKind, GofReport, HarnessConfig, bonferroni_note,
                            chi_square_gof, ks_one_sample, moment_z, tv_distance)

logger = logging.getLogger(__name__)

EXACT_TARGET = "exact"


class Transform(Enum):
    """What is done to the simulated values before a check"""
    NONE = "none"
    STANDARDIZE = "standardize"  # (X - b_n)/a_n with the regime's norming constants
    SCALE = "scale"              # X/a_n
    LOG_RATIO = "log_ratio"      # log X / log n


_SCENARIO_KEYS = {'name', 'law', 'statistics', 'n', 'log_n', 'mode', 'replicates', 'seed',
                  'workers', 'tests', 'data_out', 'report_out'}
_TEST_KEYS = {'statistic', 'kind', 'target', 'threshold', 'max_distance', 'transform', 'target_mean'}
_SUPPORTED_KINDS = {CheckKind.KS1, CheckKind.CHI_SQUARE, CheckKind.MOMENT_Z, CheckKind.TV_DISTANCE}


@dataclass(frozen=True)
class TestSpec:
    """
    One check of a scenario.

    Attributes:
        statistic: K, M, L or Z
        kind: KS1, ChiSquare, MomentZ or TVDistance
        target: reference-law string (see limit_handle) or "exact" for the exact table at n
        threshold: significance (KS1, ChiSquare), z bound (MomentZ) or distance bound (TVDistance)
        max_distance: additional bound on the KS distance
        transform: applied to the values first
        target_mean: explicit mean for MomentZ instead of the target's mean
    """
    __test__ = False

    statistic: str
    kind: CheckKind
    target: str
    threshold: Optional[float] = None
    max_distance: Optional[float] = None
    transform: Transform = Transform.NONE
    target_mean: Optional[float] = None

    def __post_init__(self):
        if self.statistic not in STATISTICS:
            raise ScenarioError(f"test statistic must be one of {STATISTICS}, got {self.statistic!r}")
        if self.kind not in _SUPPORTED_KINDS:
            raise ScenarioError(f"scenario tests support {sorted(k.value for k in _SUPPORTED_KINDS)}, "
                                f"got {self.kind.value}")
        if self.target == EXACT_TARGET and self.kind in (CheckKind.KS1, CheckKind.MOMENT_Z):
            raise ScenarioError(f"target 'exact' works with ChiSquare and TVDistance, not {self.kind.value}")
        if self.kind is CheckKind.MOMENT_Z and self.target == "" and self.target_mean is None:
            raise ScenarioError("MomentZ needs a target law or target_mean")

    def to_dict(self) -> Dict[str, Any]:
        return {
            'statistic': self.statistic,
            'kind': self.kind.value,
            'target': self.target,
            'threshold': self.threshold,
            'max_distance': self.max_distance,
            'transform': self.transform.value,
            'target_mean': self.target_mean,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'TestSpec':
        if not isinstance(data, dict):
            raise ScenarioError(f"each test must be an object, got {type(data).__name__}")
        unknown = set(data) - _TEST_KEYS
        if unknown:
            raise ScenarioError(f"unknown test keys {sorted(unknown)}; allowed: {sorted(_TEST_KEYS)}")
        for key in ('statistic', 'kind'):
            if key not in data:
                raise ScenarioError(f"test is missing {key!r}")
        try:
            kind = CheckKind(data['kind'])
            transform = Transform(data.get('transform', Transform.NONE.value))
        except ValueError as e:
            raise ScenarioError(str(e))
        return cls(statistic=str(data['statistic']).upper(), kind=kind,
                   target=str(data.get('target', "")),
                   threshold=_optional_float(data, 'threshold'),
                   max_distance=_optional_float(data, 'max_distance'),
                   transform=transform,
                   target_mean=_optional_float(data, 'target_mean'))


@dataclass(frozen=True)
class Scenario:
    """
    A verification run.

    Exactly one of `n` (fixed or poissonised sizes) and `log_n` (shortcut
    sizes) is given. Each size is simulated with the same seed.
    """
    name: str
    law: str
    statistics: Tuple[str, ...]
    replicates: int
    seed: int
    n: Optional[Tuple[float, ...]] = None
    log_n: Optional[Tuple[float, ...]] = None
    mode: SimulationMode = SimulationMode.FIXED
    workers: int = 1
    tests: Tuple[TestSpec, ...] = ()
    data_out: Optional[str] = None
    report_out: Optional[str] = None

    def __post_init__(self):
        if (self.n is None) == (self.log_n is None):
            raise ScenarioError("a scenario gives exactly one of 'n' and 'log_n'")
        if self.log_n is not None and self.mode is not SimulationMode.SHORTCUT:
            raise ScenarioError("'log_n' sizes need mode 'shortcut'")
        if self.n is not None and self.mode is SimulationMode.SHORTCUT:
            raise ScenarioError("mode 'shortcut' takes 'log_n' sizes")
        if self.mode is SimulationMode.SHORTCUT and set(self.statistics) - {"M", "Z"}:
            raise ScenarioError("shortcut scenarios record only M and Z")
        if self.replicates < 1:
            raise ScenarioError(f"replicates must be positive, got {self.replicates}")
        unknown = set(self.statistics) - set(STATISTICS)
        if unknown:
            raise ScenarioError(f"unknown statistics {sorted(unknown)}; choose from {STATISTICS}")
        for test in self.tests:
            if test.statistic not in self.statistics:
                raise ScenarioError(f"test on {test.statistic} but only {list(self.statistics)} are recorded")

    @property
    def sizes(self) -> Tuple[float, ...]:
        return self.log_n if self.log_n is not None else self.n

    def parsed_law(self) -> WLaw:
        return parse_law(self.law)

    def to_dict(self) -> Dict[str, Any]:
        data = {
            'name': self.name,
            'law': self.law,
            'statistics': list(self.statistics),
            'replicates': self.replicates,
            'seed': self.seed,
            'mode': self.mode.value,
            'workers': self.workers,
            'tests': [test.to_dict() for test in self.tests],
            'data_out': self.data_out,
            'report_out': self.report_out,
        }
        if self.n is not None:
            data['n'] = list(self.n)
        else:
            data['log_n'] = list(self.log_n)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Scenario':
        if not isinstance(data, dict):
            raise ScenarioError("a scenario must be a JSON object")
        unknown = set(data) - _SCENARIO_KEYS
        if unknown:
            raise ScenarioError(f"unknown scenario keys {sorted(unknown)}; allowed: {sorted(_SCENARIO_KEYS)}")
        for key in ('law', 'replicates', 'seed'):
            if key not in data:
                raise ScenarioError(f"scenario is missing {key!r}")
        try:
            parse_law(data['law'])
        except LawParseError as e:
            raise ScenarioError(f"scenario law: {e}")

        log_sizes = _optional_sizes(data, 'log_n')
        default_mode = SimulationMode.SHORTCUT if log_sizes is not None else SimulationMode.FIXED
        try:
            mode = SimulationMode(data['mode']) if 'mode' in data else default_mode
        except ValueError as e:
            raise ScenarioError(str(e))
        tests = data.get('tests', [])
        if not isinstance(tests, list):
            raise ScenarioError("'tests' must be a list")
        default_statistics = ['M', 'Z'] if mode is SimulationMode.SHORTCUT else list(STATISTICS)
        statistics = data.get('statistics', default_statistics)
        if isinstance(statistics, str):
            statistics = [statistics]
        return cls(name=str(data.get('name', data['law'])), law=str(data['law']),
                   statistics=tuple(str(s).upper() for s in statistics),
                   replicates=_integer(data, 'replicates'), seed=_integer(data, 'seed'),
                   n=_optional_sizes(data, 'n'), log_n=log_sizes, mode=mode,
                   workers=_integer(data, 'workers', 1),
                   tests=tuple(TestSpec.from_dict(t) for t in tests),
                   data_out=data.get('data_out'), report_out=data.get('report_out'))


def _optional_float(data: Dict[str, Any], key: str) -> Optional[float]:
    value = data.get(key)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{key!r} must be a number, got {value!r}")
    return float(value)


def _integer(data: Dict[str, Any], key: str, default: Optional[int] = None) -> int:
    value = data.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"{key!r} must be an integer, got {value!r}")
    return value


def _optional_sizes(data: Dict[str, Any], key: str) -> Optional[Tuple[float, ...]]:
    if key not in data:
        return None
    value = data[key]
    values = value if isinstance(value, list) else [value]
    if not values:
        raise ScenarioError(f"{key!r} must list at least one size")
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or v < 0:
            raise ScenarioError(f"{key!r} entries must be nonnegative numbers, got {v!r}")
    return tuple(values)


def parse_scenario(text: str) -> Scenario:
    """
    Parse a scenario from JSON text.

    Raises:
        ScenarioError: on invalid JSON, unknown keys or bad values
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"scenario is not valid JSON: {e}")
    return Scenario.from_dict(data)


def render_scenario(scenario: Scenario) -> str:
    """JSON text that parse_scenario maps back to the same Scenario"""
    return json.dumps(scenario.to_dict(), indent=2) + "\n"


def load_scenario(path: Union[str, Path]) -> Scenario:
    try:
        text = Path(path).read_text(encoding='utf-8')
    except OSError as e:
        raise ScenarioError(f"cannot read scenario {path}: {e}")
    return parse_scenario(text)


# ---------------------------------------------------------------------------
# Runner
# ---------------------------------------------------------------------------

def _transformed(batch: BatchResult, test: TestSpec, law: WLaw) -> np.ndarray:
    values = batch.values(test.statistic)
    if test.transform is Transform.NONE:
        return values
    log_n = batch.size if batch.mode is SimulationMode.SHORTCUT else math.log(batch.size)
    if test.transform is Transform.LOG_RATIO:
        if f"log_{test.statistic}" in batch.columns:
            return batch.values(f"log_{test.statistic}") / log_n
        return np.log(np.maximum(values, 1.0)) / log_n
    norming = normalization(law, log_n, 'K' if test.statistic == 'K' else 'M')
    if test.transform is Transform.SCALE:
        return values / norming.a
    return norming.standardize(values)


def _target_pmf(test: TestSpec, law: WLaw, n: int, support: int,
                handle: Optional[LimitLawHandle]) -> np.ndarray:
    if handle is not None:
        return handle.pmf_vector(support)
    if test.statistic == 'Z':
        return pmf_Z(law, n) if n >= 1 else np.array([1.0])
    return exact_table(law, Statistic(test.statistic), n).pmf(n)


def run_test(test: TestSpec, batch: BatchResult, law: WLaw,
             config: HarnessConfig = DEFAULT_HARNESS) -> GofReport:
    """Apply one check to the values of a batch"""
    values = _transformed(batch, test, law)
    handle = None if test.target in ("", EXACT_TARGET) else limit_handle(test.target)
    name = f"{test.kind.value} {test.statistic} vs {test.target or test.target_mean} @ {batch.size:g}"
    metadata = {'law': batch.law, 'size': batch.size, 'seed': batch.seed, 'mode': batch.mode.value}
    if test.kind in (CheckKind.KS1, CheckKind.CHI_SQUARE) and test.threshold is not None:
        config = replace(config, significance=test.threshold)

    if test.kind is CheckKind.KS1:
        return ks_one_sample(values, handle, config, max_distance=test.max_distance,
                             name=name, metadata=metadata)
    if test.kind is CheckKind.MOMENT_Z:
        if test.threshold is not None:
            config = replace(config, z_limit=test.threshold)
        target = test.target_mean if test.target_mean is not None else handle.mean()
        return moment_z(values, target, config=config, name=name, metadata=metadata)

    if batch.mode is not SimulationMode.FIXED and handle is None:
        raise ScenarioError(f"exact tables describe a fixed n; {batch.mode.value} scenarios compare with a reference law")
    counts = np.bincount(np.round(values).astype(np.int64).clip(min=0))
    n = int(batch.size)
    target = _target_pmf(test, law, n, counts.size - 1, handle)
    if test.kind is CheckKind.CHI_SQUARE:
        return chi_square_gof(counts, target, config, name=name, metadata=metadata)
    threshold = test.threshold if test.threshold is not None else 0.01
    return tv_distance(counts / counts.sum(), target, threshold, name=name, metadata=metadata)


@dataclass
class ScenarioOutcome:
    """Reports and batches of a scenario run"""
    scenario: Scenario
    reports: List[GofReport] = field(default_factory=list)
    batches: List[BatchResult] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(report.passed for report in self.reports)


def run_scenario(scenario: Scenario, config: HarnessConfig = DEFAULT_HARNESS) -> ScenarioOutcome:
    """
    Simulate the scenario at each size and run every test on every batch.

    Raises:
        ScenarioError: if a test cannot be applied to the batch
    """
    law = scenario.parsed_law()
    outcome = ScenarioOutcome(scenario=scenario)
    for size in scenario.sizes:
        logger.info("scenario %r: %s at size %g", scenario.name, scenario.law, size)
        batch = batch_estimate(law, size, scenario.replicates, scenario.seed,
                               statistics=scenario.statistics, mode=scenario.mode,
                               workers=scenario.workers)
        outcome.batches.append(batch)
        for test in scenario.tests:
            outcome.reports.append(run_test(test, batch, law, config))
    note = bonferroni_note(len(outcome.reports), config)
    if note:
        outcome.notes.append(note)
    return outcome

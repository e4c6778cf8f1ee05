"""
CSV and JSON emission for batch results, exact tables, limit-law
tabulations and verification reports.

CSV files carry a header row and RFC-4180 quoting; JSON documents carry the
schema field "sievelab/1".
"""

import csv
import json
import logging
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, TextIO, Tuple, Union

import numpy as np

from .exact_engine import PmfTable
from .sieve_sim import BatchResult
from .stats_harness import GofReport, reports_to_jsonl

logger = logging.getLogger(__name__)

SCHEMA = "sievelab/1"

PathLike = Union[str, Path]


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, float) and not np.isfinite(value):
        return None if np.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, Enum):
        return value.value
    return value


def dump_json(document: Dict[str, Any], stream: TextIO) -> None:
    """Write a JSON document with the schema field first"""
    json.dump({'schema': SCHEMA, **_jsonable(document)}, stream, indent=2)
    stream.write("\n")


def write_csv(header: Sequence[str], rows: Iterable[Sequence[Any]], stream: TextIO) -> int:
    """Header plus rows; returns the number of data rows"""
    writer = csv.writer(stream, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
    writer.writerow(header)
    count = 0
    for row in rows:
        writer.writerow([_csv_cell(value) for value in row])
        count += 1
    return count


def _csv_cell(value: Any) -> Any:
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return int(value) if value.is_integer() and abs(value) < 2 ** 53 else repr(value)
    return value


def batch_rows(result: BatchResult) -> Tuple[List[str], List[List[Any]]]:
    """One row per replicate: the recorded statistics then K_1..K_rmax"""
    names = list(result.columns)
    header = list(names)
    spectrum = result.spectrum
    if spectrum is not None:
        header += [f"K_{r}" for r in range(1, spectrum.shape[1] + 1)]
    rows = []
    for i in range(result.replicates):
        row = [result.columns[name][i] for name in names]
        if spectrum is not None:
            row += list(spectrum[i])
        rows.append(row)
    return header, rows


def batch_summary(result: BatchResult) -> Dict[str, Any]:
    return {
        'kind': 'batch',
        'law': result.law,
        'mode': result.mode.value,
        'size': result.size,
        'replicates': result.replicates,
        'seed': result.seed,
        'statistics': result.summary(),
    }


def write_batch(result: BatchResult, stream: TextIO, fmt: str = 'csv') -> None:
    if fmt == 'json':
        dump_json(batch_summary(result), stream)
    else:
        header, rows = batch_rows(result)
        write_csv(header, rows, stream)


def write_table(table: PmfTable, stream: TextIO, fmt: str = 'csv') -> None:
    """PmfTable as (n, k, probability) rows or as a JSON document with metadata"""
    if fmt == 'json':
        dump_json({'kind': 'pmf_table', **table.to_dict()}, stream)
    else:
        write_csv(['n', 'k', 'probability'], table.to_rows(), stream)


def write_tabulation(label: str, rows: Sequence[Tuple[float, float, float]], discrete: bool,
                     stream: TextIO, fmt: str = 'csv') -> None:
    """Limit-law tabulation: (x or k, value, tolerance)"""
    columns = ['k', 'pmf', 'tolerance'] if discrete else ['x', 'cdf', 'tolerance']
    if fmt == 'json':
        dump_json({'kind': 'tabulation', 'law': label,
                   'rows': [dict(zip(columns, row)) for row in rows]}, stream)
    else:
        write_csv(columns, rows, stream)


def write_reports(reports: Sequence[GofReport], stream: TextIO, fmt: str = 'jsonl') -> None:
    """JSON lines by default, or a single JSON document"""
    if fmt == 'json':
        dump_json({'kind': 'reports', 'passed': all(r.passed for r in reports),
                   'reports': [r.to_dict() for r in reports]}, stream)
    else:
        stream.write(reports_to_jsonl(reports))


def open_output(path: PathLike) -> TextIO:
    """A file opened for writing with csv-safe newlines; parent directories are created"""
    target = Path(path)
    if target.parent and not target.parent.exists():
        target.parent.mkdir(parents=True, exist_ok=True)
    logger.info("writing %s", target)
    return open(target, 'w', newline='', encoding='utf-8')

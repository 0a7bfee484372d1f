"""Result-row schema and lossless persistence.

Rows are written twice: a delimited CSV table (vectors as
semicolon-joined reals within a cell) and a JSONL record stream. Reals
are rendered with Python's shortest-round-trip ``repr``, so re-reading a
file reproduces the rows bit for bit. Metrics of invalid rows may be
None (empty CSV cell / JSON null).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, fields as dataclass_fields
from pathlib import Path

import numpy as np

from .bundle import TASKS, valid_scores
from .errors import BundleValidationError

SPANS = ("Entire", "Complement", "MSV")
PERMUTATIONS = ("Temporal", "Spatio")
SEEDS = tuple(range(42, 52))
BUDGETS = tuple(range(50, 1001, 50))
FAILURES = ("degenerate_node", "markov_fail", "ci_fail",
            "iit4_init_fail", "too_few_samples")

__all__ = ["ResultRow", "write_result_rows", "read_result_rows",
           "SPANS", "PERMUTATIONS", "SEEDS", "BUDGETS", "FAILURES"]


@dataclass(frozen=True)
class ResultRow:
    linguistic_span: str
    model_name: str
    transformer_layer: str  # "0".."11" or "2/3"
    task: str
    sheet: str
    stimulus_id: str
    score: int
    limited_tokens: int
    actual_tokens: int | None
    permutation_control: str
    seed: int
    phi_max_3: float | None
    phi_4: float | None
    ci_3: tuple[float, ...] | None
    phi_structure_4: tuple[float, ...] | None
    span_rep: tuple[float, ...] | None
    markov_p: float | None
    ci_distance_d: float | None
    valid: bool
    failure: str | None = None  # one of FAILURES when valid is False

    def __post_init__(self):
        if self.linguistic_span not in SPANS:
            raise BundleValidationError(f"bad span {self.linguistic_span!r}")
        if self.task not in TASKS:
            raise BundleValidationError(f"bad task {self.task!r}")
        if self.permutation_control not in PERMUTATIONS:
            raise BundleValidationError(
                f"bad permutation {self.permutation_control!r}")
        if self.seed not in SEEDS:
            raise BundleValidationError(f"seed {self.seed} outside [42, 51]")
        if self.limited_tokens not in BUDGETS:
            raise BundleValidationError(
                f"limited_tokens {self.limited_tokens} not in 50..1000 step 50")
        if self.score not in valid_scores(self.task):
            raise BundleValidationError(
                f"score {self.score} invalid for task {self.task}")
        for name in ("ci_3", "phi_structure_4", "span_rep"):
            v = getattr(self, name)
            if v is not None and len(v) != 16:
                raise BundleValidationError(
                    f"{name} must have exactly 16 components, got {len(v)}")
        if self.failure is not None and self.failure not in FAILURES:
            raise BundleValidationError(f"unknown failure {self.failure!r}")


_FIELDS = [f.name for f in dataclass_fields(ResultRow)]
_VECTORS = ("ci_3", "phi_structure_4", "span_rep")
_REALS = ("phi_max_3", "phi_4", "markov_p", "ci_distance_d")
_INTS = ("score", "limited_tokens", "seed")


def _real(x) -> str:
    return "" if x is None else repr(float(x))


def _vec(v) -> str:
    return "" if v is None else ";".join(repr(float(x)) for x in v)


def _row_to_record(row: ResultRow) -> dict:
    rec = {}
    for name in _FIELDS:
        v = getattr(row, name)
        if isinstance(v, np.floating):
            v = float(v)
        if name in _VECTORS and v is not None:
            v = [float(x) for x in v]
        rec[name] = v
    return rec


def _record_to_row(rec: dict) -> ResultRow:
    kw = dict(rec)
    for name in _VECTORS:
        if kw.get(name) is not None:
            kw[name] = tuple(float(x) for x in kw[name])
    return ResultRow(**kw)


def write_result_rows(rows: list[ResultRow], path: str | Path) -> None:
    """Write `<path>.csv` and `<path>.jsonl` (path given without suffix)."""
    if not rows:
        raise ValueError("rows must be non-empty")
    base = Path(path)
    base.parent.mkdir(parents=True, exist_ok=True)
    with open(base.with_suffix(".csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(_FIELDS)
        for row in rows:
            out = []
            for name in _FIELDS:
                v = getattr(row, name)
                if name in _VECTORS:
                    out.append(_vec(v))
                elif name in _REALS:
                    out.append(_real(v))
                elif name == "valid":
                    out.append("true" if v else "false")
                elif v is None:
                    out.append("")
                else:
                    out.append(str(v))
            w.writerow(out)
    with open(base.with_suffix(".jsonl"), "w") as fh:
        for row in rows:
            fh.write(json.dumps(_row_to_record(row)) + "\n")


def read_result_rows(path: str | Path) -> list[ResultRow]:
    """Read rows back from the JSONL stream (or the CSV as fallback)."""
    base = Path(path)
    jsonl = base.with_suffix(".jsonl")
    if jsonl.is_file():
        return [_record_to_row(json.loads(line))
                for line in jsonl.read_text().splitlines() if line]
    out = []
    with open(base.with_suffix(".csv"), newline="") as fh:
        for rec in csv.DictReader(fh):
            kw: dict = {}
            for name in _FIELDS:
                raw = rec[name]
                if name in _VECTORS:
                    kw[name] = (tuple(float(x) for x in raw.split(";"))
                                if raw else None)
                elif name in _REALS:
                    kw[name] = float(raw) if raw else None
                elif name == "valid":
                    kw[name] = raw == "true"
                elif name in _INTS:
                    kw[name] = int(raw)
                elif name == "actual_tokens":
                    kw[name] = int(raw) if raw else None
                elif name == "failure":
                    kw[name] = raw or None
                else:
                    kw[name] = raw
            out.append(ResultRow(**kw))
    return out

"""Result tables, CSV/JSON emission and the pass/fail report."""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np


class Check(NamedTuple):
    name: str
    passed: bool
    detail: str = ""


@dataclass
class ResultTable:
    """Rectangular numeric table with metadata and acceptance verdicts."""

    name: str
    columns: tuple
    rows: np.ndarray
    metadata: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)

    def __post_init__(self):
        self.columns = tuple(self.columns)
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim == 1:
            rows = rows.reshape(-1, len(self.columns)) if rows.size else np.empty((0, len(self.columns)))
        if rows.ndim != 2 or rows.shape[1] != len(self.columns):
            raise ValueError(f"table {self.name!r}: rows do not match {len(self.columns)} columns")
        self.rows = rows

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.columns.index(name)]

    def to_csv(self) -> str:
        """Header plus rows, 17 significant digits, '\\n' line ends, no quoting."""
        lines = [",".join(self.columns)]
        lines += [",".join(_fmt(v) for v in row) for row in self.rows]
        return "\n".join(lines) + "\n"

    def sidecar(self) -> dict:
        return {
            "name": self.name,
            "columns": list(self.columns),
            "metadata": _jsonable(self.metadata),
            "checks": [{"name": c.name, "passed": bool(c.passed), "detail": c.detail}
                       for c in self.checks],
        }

    def write(self, directory: str, stem: str | None = None):
        """Write ``<stem>.csv`` and ``<stem>.json``; returns both paths."""
        stem = stem or self.name
        try:
            os.makedirs(directory, exist_ok=True)
            csv_path = os.path.join(directory, f"{stem}.csv")
            json_path = os.path.join(directory, f"{stem}.json")
            with open(csv_path, "w", newline="\n") as fh:
                fh.write(self.to_csv())
            with open(json_path, "w") as fh:
                json.dump(self.sidecar(), fh, indent=2, sort_keys=True)
                fh.write("\n")
        except OSError as e:
            raise OSError(f"cannot write results to {e.filename or directory}: {e.strerror}") from e
        return csv_path, json_path


def _fmt(v: float) -> str:
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.17g}"


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    return x


def emit_report(tables) -> tuple[str, int]:
    """One line per check across ``tables``; exit status 1 when any failed."""
    lines = []
    failed = 0
    for t in tables:
        for c in t.checks:
            lines.append(f"[{'PASS' if c.passed else 'FAIL'}] {t.name}: {c.name}"
                         + (f" ({c.detail})" if c.detail else ""))
            failed += not c.passed
    if not lines:
        return "no checks run\n", 0
    lines.append(f"{len(lines) - failed} passed, {failed} failed")
    return "\n".join(lines) + "\n", 1 if failed else 0

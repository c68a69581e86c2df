"""Run records and their CSV / JSON serialization.

CSV carries the per-step potentials (one row per recorded iteration, 17
significant digits, ``inf``/``nan`` spelled out).  JSON carries everything:
configuration echo, oracle result, lemma checks and kept iterates, under
``"schema": 1``.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analysis import CheckResult, PotentialReport
from .errors import FormatError
from .oracle import OracleResult

SCHEMA = 1
STATUSES = ("max_iter", "target_reached", "stationary", "support_collapse", "kernel_error")


@dataclass
class Trace:
    instance_id: str
    config: dict
    rows: list = field(default_factory=list)
    terminal_status: str = "max_iter"
    message: str = ""
    oracle: OracleResult | None = None
    checks: dict = field(default_factory=dict)
    iterates: dict = field(default_factory=dict)
    column_names: tuple | None = None
    stride: int = 1

    @property
    def final(self):
        return self.rows[-1]

    @property
    def iterations(self):
        return self.rows[-1].k if self.rows else 0

    def y_at(self, k):
        return self.iterates[k][0]

    def w_at(self, k):
        return self.iterates[k][1]

    @property
    def final_y(self):
        return self.iterates[max(self.iterates)][0]

    def column(self, name):
        return np.array([getattr(r, name) for r in self.rows])

    def all_checks_passed(self):
        return all(c.passed for c in self.checks.values() if not c.skipped)


# -- CSV ---------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if np.isnan(v):
        return "nan"
    if np.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".17g")


def write_csv(t, path):
    """Write the potentials table; also ``<stem>.y.csv`` when iterates were kept."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(PotentialReport.CSV_FIELDS)
        for r in t.rows:
            wr.writerow([_fmt(getattr(r, f)) for f in PotentialReport.CSV_FIELDS])
    if t.iterates:
        n = len(next(iter(t.iterates.values()))[0])
        names = t.column_names or tuple(f"x{i}" for i in range(n))
        with open(companion_path(path), "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(("k",) + tuple(names))
            for k in sorted(t.iterates):
                wr.writerow([k] + [_fmt(v) for v in t.iterates[k][0]])


def companion_path(path):
    path = Path(path)
    return path.with_name(path.stem + ".y.csv")


def read_csv(path):
    """Rows of a potentials CSV as :class:`PotentialReport` objects."""
    rows = []
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd, None)
        if tuple(header or ()) != PotentialReport.CSV_FIELDS:
            raise FormatError(f"{path}:1: unexpected header {header}")
        for lineno, rec in enumerate(rd, 2):
            try:
                rows.append(PotentialReport(int(rec[0]), *(float(v) for v in rec[1:])))
            except (ValueError, TypeError) as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from exc
    return rows


# -- JSON --------------------------------------------------------------------


def _num(v):
    v = float(v)
    if np.isfinite(v):
        return v
    return "nan" if np.isnan(v) else ("inf" if v > 0 else "-inf")


def _unnum(v):
    return float(v)


def _row_dict(r):
    return {
        "k": r.k,
        "l1_w": _num(r.l1_w),
        "l1_y": _num(r.l1_y),
        "energy_E": _num(r.energy_E),
        "barrier_B": _num(r.barrier_B),
        "max_ratio": _num(r.max_ratio),
        "j_value": _num(r.j_value),
        "energy_gram": _num(r.energy_gram),
        "residual": _num(r.residual),
    }


def to_dict(t, timestamp=True):
    d = {
        "schema": SCHEMA,
        "instance_id": t.instance_id,
        "config": t.config,
        "terminal_status": t.terminal_status,
        "message": t.message,
        "stride": t.stride,
        "column_names": list(t.column_names) if t.column_names else None,
        "rows": [_row_dict(r) for r in t.rows],
        "checks": {name: {k: (_num(v) if isinstance(v, float) else v)
                          for k, v in c.to_dict().items()}
                   for name, c in t.checks.items()},
        "iterates": [
            {"k": k, "y": [_num(v) for v in y], "w": [_num(v) for v in w]}
            for k, (y, w) in sorted(t.iterates.items())
        ],
    }
    if t.oracle is not None:
        d["oracle"] = t.oracle.to_dict()
    if timestamp:
        d["created"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    return d


def from_dict(d):
    if d.get("schema") != SCHEMA:
        raise FormatError(f"unsupported trace schema {d.get('schema')!r}")
    rows = [
        PotentialReport(int(r["k"]), *(_unnum(r[f]) for f in (
            "l1_w", "l1_y", "energy_E", "barrier_B", "max_ratio", "j_value",
            "energy_gram", "residual")))
        for r in d["rows"]
    ]
    checks = {}
    for name, c in d.get("checks", {}).items():
        c = dict(c)
        c["margin"] = _unnum(c["margin"])
        checks[name] = CheckResult.from_dict(c)
    iterates = {
        int(it["k"]): (np.array([_unnum(v) for v in it["y"]]), np.array([_unnum(v) for v in it["w"]]))
        for it in d.get("iterates", [])
    }
    oracle = OracleResult.from_dict(d["oracle"]) if "oracle" in d else None
    names = d.get("column_names")
    return Trace(
        instance_id=d["instance_id"],
        config=d["config"],
        rows=rows,
        terminal_status=d["terminal_status"],
        message=d.get("message", ""),
        oracle=oracle,
        checks=checks,
        iterates=iterates,
        column_names=tuple(names) if names else None,
        stride=int(d.get("stride", 1)),
    )


def write_json(t, path, timestamp=True):
    with open(path, "w") as fh:
        json.dump(to_dict(t, timestamp=timestamp), fh, indent=1)
        fh.write("\n")


def read_json(path):
    text = Path(path).read_text()
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    try:
        return from_dict(d)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"{path}: malformed trace ({exc!r})") from exc

"""Bound checks and tabular output shared by the probes.

A :class:`Check` stores an ``(empirical, bound, slack)`` triple and fails only
when the empirical value is on the wrong side of ``bound +/- slack``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

__all__ = [
    "BoundViolation",
    "Check",
    "ProbeReport",
    "binomial_stderr",
    "csv_text",
    "write_csv",
]


class BoundViolation(AssertionError):
    """An empirical quantity fell outside its bound plus slack."""


@dataclass(frozen=True)
class Check:
    name: str
    empirical: float
    bound: float
    slack: float = 0.0
    upper: bool = True  # True: empirical <= bound + slack; False: >= bound - slack

    @property
    def ok(self) -> bool:
        if self.upper:
            return self.empirical <= self.bound + self.slack
        return self.empirical >= self.bound - self.slack

    def describe(self) -> str:
        op = "<=" if self.upper else ">="
        sign = "+" if self.upper else "-"
        return f"{self.name}: {self.empirical:.6g} {op} {self.bound:.6g} {sign} {self.slack:.3g}"


@dataclass
class ProbeReport:
    """Rows of measured data plus the bound checks derived from them."""

    name: str
    columns: list[str]
    rows: list[dict] = field(default_factory=list)
    checks: list[Check] = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.ok]

    def require(self) -> "ProbeReport":
        bad = self.failures
        if bad:
            raise BoundViolation(f"{self.name}: " + "; ".join(c.describe() for c in bad))
        return self

    def to_csv(self, header: Sequence[str] = ()) -> str:
        return csv_text(self.columns, self.rows, header)


def binomial_stderr(p: float, n: int) -> float:
    p = min(max(p, 0.0), 1.0)
    return math.sqrt(p * (1.0 - p) / n) if n > 0 else float("inf")


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, complex):
        return repr(v)
    return str(v)


def csv_text(columns: Sequence[str], rows: Iterable[dict], header: Sequence[str] = ()) -> str:
    """CSV with optional leading ``#`` comment lines.

    Floats are written with ``repr`` so values round-trip exactly.
    """
    buf = io.StringIO()
    for line in header:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row.get(c, "")) for c in columns])
    return buf.getvalue()


def write_csv(path, columns: Sequence[str], rows: Iterable[dict], header: Sequence[str] = ()) -> Path:
    path = Path(path)
    path.write_text(csv_text(columns, rows, header))
    return path

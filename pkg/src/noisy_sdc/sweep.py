"""Tabular sweep results and an order-preserving worker pool."""

from __future__ import annotations

import io
import numbers
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence


def format_value(v: Any, shortest: bool = False) -> str:
    """17 significant digits for data; ``shortest`` gives the round-trip repr."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, numbers.Integral):
        return str(int(v))
    if isinstance(v, numbers.Real):
        x = float(v) + 0.0  # no "-0"
        return repr(x) if shortest else format(x, ".17g")
    return str(v)


@dataclass
class SweepResult:
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)
    meta: dict[str, Any] = field(default_factory=dict)
    footer: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.columns = tuple(self.columns)
        for row in self.rows:
            self._check(row)

    def _check(self, row):
        if len(row) != len(self.columns):
            raise ValueError(f"row has {len(row)} fields, expected {len(self.columns)}")

    def append(self, row: Sequence) -> None:
        row = tuple(row)
        self._check(row)
        self.rows.append(row)

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def to_csv(self) -> str:
        """``# key=value`` metadata, header, rows, then ``# key=value`` footer."""
        buf = io.StringIO()
        for k, v in self.meta.items():
            buf.write(f"# {k}={format_value(v, shortest=True)}\n")
        buf.write(",".join(self.columns) + "\n")
        for row in self.rows:
            buf.write(",".join(format_value(v) for v in row) + "\n")
        for k, v in self.footer.items():
            buf.write(f"# {k}={format_value(v)}\n")
        return buf.getvalue()


def parse_csv(text: str) -> SweepResult:
    """Inverse of :meth:`SweepResult.to_csv`; values stay strings."""
    meta, footer, rows = {}, {}, []
    columns = None
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            (meta if columns is None else footer)[key] = value
        elif columns is None:
            columns = tuple(line.split(","))
        elif line:
            rows.append(tuple(line.split(",")))
    return SweepResult(columns or (), rows, meta, footer)


def default_jobs() -> int:
    return os.cpu_count() or 1


def parallel_map(fn: Callable, items: Iterable, jobs: int | None = 1) -> list:
    """``list(map(fn, items))``, fanned out over processes when jobs > 1."""
    items = list(items)
    jobs = default_jobs() if jobs is None else jobs
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(fn, items))

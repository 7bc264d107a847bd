"""Sampled fields on a uniform lattice and the CSV formats used for export."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, TextIO

import numpy as np


def format_number(x: float) -> str:
    """Shortest round-trip decimal, capped at 12 significant digits.

    ``%.12g`` already strips trailing zeros, so any value whose shortest
    representation fits in 12 digits comes out unchanged.
    """
    return format(float(x), ".12g")


@dataclass(frozen=True)
class GridField:
    """Values of a field at ``(i/(n-1), j/(n-1))``, ``values[i, j]``."""

    n: int
    values: np.ndarray

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if np.shape(self.values) != (self.n, self.n):
            raise ValueError("values must be an n x n array")

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n)

    @classmethod
    def sample(cls, f: Callable, n: int) -> "GridField":
        t = np.linspace(0.0, 1.0, n)
        gx, gy = np.meshgrid(t, t, indexing="ij")
        return cls(n, np.asarray(f(gx, gy), dtype=float) * np.ones_like(gx))

    def write_csv(self, out: TextIO) -> None:
        """Header ``x,y,value``; ``x`` is the outer (row) index."""
        t = [format_number(v) for v in self.axis]
        out.write("x,y,value\n")
        for i in range(self.n):
            row = self.values[i]
            out.writelines(f"{t[i]},{t[j]},{format_number(row[j])}\n" for j in range(self.n))

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def write_rows(out: TextIO, header: Sequence[str], rows: Iterable[Sequence[float]]) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([format_number(v) for v in r])

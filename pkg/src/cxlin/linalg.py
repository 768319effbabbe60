"""Exact linear algebra over the rationals.

Rows are reduced fraction-free (integer rows, content removed after each
elimination step) so nullspace dimensions are exact.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Iterable, Mapping, Sequence

__all__ = ["RowEchelon", "nullspace", "solve", "rank"]


def _integer_row(row: Mapping[int, Fraction]) -> dict[int, int]:
    den = reduce(lcm, (Fraction(v).denominator for v in row.values()), 1)
    ints = {c: int(Fraction(v) * den) for c, v in row.items() if v != 0}
    return _primitive(ints)


def _primitive(row: dict[int, int]) -> dict[int, int]:
    if not row:
        return row
    g = reduce(gcd, (abs(v) for v in row.values()))
    lead = row[min(row)]
    if lead < 0:
        g = -g
    return {c: v // g for c, v in row.items()}


class RowEchelon:
    """Incremental echelon form over sparse integer rows.

    ``add`` reduces an incoming row against the current pivots and keeps it
    if anything survives.
    """

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.pivots: dict[int, dict[int, int]] = {}

    def reduce(self, row: dict[int, int]) -> dict[int, int]:
        row = dict(row)
        while row:
            col = min(row)
            piv = self.pivots.get(col)
            if piv is None:
                break
            a, b = piv[col], row[col]
            merged = {c: a * v for c, v in row.items()}
            for c, v in piv.items():
                merged[c] = merged.get(c, 0) - b * v
            row = _primitive({c: v for c, v in merged.items() if v})
        return row

    def add(self, row: Mapping[int, Fraction | int]) -> bool:
        row = self.reduce(_integer_row(row))
        if not row:
            return False
        self.pivots[min(row)] = row
        return True

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def rref(self) -> dict[int, dict[int, Fraction]]:
        """Reduced rows keyed by pivot column, pivot entries equal to 1."""
        out: dict[int, dict[int, Fraction]] = {}
        for col in sorted(self.pivots, reverse=True):
            row = {c: Fraction(v, self.pivots[col][col]) for c, v in self.pivots[col].items()}
            for c in [c for c in row if c != col and c in out]:
                factor = row.pop(c)
                for cc, vv in out[c].items():
                    if cc == c:
                        continue
                    row[cc] = row.get(cc, 0) - factor * vv
            out[col] = {c: v for c, v in row.items() if v != 0}
        return out

    def nullspace(self) -> list[list[Fraction]]:
        red = self.rref()
        free = [c for c in range(self.ncols) if c not in red]
        basis = []
        for f in free:
            vec = [Fraction(0)] * self.ncols
            vec[f] = Fraction(1)
            for pc, row in red.items():
                vec[pc] = -row.get(f, Fraction(0))
            basis.append(vec)
        return basis


def _rows_to_echelon(rows: Iterable[Mapping[int, Fraction | int]], ncols: int) -> RowEchelon:
    ech = RowEchelon(ncols)
    for r in rows:
        ech.add(r)
    return ech


def nullspace(rows: Iterable[Mapping[int, Fraction | int]], ncols: int) -> list[list[Fraction]]:
    """Basis of ``{v : row . v = 0 for every row}`` (sparse dict rows)."""
    return _rows_to_echelon(rows, ncols).nullspace()


def rank(rows: Iterable[Mapping[int, Fraction | int]], ncols: int) -> int:
    return _rows_to_echelon(rows, ncols).rank


def solve(columns: Sequence[Mapping[object, Fraction | int]], target: Mapping[object, Fraction | int]):
    """Find rational ``c`` with ``sum_k c_k * columns[k] == target`` (keys are row labels).

    Returns the coefficient list or ``None`` when the target is outside the span.
    """
    n = len(columns)
    keys = sorted({k for col in columns for k in col} | set(target), key=repr)
    rows = []
    for key in keys:
        row = {k: Fraction(col.get(key, 0)) for k, col in enumerate(columns) if col.get(key, 0)}
        t = Fraction(target.get(key, 0))
        if t:
            row[n] = -t
        if row:
            rows.append(row)
    # homogeneous system in (c, 1); solutions need the last entry nonzero
    ech = _rows_to_echelon(rows, n + 1)
    red = ech.rref()
    if n in red:
        return None
    coeffs = [Fraction(0)] * n
    for pc, row in red.items():
        coeffs[pc] = -row.get(n, Fraction(0))
    return coeffs

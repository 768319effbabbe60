"""Taylor-series continuation for ``U'' = g(chi) U + h(chi)`` with polynomial g, h.

Solutions are entire, so values reached along different paths agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import sympy as sp

ORDER = 32


class StepUnderflow(RuntimeError):
    pass


def _shift(coeffs: Sequence[complex], c: complex) -> list[complex]:
    """Coefficients of p(c + t) from those of p(chi) (Horner/Taylor shift)."""
    out = list(coeffs)
    n = len(out)
    for i in range(n):
        for j in range(n - 2, i - 1, -1):
            out[j] += c * out[j + 1]
    return out


def taylor_coefficients(g, h, u0: complex, up0: complex, order: int = ORDER) -> list[complex]:
    """Series coefficients at the local origin; g, h already shifted there."""
    a = [0j] * (order + 1)
    a[0], a[1] = complex(u0), complex(up0)
    for n in range(order - 1):
        acc = h[n] if n < len(h) else 0j
        for k in range(min(n, len(g) - 1) + 1):
            acc += g[k] * a[n - k]
        a[n + 2] = acc / ((n + 2) * (n + 1))
    return a


def _step_size(a: list[complex], tol: float) -> float:
    scale = max(1.0, abs(a[0]), abs(a[1]))
    best = float("inf")
    for n in (len(a) - 2, len(a) - 1):
        if a[n] != 0:
            best = min(best, (tol * scale / abs(a[n])) ** (1.0 / n))
    return min(best, 2.0)


@dataclass
class AnalyticFunction:
    """Solution of a linear target with initial data at ``chi0``; caches nodes."""

    g: list[complex]
    h: list[complex]
    chi0: complex
    u0: complex
    up0: complex
    tol: float = 1e-17
    nodes: list = field(default_factory=list)

    def __post_init__(self):
        self.nodes = [(complex(self.chi0), complex(self.u0), complex(self.up0))]

    @classmethod
    def from_polys(cls, g_expr, h_expr, chi0, u0, up0, var=None):
        var = var or sp.Symbol("chi")
        return cls(_coeffs(g_expr, var), _coeffs(h_expr, var), chi0, u0, up0)

    @classmethod
    def from_target(cls, target, chi0, u0, up0):
        from ..kernel import CHI

        return cls.from_polys(target.g.tree, target.h.tree, chi0, u0, up0, CHI)

    def _advance(self, z0, u, up, z1):
        """Straight segment z0 -> z1; returns (U, U') at z1."""
        remaining = z1 - z0
        z = z0
        while abs(remaining) > 0:
            g = _shift(self.g, z)
            h = _shift(self.h, z)
            a = taylor_coefficients(g, h, u, up)
            hstep = _step_size(a, self.tol)
            if hstep < 1e-12:
                raise StepUnderflow(f"Taylor step underflow at chi = {z}")
            if hstep >= abs(remaining):
                dz = remaining
            else:
                dz = remaining / abs(remaining) * hstep
            u, up = _horner(a, dz)
            z += dz
            remaining = z1 - z
            if abs(remaining) < 1e-15 * max(1.0, abs(z1)):
                break
        return u, up

    def evaluate(self, z: complex) -> tuple[complex, complex]:
        z = complex(z)
        start = min(self.nodes, key=lambda nd: abs(nd[0] - z))
        if start[0] == z:
            return start[1], start[2]
        u, up = self._advance(start[0], start[1], start[2], z)
        self.nodes.append((z, u, up))
        if len(self.nodes) > 4096:
            del self.nodes[1:1024]
        return u, up

    def along(self, path: Sequence[complex]) -> tuple[complex, complex]:
        """Continue through the polyline ``path`` (first vertex must be chi0)."""
        pts = [complex(p) for p in path]
        if abs(pts[0] - self.chi0) > 1e-15:
            raise ValueError("path must start at chi0")
        u, up = self.u0, self.up0
        for z0, z1 in zip(pts, pts[1:]):
            u, up = self._advance(z0, u, up, z1)
        return u, up


def _horner(a, dz):
    u = 0j
    for c in reversed(a):
        u = u * dz + c
    up = 0j
    for n in range(len(a) - 1, 0, -1):
        up = up * dz + n * a[n]
    return u, up


def _coeffs(expr, var) -> list[complex]:
    expr = sp.expand(sp.sympify(expr))
    if expr == 0:
        return [0j]
    poly = sp.Poly(expr, var)
    if any(c.free_symbols for c in poly.all_coeffs()):
        raise ValueError("target coefficients must be numeric polynomials in chi")
    return [complex(sp.N(c, 17)) for c in reversed(poly.all_coeffs())]


def continue_analytic(a: AnalyticFunction, path: Sequence[complex]) -> tuple[complex, complex]:
    """Value and derivative at the end of ``path``."""
    return a.along(path)

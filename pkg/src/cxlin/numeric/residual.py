"""Residuals of candidate solutions in a real system."""

from __future__ import annotations

import cmath
import math
from typing import Callable, Sequence

import sympy as sp

from ..kernel import F1, F1P, F2, F2P, X, CScalar, Expr

__all__ = ["GridSingular", "residual", "residual_complex"]


class GridSingular(ArithmeticError):
    pass


def _second_derivative(fn: Callable[[float], float], x: float, h: float = 1e-2) -> float:
    """Centered second difference with two Richardson levels."""

    def d2(step):
        return (fn(x + step) - 2 * fn(x) + fn(x - step)) / step**2

    a, b, c = d2(h), d2(h / 2), d2(h / 4)
    r1 = (4 * b - a) / 3
    r2 = (4 * c - b) / 3
    return (16 * r2 - r1) / 15


def _first_derivative(fn, x, h=1e-2):
    def d1(step):
        return (fn(x + step) - fn(x - step)) / (2 * step)

    a, b, c = d1(h), d1(h / 2), d1(h / 4)
    r1 = (4 * b - a) / 3
    r2 = (4 * c - b) / 3
    return (16 * r2 - r1) / 15


def residual(s, f1, f2, grid: Sequence[float]) -> float:
    """``max |f1'' - omega1| + |f2'' - omega2|`` over ``grid``.

    Symbolic ``Expr`` inputs in x use exact derivatives; callables use
    Richardson-extrapolated differences.
    """
    grid = [float(g) for g in grid]
    args = (X, F1, F2, F1P, F2P)
    w1 = sp.lambdify(args, s.omega1.tree, modules="math")
    w2 = sp.lambdify(args, s.omega2.tree, modules="math")
    if isinstance(f1, (Expr, int, float)) and isinstance(f2, (Expr, int, float)):
        t1, t2 = (sp.sympify(f.tree if isinstance(f, Expr) else f) for f in (f1, f2))
        fns = []
        for t in (t1, t2):
            fns.append(tuple(sp.lambdify(X, sp.diff(t, X, k), modules="math") for k in range(3)))
        vals = lambda fn, x: tuple(fn[k](x) for k in range(3))  # noqa: E731
    else:
        fns = (f1, f2)
        vals = lambda fn, x: (fn(x), _first_derivative(fn, x), _second_derivative(fn, x))  # noqa: E731
    worst = 0.0
    for x in grid:
        try:
            a0, a1, a2 = vals(fns[0], x)
            b0, b1, b2 = vals(fns[1], x)
            r = abs(a2 - w1(x, a0, b0, a1, b1)) + abs(b2 - w2(x, a0, b0, a1, b1))
        except (ZeroDivisionError, ValueError, OverflowError) as err:
            raise GridSingular(f"grid point x = {x!r} is singular: {err}") from None
        if not math.isfinite(r):
            raise GridSingular(f"grid point x = {x!r} is singular")
        worst = max(worst, r)
    return worst


def residual_complex(c, u: CScalar, grid: Sequence[float]) -> float:
    """``max |u'' - omega(x, u, u')|`` for a complex closed form ``u(x)``."""
    from ..kernel import UP, U_

    omega = c.omega.tree if hasattr(c, "omega") else c.tree
    t = u.tree
    d = [sp.lambdify(X, sp.diff(t, X, k), modules="cmath") for k in range(3)]
    w = sp.lambdify((X, U_, UP), omega, modules="cmath")
    worst = 0.0
    for x in grid:
        try:
            r = abs(d[2](x) - w(x, d[0](x), d[1](x)))
        except (ZeroDivisionError, ValueError, OverflowError) as err:
            raise GridSingular(f"grid point x = {x!r} is singular: {err}") from None
        if not cmath.isfinite(r):
            raise GridSingular(f"grid point x = {x!r} is singular")
        worst = max(worst, r)
    return worst

"""Dormand-Prince 5(4) integration of real second-order systems."""

from __future__ import annotations

import bisect
import csv
import io
import math
from dataclasses import dataclass, field

import sympy as sp

from ..kernel import F1, F1P, F2, F2P, X

__all__ = ["PoleEncounter", "StepUnderflow", "Trajectory", "integrate", "rhs_function"]


class PoleEncounter(ArithmeticError):
    pass


class StepUnderflow(RuntimeError):
    pass


# Dormand-Prince tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)


def rhs_function(s):
    """Callable ``(x, y) -> y'`` for the first-order form with ``y = (f1, f2, f1', f2')``."""
    args = (X, F1, F2, F1P, F2P)
    w1 = sp.lambdify(args, s.omega1.tree, modules="math")
    w2 = sp.lambdify(args, s.omega2.tree, modules="math")

    def f(x, y):
        try:
            a = float(w1(x, *y))
            b = float(w2(x, *y))
        except (ZeroDivisionError, ValueError, OverflowError) as err:
            raise PoleEncounter(f"right-hand side not evaluable at x = {x!r}: {err}") from None
        if not (math.isfinite(a) and math.isfinite(b)):
            raise PoleEncounter(f"right-hand side is not finite at x = {x!r}")
        return (y[2], y[3], a, b)

    return f


@dataclass
class Trajectory:
    xs: list[float]
    ys: list[tuple[float, float, float, float]]
    errors: list[float] = field(default_factory=list)
    derivs: list[tuple] = field(default_factory=list)

    def __len__(self):
        return len(self.xs)

    def __call__(self, x: float) -> tuple[float, ...]:
        """Dense output by cubic Hermite interpolation on each accepted step."""
        xs = self.xs
        increasing = xs[-1] >= xs[0]
        key = x if increasing else -x
        keys = xs if increasing else [-v for v in xs]
        if not keys[0] - 1e-12 <= key <= keys[-1] + 1e-12:
            raise ValueError(f"x = {x} outside the trajectory")
        i = min(max(bisect.bisect_right(keys, key) - 1, 0), len(xs) - 2)
        x0, x1 = xs[i], xs[i + 1]
        h = x1 - x0
        t = (x - x0) / h
        h00 = 2 * t**3 - 3 * t**2 + 1
        h10 = t**3 - 2 * t**2 + t
        h01 = -2 * t**3 + 3 * t**2
        h11 = t**3 - t**2
        y0, y1, d0, d1 = self.ys[i], self.ys[i + 1], self.derivs[i], self.derivs[i + 1]
        return tuple(h00 * a + h10 * h * da + h01 * b + h11 * h * db for a, b, da, db in zip(y0, y1, d0, d1))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "f1", "f2", "f1p", "f2p"])
        for x, y in zip(self.xs, self.ys):
            w.writerow([repr(x), *(repr(v) for v in y)])
        return buf.getvalue()


def integrate(s, ic, interval, tol: float = 1e-10, *, h0: float | None = None, max_steps: int = 200000) -> Trajectory:
    """Adaptive integration from ``interval[0]`` to ``interval[1]``.

    ``ic`` is ``(f1, f2, f1', f2')`` at the start; the error norm is mixed
    absolute/relative with both weights equal to ``tol``.
    """
    f = s if callable(s) else rhs_function(s)
    x0, x1 = float(interval[0]), float(interval[1])
    span = x1 - x0
    direction = 1.0 if span >= 0 else -1.0
    y = tuple(float(v) for v in ic)
    x = x0
    k1 = f(x, y)
    traj = Trajectory([x], [y], [0.0], [k1])
    if span == 0:
        return traj
    h = direction * (h0 or min(abs(span), 1e-2))
    for _ in range(max_steps):
        if direction * (x + h - x1) > 0:
            h = x1 - x
        ks = [k1]
        for i in range(1, 7):
            yi = tuple(y[j] + h * sum(a * ks[m][j] for m, a in enumerate(_A[i])) for j in range(4))
            ks.append(f(x + _C[i] * h, yi))
        y5 = tuple(y[j] + h * sum(b * ks[m][j] for m, b in enumerate(_B5)) for j in range(4))
        err = 0.0
        for j in range(4):
            e = h * sum((b5 - b4) * ks[m][j] for m, (b5, b4) in enumerate(zip(_B5, _B4)))
            sc = tol + tol * max(abs(y[j]), abs(y5[j]))
            err = max(err, abs(e) / sc)
        if err <= 1.0:
            x = x + h
            y = y5
            k1 = ks[6]  # FSAL
            traj.xs.append(x)
            traj.ys.append(y)
            traj.errors.append(err * tol)
            traj.derivs.append(k1)
            if direction * (x - x1) >= -1e-15 * max(1.0, abs(x1)):
                return traj
        factor = 0.9 * (1.0 / err) ** 0.2 if err > 0 else 5.0
        h *= min(5.0, max(0.2, factor))
        if abs(h) < 1e-14 * max(1.0, abs(x)):
            raise StepUnderflow(f"step size underflow at x = {x!r}")
    raise StepUnderflow(f"no convergence within {max_steps} steps")

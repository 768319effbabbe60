"""Tracing the level set ``Im U(u) = 0`` with ``x = Re U(u)``.

Along the curve ``u`` is a solution of the base equation in implicit form,
so ``u'(x) = 1 / U'(u)``.
"""

from __future__ import annotations

import bisect
import csv
import io
from dataclasses import dataclass, field

__all__ = ["LostCurve", "CriticalPoint", "Curve", "trace_implicit", "as_evaluator"]


class LostCurve(RuntimeError):
    pass


class CriticalPoint(ArithmeticError):
    pass


def as_evaluator(U):
    """Accept an AnalyticFunction, a ``u -> (U, U')`` callable, or a GeneralSolution evaluator."""
    if hasattr(U, "evaluate"):
        return U.evaluate
    return U


@dataclass
class Curve:
    us: list[complex] = field(default_factory=list)
    xs: list[float] = field(default_factory=list)
    slopes: list[complex] = field(default_factory=list)  # du/dx
    evaluator: object = None

    @property
    def f1(self):
        return [u.real for u in self.us]

    @property
    def f2(self):
        return [u.imag for u in self.us]

    def at(self, x: float, tol: float = 1e-14) -> tuple[complex, complex]:
        """``(u, u')`` at ``x`` by complex Newton on ``U(u) = x``."""
        xs = self.xs
        lo, hi = min(xs[0], xs[-1]), max(xs[0], xs[-1])
        if not lo - 1e-12 <= x <= hi + 1e-12:
            raise ValueError(f"x = {x} outside the traced range")
        inc = xs[-1] >= xs[0]
        keys = xs if inc else [-v for v in xs]
        i = min(max(bisect.bisect_right(keys, x if inc else -x) - 1, 0), len(xs) - 2)
        t = (x - xs[i]) / (xs[i + 1] - xs[i])
        u = self.us[i] + t * (self.us[i + 1] - self.us[i])
        return _newton_level(self.evaluator, u, x, tol)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "f1", "f2", "f1p", "f2p"])
        for x, u, s in zip(self.xs, self.us, self.slopes):
            w.writerow([repr(x), repr(u.real), repr(u.imag), repr(s.real), repr(s.imag)])
        return buf.getvalue()


def _newton_level(ev, u, x, tol, maxit=40):
    for _ in range(maxit):
        val, der = ev(u)
        if abs(der) < 1e-12:
            raise CriticalPoint(f"U'(u) vanishes near u = {u}")
        du = (val - x) / der
        u -= du
        if abs(du) <= tol * max(1.0, abs(u)):
            val, der = ev(u)
            return u, 1 / der
    raise LostCurve(f"Newton for U(u) = {x} did not converge")


def _correct(ev, u, normal, tol=1e-13, maxit=30):
    """Damped Newton on Im U along ``normal``; CR gives d(Im U)/ds = Im(U' n)."""
    val, der = ev(u)
    for _ in range(maxit):
        g = (der * normal).imag
        if abs(g) < 1e-14:
            raise LostCurve("corrector direction is tangent to the level set")
        step = -val.imag / g
        lam = 1.0
        while True:
            cand = u + lam * step * normal
            cval, cder = ev(cand)
            if abs(cval.imag) < abs(val.imag) or lam < 1e-3:
                break
            lam *= 0.5
        u, val, der = cand, cval, cder
        if abs(val.imag) <= tol * max(1.0, abs(val)):
            return u, val, der
    raise LostCurve(f"corrector did not reconverge near u = {u}")


def _stalled(u, der):
    if abs(der) < 1e-3:
        raise CriticalPoint(f"U'(u) -> 0 along the curve near u = {u} (|U'| = {abs(der):.2e})")
    raise LostCurve(f"curve lost near u = {u}")


def trace_implicit(U, seed: complex, x_range: tuple[float, float], *, ds: float = 0.02,
                   min_ds: float = 1e-8, max_points: int = 100000) -> Curve:
    """Follow ``Im U = 0`` from ``seed`` until ``Re U`` leaves ``x_range``.

    The seed is first corrected onto the level set. The curve is stepped by
    arc length in the u-plane towards the endpoint of ``x_range`` farther from
    the seed, then the range ends are hit exactly by Newton on ``U(u) = x``.
    """
    ev = as_evaluator(U)
    lo, hi = float(min(x_range)), float(max(x_range))
    val, der = ev(complex(seed))
    if abs(der) < 1e-12:
        raise CriticalPoint(f"U'(seed) vanishes at u = {seed}")
    u, val, der = _correct(ev, complex(seed), 1j * der.conjugate() / abs(der))
    curve = Curve(evaluator=ev)
    # walk towards lower x first, then higher x, and join the two halves
    halves = []
    for target, sign in ((lo, -1.0), (hi, 1.0)):
        pts = [(u, val.real, 1 / der)]
        cu, cval, cder = u, val, der
        step = ds
        while sign * (cval.real - target) < 0:
            if len(pts) > max_points:
                raise LostCurve("too many points")
            if abs(cder) < 1e-6 * max(1.0, abs(cval)):
                # a saddle of U: the level set branches here and the choice is ambiguous
                raise CriticalPoint(f"U'(u) vanishes along the curve near u = {cu}")
            # dx/ds = Re(U' tau) = |U'| when tau = conj(U')/|U'|
            tau = sign * cder.conjugate() / abs(cder)
            try:
                nu, nval, nder = _correct(ev, cu + step * tau, 1j * tau)
            except (LostCurve, CriticalPoint):
                step *= 0.5
                if step < min_ds:
                    _stalled(cu, cder)
                continue
            if abs(nu - cu) > 2 * step or sign * (nval.real - cval.real) <= 0:
                step *= 0.5
                if step < min_ds:
                    _stalled(cu, cder)
                continue
            if sign * (nval.real - target) > 0:
                nu, _ = _newton_level(ev, cu, target, 1e-15)
                nval, nder = ev(nu)
            cu, cval, cder = nu, nval, nder
            pts.append((cu, cval.real, 1 / cder))
            step = min(ds, step * 1.5)
        halves.append(pts)
    ordered = list(reversed(halves[0])) + halves[1][1:]
    # keep the part inside the range; range ends crossed between points are hit exactly
    inside = lambda xx: lo - 1e-12 <= xx <= hi + 1e-12  # noqa: E731
    for k, (uu, xx, sl) in enumerate(ordered):
        if k and inside(xx) != inside(ordered[k - 1][1]):
            px = ordered[k - 1][1]
            edge = lo if min(px, xx) < lo else hi
            eu, esl = _newton_level(ev, uu, edge, 1e-15)
            if not curve.xs or curve.xs[-1] != edge:
                curve.us.append(eu)
                curve.xs.append(edge)
                curve.slopes.append(esl)
        if inside(xx) and not (curve.xs and curve.xs[-1] == xx):
            curve.us.append(uu)
            curve.xs.append(xx)
            curve.slopes.append(sl)
    if len(curve.xs) < 2:
        raise LostCurve("seed does not reach the requested x-range")
    return curve

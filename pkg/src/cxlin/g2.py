"""Lie's canonical forms for two-dimensional algebras and the autonomous reduction.

The reduction uses the canonical coordinates of the translation ``d/dx``:
``chi = u``, ``U = 1/u'``. Then ``dU/dchi = -u''/u'^3`` so a base equation
``u'' = omega(u, u')`` becomes ``U' = -omega(chi, 1/U) U^3``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import sympy as sp

from . import kernel
from .complexify import ComplexODE, ODESystem
from .kernel import BIG_U, CHI, F1, F1P, F2, F2P, UP, U_, X, CScalar, Expr

__all__ = [
    "CanonicalType",
    "FirstOrderODE",
    "Reduction",
    "ImplicitSolution",
    "NotAutonomous",
    "NoCatalogMatch",
    "match_canonical",
    "reduce_autonomous",
    "solve_first_order_catalog",
    "back_substitute",
    "worked_pair",
    "implicit_residual",
    "reduction_sign_check",
]


class NotAutonomous(ValueError):
    pass


class NoCatalogMatch(ValueError):
    pass


@dataclass(frozen=True)
class CanonicalType:
    tag: str  # "I" | "II" | "III" | "IV" | "none"
    w: CScalar | None = None

    def __str__(self):
        if self.tag == "none":
            return "none"
        arg = {"I": "u'", "II": "x", "III": "u'", "IV": "x"}[self.tag]
        return f"type {self.tag}, w({arg}) = {self.w}"


def _free_of(tree, *syms, seed=0) -> bool:
    for s in syms:
        if kernel.is_zero(CScalar(sp.diff(tree, s)), seed=seed) is not True:
            return False
    return True


def match_canonical(c: ComplexODE, *, seed: int = 0) -> CanonicalType:
    """Match ``u'' = omega`` against the four rows of Lie's table.

    I: ``u'' = w(u')``; II: ``u'' = w(x)``; III: ``x u'' = w(u')``;
    IV: ``u'' = u' w(x)``. Rows are tried in that order.
    """
    om = kernel._nf_tree(c.omega.tree)
    if _free_of(om, X, U_, seed=seed):
        return CanonicalType("I", CScalar(om))
    if _free_of(om, U_, UP, seed=seed):
        return CanonicalType("II", CScalar(om))
    xo = kernel._nf_tree(X * om)
    if _free_of(xo, X, U_, seed=seed):
        return CanonicalType("III", CScalar(xo))
    q = kernel._nf_tree(om / UP)
    if _free_of(q, U_, UP, seed=seed):
        return CanonicalType("IV", CScalar(q))
    return CanonicalType("none")


@dataclass(frozen=True)
class FirstOrderODE:
    """``U' = rhs(chi, U)``."""

    rhs: CScalar

    def __str__(self):
        return f"U' = {self.rhs}"


@dataclass(frozen=True)
class Reduction:
    computed: FirstOrderODE
    stated_sign: FirstOrderODE
    sign_note: str

    def unreduce(self) -> CScalar:
        """Rebuild omega from the computed first-order equation."""
        tree = -self.computed.rhs.tree.xreplace({CHI: U_, BIG_U: 1 / UP}) * UP**3
        return CScalar(kernel._nf_tree(tree))


def reduce_autonomous(c: ComplexODE, *, seed: int = 0) -> Reduction:
    """Reduce an x-free base equation to first order in ``U(chi)``.

    ``computed`` follows the chain rule. ``stated_sign`` is the same equation
    with the opposite sign, the form printed for the worked example; which of
    the two is right can be decided numerically with ``reduction_sign_check``.
    """
    om = kernel._nf_tree(c.omega.tree)
    if not _free_of(om, X, seed=seed):
        raise NotAutonomous("omega depends on x after normal form")
    rhs = kernel._nf_tree(-om.xreplace({U_: CHI, UP: 1 / BIG_U}) * BIG_U**3)
    computed = FirstOrderODE(CScalar(rhs))
    flipped = FirstOrderODE(CScalar(kernel._nf_tree(-rhs)))
    note = "" if rhs == 0 else "the chain rule gives U' = -omega(chi, 1/U)*U^3; the opposite sign is also reported"
    return Reduction(computed, flipped, note)


@dataclass
class ImplicitSolution:
    """``relation = 0`` in (chi, U) with complex constant ``C``."""

    relation: CScalar
    U: CScalar | None = None
    constants: tuple[str, ...] = ("C",)

    def __str__(self):
        return f"{self.relation} = 0"


_C = kernel.cparam("C")


def _power_pattern(rhs):
    """``rhs = k * chi^m * U^n`` with k free of chi and U, or None."""
    rhs = sp.factor(rhs)
    if rhs == 0:
        return 0, 0, 0
    k, m, n = sp.Integer(1), sp.Integer(0), sp.Integer(0)
    for f in sp.Mul.make_args(rhs):
        base, e = f.as_base_exp()
        if base == CHI and e.is_number:
            m += e
        elif base == BIG_U and e.is_number:
            n += e
        elif not f.has(CHI, BIG_U):
            k *= f
        else:
            return None
    return k, m, n


def solve_first_order_catalog(f: FirstOrderODE) -> ImplicitSolution:
    """Separable ``U' = k chi^m U^n`` (covers the constant and Riccati-type catalog)."""
    pat = _power_pattern(f.rhs.tree)
    if pat is None:
        raise NoCatalogMatch(f"no catalog entry for {f}")
    k, m, n = pat
    rhs_int = sp.integrate(k * CHI**m, CHI) if k != 0 else sp.Integer(0)
    if n == 0:
        sol = rhs_int + _C
        return ImplicitSolution(CScalar(BIG_U - sol), CScalar(sol))
    if n == 1:
        return ImplicitSolution(CScalar(sp.log(BIG_U) - rhs_int - _C))
    lhs = BIG_U ** (1 - n) / (1 - n)
    rel = kernel._nf_tree(lhs - rhs_int - _C)
    explicit = None
    if n == 2:
        explicit = CScalar(kernel._nf_tree(-1 / (rhs_int + _C)))
    return ImplicitSolution(CScalar(rel), explicit)


def back_substitute(sol: ImplicitSolution) -> CScalar:
    """Undo ``chi = u``, ``U = 1/u'`` and integrate once more.

    Returns ``R(x, u)`` with ``R = 0`` the implicit general solution; the
    second constant is ``K``.
    """
    if sol.U is None:
        raise NoCatalogMatch("back-substitution needs U(chi) explicitly")
    k = kernel.cparam("K")
    # dx/du = U(u)
    integral = sp.integrate(sp.apart(sol.U.tree.xreplace({CHI: U_}), U_), U_)
    return CScalar(X - integral - k)


# -- the worked example ------------------------------------------------------


def worked_pair(variant: str = "derived") -> tuple[Expr, Expr]:
    """Real implicit pair ``G1 = 0``, ``G2 = 0`` for ``u'' = u'/u^2`` with real c1, c2.

    ``"derived"`` is the realification of ``c1 u + log(c1 u - 1) - c1^2 x - c1^2 c2``
    (the arg term taken on the branch where ``c1 f1 > 1``). ``"printed"`` is the
    pair as printed, with ``c2^2 f2^2`` under the logarithm and the
    reciprocal arctan argument.
    """
    c1, c2 = kernel.param("c1"), kernel.param("c2")
    if variant == "derived":
        g1 = 2 * c1 * F1 + sp.log((c1 * F1 - 1) ** 2 + c1**2 * F2**2) - 2 * c1**2 * X - 2 * c1**2 * c2
        g2 = c1 * F2 + sp.atan(c1 * F2 / (c1 * F1 - 1))
    elif variant == "printed":
        g1 = 2 * c1 * F1 + sp.log((c1 * F1 - 1) ** 2 + c2**2 * F2**2) - 2 * c1**2 * X - 2 * c1**2 * c2
        g2 = c1 * F2 + sp.atan((c1 * F1 - 1) / (c1 * F2))
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return Expr(g1), Expr(g2)


def worked_complex_relation() -> CScalar:
    c1, c2 = kernel.param("c1"), kernel.param("c2")
    return CScalar(c1 * U_ + sp.log(c1 * U_ - 1) - c1**2 * X - c1**2 * c2)


def _implicit_derivatives(g1, g2):
    """Symbolic ``f'`` and ``f''`` along ``G1 = G2 = 0`` as expressions in (x, f1, f2)."""
    J = sp.Matrix([[sp.diff(g1, F1), sp.diff(g1, F2)], [sp.diff(g2, F1), sp.diff(g2, F2)]])
    gx = sp.Matrix([sp.diff(g1, X), sp.diff(g2, X)])
    det = J.det()
    adj = J.adjugate()
    first = -(adj * gx) / det
    p1, p2 = first[0], first[1]

    def total(e):
        return sp.diff(e, X) + p1 * sp.diff(e, F1) + p2 * sp.diff(e, F2)

    return (p1, p2), (total(p1), total(p2))


def implicit_residual(s: ODESystem, pair: tuple[Expr, Expr], points: Sequence[tuple[float, float, float]],
                      constants: dict | None = None) -> float:
    """``max |f1'' - omega1| + |f2'' - omega2|`` at curve points ``(x, f1, f2)``.

    Derivatives come from implicit differentiation of the pair, so the check
    is exact up to floating-point evaluation at each point.
    """
    subs = {kernel.param(k): v for k, v in (constants or {}).items()}
    g1, g2 = (p.tree.xreplace(subs) for p in pair)
    (p1, p2), (q1, q2) = _implicit_derivatives(g1, g2)
    w1 = s.omega1.tree.xreplace({F1P: p1, F2P: p2})
    w2 = s.omega2.tree.xreplace({F1P: p1, F2P: p2})
    r1 = sp.lambdify((X, F1, F2), q1 - w1, "math")
    r2 = sp.lambdify((X, F1, F2), q2 - w2, "math")
    worst = 0.0
    for x, a, b in points:
        worst = max(worst, abs(r1(x, a, b)) + abs(r2(x, a, b)))
    return worst


def pair_values(pair: tuple[Expr, Expr], points, constants: dict) -> float:
    """Max ``|G1| + |G2|`` at the points, i.e. whether they lie on the pair at all."""
    subs = {kernel.param(k): v for k, v in constants.items()}
    fs = [sp.lambdify((X, F1, F2), p.tree.xreplace(subs), "math") for p in pair]
    return max(abs(fs[0](*p)) + abs(fs[1](*p)) for p in points)


def worked_points(c1: float, c2: float, xs: Sequence[float], u0: complex,
                    branch: int = 0) -> list[tuple[float, float, float]]:
    """Points of ``R(x, u) + 2*pi*i*branch = 0`` by complex Newton, continued along ``xs``.

    With real constants the principal branch only has real solutions; other
    branches of the logarithm give curves with ``f2 != 0``. The real pair
    holds on all of them (the arctan relation modulo pi).
    """
    out = []
    u = complex(u0)
    shift = 2j * math.pi * branch
    for x in xs:
        for _ in range(60):
            r = c1 * u + cmath.log(c1 * u - 1) + shift - c1 * c1 * x - c1 * c1 * c2
            dr = c1 + c1 / (c1 * u - 1)
            du = r / dr
            u -= du
            if abs(du) < 1e-15 * max(1.0, abs(u)):
                break
        else:
            raise ArithmeticError(f"no point of the relation at x = {x}")
        out.append((x, u.real, u.imag))
    return out


def reduction_sign_check(s: ODESystem, red: Reduction, ic, interval, *, samples: int = 20) -> dict:
    """Integrate the real system and test ``dU/dchi`` against both signs.

    Along a trajectory ``U = 1/u'`` and ``chi = u`` so ``dU/dchi = -u''/u'^3``
    is available pointwise; the result maps each variant to its max defect.
    """
    from .numeric import integrate

    traj = integrate(s, ic, interval, tol=1e-12)
    f_comp = sp.lambdify((CHI, BIG_U), red.computed.rhs.tree, "cmath")
    f_stated = sp.lambdify((CHI, BIG_U), red.stated_sign.rhs.tree, "cmath")
    a, b = float(interval[0]), float(interval[1])
    worst = {"computed": 0.0, "printed": 0.0}
    rhs = s.omega1, s.omega2
    w1 = sp.lambdify((X, F1, F2, F1P, F2P), rhs[0].tree, "math")
    w2 = sp.lambdify((X, F1, F2, F1P, F2P), rhs[1].tree, "math")
    for k in range(samples + 1):
        x = a + (b - a) * k / samples
        y = traj(x)
        up = complex(y[2], y[3])
        upp = complex(w1(x, *y), w2(x, *y))
        dU = -upp / up**3
        chi, U = complex(y[0], y[1]), 1 / up
        worst["computed"] = max(worst["computed"], abs(dU - f_comp(chi, U)))
        worst["printed"] = max(worst["printed"], abs(dU - f_stated(chi, U)))
    return worst

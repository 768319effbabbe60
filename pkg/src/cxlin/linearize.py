"""Complex point transformations and the linear targets they reach."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import sympy as sp

from . import kernel
from .classify import CubicForm, criterion_e3
from .complexify import ComplexODE
from .kernel import BIG_U, BIG_UP, CHI, UP, U_, X, CScalar, Expr

__all__ = [
    "NonlinearTarget",
    "SingularInterval",
    "PointTransform",
    "LinearTarget",
    "GeneralSolution",
    "SolutionForm",
    "PlanePair",
    "HODOGRAPH",
    "Verification",
    "sys3_branches",
    "hodograph",
    "verify_transform",
    "solve_linear_target",
    "recover_solution",
    "emden_solve",
    "emden_transform",
    "plane_geometry",
    "plane_pde_residuals",
    "emden_plane_identity",
    "transform_cr_residuals",
]

A, B = kernel.cparam("a"), kernel.cparam("b")


class NonlinearTarget(ValueError):
    pass


class SingularInterval(ValueError):
    pass


@dataclass(frozen=True)
class PointTransform:
    """``(x, u) -> (chi(x, u), U(x, u))``."""

    chi: CScalar
    U: CScalar

    def jacobian(self) -> CScalar:
        c, u = self.chi, self.U
        return kernel.normal_form(
            kernel.differentiate(c, "x") * kernel.differentiate(u, "u")
            - kernel.differentiate(c, "u") * kernel.differentiate(u, "x")
        )

    def is_nondegenerate(self, seed: int = 0) -> bool:
        return kernel.is_zero(self.jacobian(), seed=seed) is False

    def realified(self) -> tuple[Expr, Expr, Expr, Expr]:
        """(chi1, chi2, F1, F2) as functions of (x, f1, f2)."""
        chi1, chi2 = kernel.realify_parts(self.chi)
        f1, f2 = kernel.realify_parts(self.U)
        return chi1, chi2, f1, f2


HODOGRAPH = PointTransform(CScalar(U_), CScalar(X))


@dataclass(frozen=True)
class LinearTarget:
    """``U'' = g(chi)*U + h(chi)``."""

    g: CScalar
    h: CScalar
    tag: str  # "const" | "harmonic" | "airy" | "general-linear"

    def rhs(self) -> CScalar:
        return kernel.normal_form(self.g * CScalar(BIG_U) + self.h)

    def as_ode(self) -> CScalar:
        return self.rhs()

    def __str__(self):
        return f"U'' = {self.rhs()}"


def _tag(g: sp.Expr, h: sp.Expr) -> str:
    if g == 0 and not h.has(CHI):
        return "const"
    if h == 0 and g != 0 and not g.has(CHI):
        return "harmonic"
    if h == 0 and (sp.expand(g - CHI) == 0 or sp.expand(g + CHI) == 0):
        return "airy"
    return "general-linear"


def hodograph(f: CubicForm, *, seed: int = 0) -> LinearTarget:
    """Swap chi = u, U = x in ``u'' + E3 u'^3 = 0``; the image is ``U'' = E3(U, chi)``."""
    verdict = criterion_e3(f, seed=seed)
    if verdict == "not-applicable":
        raise ValueError("hodograph needs the E3-only family")
    e3 = kernel._nf_tree(f.E3.tree)
    g = kernel._nf_tree(sp.diff(e3, X))
    if verdict != "pass" or sp.diff(g, X) != 0:
        raise NonlinearTarget(f"E3 = {f.E3} is not linear in x; target U'' = E3(U, chi) is nonlinear")
    h = kernel._nf_tree(e3 - X * g)
    g = g.xreplace({U_: CHI})
    h = h.xreplace({U_: CHI})
    return LinearTarget(CScalar(g), CScalar(h), _tag(g, h))


@dataclass(frozen=True)
class Verification:
    status: str  # "verified" | "refuted" | "undecided"
    witness: CScalar | None = None

    @property
    def ok(self) -> bool:
        return self.status == "verified"


def _dx(expr, omega):
    return sp.diff(expr, X) + UP * sp.diff(expr, U_) + omega * sp.diff(expr, UP)


def verify_transform(t: PointTransform, source: ComplexODE, target, *, seed: int = 0) -> Verification:
    """Check symbolically that ``t`` maps ``u'' = omega`` onto ``U'' = target``.

    ``target`` is a CScalar in (chi, U, Up), a LinearTarget, or a
    ComplexODE written in (x, u, up) for identity-type checks.
    """
    if isinstance(target, LinearTarget):
        target = target.rhs()
    elif isinstance(target, ComplexODE):
        target = CScalar(target.omega.tree.xreplace({X: CHI, U_: BIG_U, UP: BIG_UP}))
    omega = source.omega.tree
    chi, big_u = t.chi.tree, t.U.tree
    dchi = _dx(chi, omega)
    up = sp.cancel(sp.together(_dx(big_u, omega) / dchi))
    upp = sp.cancel(sp.together(_dx(up, omega) / dchi))
    rhs = target.tree.xreplace({CHI: chi, BIG_U: big_u, BIG_UP: up})
    residual = CScalar(kernel._nf_tree(upp - rhs))
    verdict = kernel.is_zero(residual, seed=seed)
    if verdict is None:
        return Verification("undecided", residual)
    return Verification("verified" if verdict else "refuted", None if verdict else residual)


# -- solving the linear targets ------------------------------------------------


@dataclass
class GeneralSolution:
    """Two-parameter family ``U(chi; a, b)``."""

    target: LinearTarget
    kind: str  # "closed" | "airy" | "numeric-only"
    formula: str
    expr: CScalar | None = None
    airy_sign: int = 0  # U = a*Ai(s*chi) + b*Bi(s*chi)

    def evaluator(self, a: complex, b: complex):
        """Return ``chi -> (U, dU/dchi)`` for fixed constants."""
        from .numeric import AnalyticFunction, airy_seeds

        if self.kind == "closed":
            tree = self.expr.tree
            f = sp.lambdify((CHI, A, B), tree, "cmath")
            df = sp.lambdify((CHI, A, B), sp.diff(tree, CHI), "cmath")
            a, b = complex(a), complex(b)
            return lambda z: (complex(f(z, a, b)), complex(df(z, a, b)))
        if self.kind == "airy":
            ai0, aip0, bi0, bip0 = airy_seeds()
            s = self.airy_sign
            af = AnalyticFunction.from_target(
                self.target, 0j, a * ai0 + b * bi0, s * (a * aip0 + b * bip0)
            )
            return af.evaluate
        raise ValueError("numeric-only solutions need initial data; use AnalyticFunction.from_target")


def solve_linear_target(t: LinearTarget) -> GeneralSolution:
    """General solution with complex constants a, b where a closed form exists."""
    g, h = t.g.tree, t.h.tree
    if t.tag == "const" or (g == 0 and h.is_polynomial(CHI)):
        inner = sp.integrate(h, CHI)
        particular = sp.integrate(inner, CHI)
        expr = CScalar(sp.expand(particular + A * CHI + B))
        kind = "closed"
        return GeneralSolution(t, kind, f"U = {expr}", expr)
    if t.tag == "harmonic":
        k = sp.sqrt(-g)
        expr = CScalar(A * sp.sin(k * CHI) + B * sp.cos(k * CHI))
        return GeneralSolution(t, "closed", f"U = {expr}", expr)
    if t.tag == "airy":
        s = -1 if sp.expand(g + CHI) == 0 else 1
        arg = "-chi" if s < 0 else "chi"
        return GeneralSolution(t, "airy", f"U = a*Ai({arg}) + b*Bi({arg})", airy_sign=s)
    return GeneralSolution(t, "numeric-only", f"{t} (Taylor continuation only)")


@dataclass
class SolutionForm:
    """Solutions recovered through ``x = U(u)``."""

    implicit: str
    U: GeneralSolution
    explicit_complex: list[CScalar] = field(default_factory=list)
    explicit_real: list[tuple[str, Expr, Expr]] = field(default_factory=list)
    constants: tuple[str, ...] = ()


def recover_solution(f: CubicForm, sol: GeneralSolution) -> SolutionForm:
    """Implicit pair Re U(f1 + i f2) = x, Im U(f1 + i f2) = 0, plus explicit catalog forms."""
    implicit = f"Re U(f1 + i*f2) = x, Im U(f1 + i*f2) = 0 with {sol.formula}"
    out = SolutionForm(implicit, sol)
    t = sol.target
    if t.tag == "const" and sp.expand(t.h.tree + 1) == 0:
        big_a, big_b = kernel.cparam("A"), kernel.cparam("B")
        for s in (1, -1):
            out.explicit_complex.append(CScalar(s * sp.sqrt(big_a - 2 * X) + big_b))
        out.explicit_real.extend(sys3_branches())
        out.constants = ("A", "B")
    elif t.tag == "harmonic" and sp.expand(t.g.tree + 1) == 0:
        big_a, big_b = kernel.cparam("A"), kernel.cparam("B")
        out.explicit_complex.append(CScalar(sp.atan(X / sp.sqrt(big_a - X**2)) + big_b))
        out.constants = ("A", "B")
    return out


def sys3_branches(a1=None, a2=None, b1=None, b2=None) -> list[tuple[str, Expr, Expr]]:
    """The nested-radical real pairs for ``u = +-sqrt(A - 2x) + B`` in all four sign choices."""
    a1 = kernel.param("a1") if a1 is None else sp.nsimplify(a1)
    a2 = kernel.param("a2") if a2 is None else sp.nsimplify(a2)
    b1 = kernel.param("b1") if b1 is None else sp.nsimplify(b1)
    b2 = kernel.param("b2") if b2 is None else sp.nsimplify(b2)
    root = sp.sqrt((a1 - 2 * X) ** 2 + a2**2)
    r1 = sp.sqrt((a1 - 2 * X + root) / 2)
    r2 = sp.sqrt((-a1 + 2 * X + root) / 2)
    out = []
    for s1 in (1, -1):
        for s2 in (1, -1):
            label = ("+" if s1 > 0 else "-") + ("+" if s2 > 0 else "-")
            out.append((label, Expr(s1 * r1 + b1), Expr(s2 * r2 + b2)))
    return out


# -- the Emden example -------------------------------------------------------


def emden_transform() -> PointTransform:
    """``chi = x - 1/u``, ``U = x^2/2 - x/u`` (maps u'' + 3uu' + u^3 = 0 to U'' = 0)."""
    return PointTransform(CScalar(X - 1 / U_), CScalar(X**2 / 2 - X / U_))


def emden_solve(a1, a2, b1, b2, grid: Sequence[float] | None = None) -> tuple[Expr, Expr]:
    """Closed-form solution pair of the coupled Emden system.

    Constants may be numbers or sympy symbols. With ``grid`` the quartic
    denominator is checked for zeros on it.
    """
    a1, a2, b1, b2 = (sp.nsimplify(c) if not isinstance(c, sp.Basic) else c for c in (a1, a2, b1, b2))
    den = X**4 - 4 * X**3 * a1 + 4 * ((a2**2 + a1**2 - b1) * X**2 + 2 * (a2 * b2 + a1 * b1) * X + b1**2 + b2**2)
    num1 = 2 * X**3 - 6 * X**2 * a1 + 4 * (a2**2 + a1**2 - b1) * X + 4 * a1 * b1 + 4 * a2 * b2
    num2 = (2 * X**2 + 4 * b1) * a2 + 4 * b2 * (X - a1)
    if grid is not None:
        d = sp.lambdify(X, den, "math")
        for xv in grid:
            if abs(d(xv)) < 1e-12:
                raise SingularInterval(f"denominator vanishes near x = {xv}")
    return Expr(kernel._nf_tree(num1 / den)), Expr(kernel._nf_tree(num2 / den))


# -- plane geometry ------------------------------------------------------------


@dataclass(frozen=True)
class PlanePair:
    """F1 = c1*chi1 + c2*chi2 + c3 and F2 = c1*chi2 - c2*chi1 + c4."""

    c1: Fraction
    c2: Fraction
    c3: Fraction
    c4: Fraction

    @property
    def n1(self) -> tuple:
        return (self.c1, self.c2)

    @property
    def n2(self) -> tuple:
        return (self.c2, -self.c1)

    @property
    def dot(self):
        return self.n1[0] * self.n2[0] + self.n1[1] * self.n2[1]

    def F1(self, chi1, chi2):
        return self.c1 * chi1 + self.c2 * chi2 + self.c3

    def F2(self, chi1, chi2):
        return self.c1 * chi2 - self.c2 * chi1 + self.c4

    def symbolic(self) -> tuple[Expr, Expr]:
        chi1, chi2 = kernel.param("chi1"), kernel.param("chi2")
        c = [sp.nsimplify(v) if not isinstance(v, sp.Basic) else v for v in (self.c1, self.c2, self.c3, self.c4)]
        return Expr(c[0] * chi1 + c[1] * chi2 + c[2]), Expr(c[0] * chi2 - c[1] * chi1 + c[3])

    def line_direction(self) -> tuple:
        """Direction of the intersection of the two graphs in (chi1, chi2, value)."""
        p = (self.c1, self.c2, -1)
        q = (-self.c2, self.c1, -1)
        return (
            p[1] * q[2] - p[2] * q[1],
            p[2] * q[0] - p[0] * q[2],
            p[0] * q[1] - p[1] * q[0],
        )

    def line_point(self) -> tuple:
        """A point where both graphs meet, (chi1, chi2, value)."""
        # (c1 + c2) chi1 + (c2 - c1) chi2 = c4 - c3
        a, b, r = self.c1 + self.c2, self.c2 - self.c1, self.c4 - self.c3
        if a != 0:
            chi1, chi2 = Fraction(r) / a, Fraction(0)
        else:
            chi1, chi2 = Fraction(0), Fraction(r) / b
        return (chi1, chi2, self.F1(chi1, chi2))

    def samples(self, extent: float = 1.0, n: int = 11) -> list[tuple[str, float, float, float]]:
        rows = []
        step = 2 * extent / (n - 1)
        for i in range(n):
            for j in range(n):
                c1v, c2v = -extent + i * step, -extent + j * step
                rows.append(("F1", c1v, c2v, float(self.F1(c1v, c2v))))
                rows.append(("F2", c1v, c2v, float(self.F2(c1v, c2v))))
        p, d = self.line_point(), self.line_direction()
        norm = max(abs(float(v)) for v in d)
        for k in range(n):
            s = (-extent + k * step) / norm
            rows.append(("line", float(p[0]) + s * float(d[0]), float(p[1]) + s * float(d[1]), float(p[2]) + s * float(d[2])))
        return rows

    def to_csv(self, extent: float = 1.0, n: int = 11) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["surface-id", "chi1", "chi2", "value"])
        for row in self.samples(extent, n):
            w.writerow([row[0], *(repr(round(v, 12)) for v in row[1:])])
        w.writerow(["dot", "", "", str(self.dot)])
        return buf.getvalue()


def plane_geometry(c1, c2, c3=0, c4=0) -> PlanePair:
    """Plane pair of the realified free-particle solution; exact arithmetic."""
    c = [v if isinstance(v, sp.Basic) else Fraction(v) for v in (c1, c2, c3, c4)]
    if c[0] == 0 and c[1] == 0:
        raise ValueError("degenerate constants: c1 = c2 = 0")
    return PlanePair(*c)


def plane_pde_residuals(F1: Expr, F2: Expr) -> tuple[Expr, ...]:
    """Residuals of the realified ``U'' = 0`` PDE pair and the CR pair in (chi1, chi2)."""
    chi1, chi2 = kernel.param("chi1"), kernel.param("chi2")
    f1, f2 = F1.tree, F2.tree
    d = sp.diff
    lin1 = d(f1, chi1, 2) - d(f1, chi2, 2) + 2 * d(f2, chi1, chi2)
    lin2 = d(f2, chi1, 2) - d(f2, chi2, 2) - 2 * d(f1, chi1, chi2)
    cr1 = d(f1, chi1) - d(f2, chi2)
    cr2 = d(f1, chi2) + d(f2, chi1)
    return tuple(kernel.normal_form(Expr(r)) for r in (lin1, lin2, cr1, cr2))


def emden_plane_identity(a1=None, a2=None, b1=None, b2=None) -> tuple[Expr, Expr]:
    """Realified Emden transform evaluated on the closed-form solution, minus the plane pair.

    Both entries normal-equal zero: along every solution ``F1`` and ``F2`` are
    the planes ``a1*chi1 - a2*chi2 + b1`` and ``a2*chi1 + a1*chi2 + b2``.
    """
    a1, a2, b1, b2 = (kernel.param(n) if v is None else sp.nsimplify(v)
                      for n, v in zip(("a1", "a2", "b1", "b2"), (a1, a2, b1, b2)))
    f1, f2 = emden_solve(a1, a2, b1, b2)
    chi1, chi2, F1_, F2_ = (c.tree for c in emden_transform().realified())
    on = {kernel.F1: f1.tree, kernel.F2: f2.tree}
    chi1, chi2, F1_, F2_ = (t.xreplace(on) for t in (chi1, chi2, F1_, F2_))
    r1 = F1_ - (a1 * chi1 - a2 * chi2 + b1)
    r2 = F2_ - (a2 * chi1 + a1 * chi2 + b2)
    # the expanded numerator decides; a full normal form is needlessly slow here
    return tuple(Expr(sp.expand(sp.fraction(sp.together(r))[0])) for r in (r1, r2))


def transform_cr_residuals(t: PointTransform) -> tuple[Expr, ...]:
    """CR pairs of the realified components in (f1, f2) at fixed x.

    All four vanish for a transformation analytic in u, which is what lets
    the linear target be read as a pair of real PDEs.
    """
    chi1, chi2, F1_, F2_ = (c.tree for c in t.realified())
    d = sp.diff
    out = []
    for re, im in ((chi1, chi2), (F1_, F2_)):
        out.append(d(re, kernel.F1) - d(im, kernel.F2))
        out.append(d(re, kernel.F2) + d(im, kernel.F1))
    return tuple(kernel.normal_form(Expr(r)) for r in out)

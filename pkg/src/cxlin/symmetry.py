"""Lie point symmetries of second-order systems.

Generators are ``xi d/dx + eta1 d/df1 + eta2 d/df2`` with components in
``(x, f1, f2)``. The search sets each component to a generic polynomial of
bounded total degree, so a returned dimension certifies a lower bound and
"no further polynomial symmetries up to the bound", not maximality.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import sympy as sp

from . import kernel, linalg
from .complexify import ODESystem
from .kernel import F1, F1P, F2, F2P, X, Expr

__all__ = [
    "VectorField",
    "SymmetryBasis",
    "AnsatzOverflow",
    "prolong2_apply",
    "find_symmetries",
    "commutator",
    "structure_constants",
    "in_span",
]

F1PP = sp.Symbol("f1pp", real=True)
F2PP = sp.Symbol("f2pp", real=True)
_BASE = (X, F1, F2)
_JET_VARS = (X, F1, F2, F1P, F2P)


class AnsatzOverflow(RuntimeError):
    pass


@dataclass(frozen=True)
class VectorField:
    xi: Expr = field(default_factory=lambda: Expr(0))
    eta1: Expr = field(default_factory=lambda: Expr(0))
    eta2: Expr = field(default_factory=lambda: Expr(0))

    def __post_init__(self):
        for comp in self.components:
            if comp.tree.has(F1P, F2P):
                raise ValueError("vector field components may not depend on derivatives")

    @property
    def components(self) -> tuple[Expr, Expr, Expr]:
        return (self.xi, self.eta1, self.eta2)

    def apply(self, g: Expr) -> Expr:
        """Action as a derivation on functions of (x, f1, f2)."""
        t = g.tree
        return Expr(self.xi.tree * sp.diff(t, X) + self.eta1.tree * sp.diff(t, F1) + self.eta2.tree * sp.diff(t, F2))

    def is_zero(self) -> bool:
        return all(sp.expand(c.tree) == 0 for c in self.components)

    def scaled(self, k) -> "VectorField":
        return VectorField(*(Expr(sp.expand(k * c.tree)) for c in self.components))

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(*(Expr(sp.expand(a.tree + b.tree)) for a, b in zip(self.components, other.components)))

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + other.scaled(-1)

    def __str__(self):
        out = ""
        for comp, d in zip(self.components, ("d/dx", "d/df1", "d/df2")):
            if sp.expand(comp.tree) == 0:
                continue
            s = str(kernel.normal_form(comp))
            neg = s.startswith("-") and not any(ch in s[1:] for ch in " +-/")
            if neg:
                s = s[1:]
            term = d if s == "1" else f"{s}*{d}" if not any(ch in s for ch in " +-/") else f"({s})*{d}"
            if not out:
                out = ("-" if neg else "") + term
            else:
                out += (" - " if neg else " + ") + term
        return out or "0"

    def coefficients(self) -> dict:
        """Monomial coefficients keyed by (component, exponent tuple)."""
        out = {}
        for k, comp in enumerate(self.components):
            poly = sp.Poly(sp.expand(comp.tree), *_BASE)
            for mon, c in poly.terms():
                out[(k, mon)] = Fraction(int(c.p), int(c.q))
        return out


def commutator(a: VectorField, b: VectorField) -> VectorField:
    """Lie bracket ``[a, b] = a(b) - b(a)`` componentwise."""
    comps = [
        Expr(sp.expand(a.apply(cb).tree - b.apply(ca).tree))
        for ca, cb in zip(a.components, b.components)
    ]
    return VectorField(*comps)


# -- prolongation --------------------------------------------------------------


def _total_derivative(expr, on_shell=None):
    """D_x on expressions in (x, f, f', f'') with f'' left symbolic."""
    d = sp.diff(expr, X) + F1P * sp.diff(expr, F1) + F2P * sp.diff(expr, F2)
    d += F1PP * sp.diff(expr, F1P) + F2PP * sp.diff(expr, F2P)
    return d


def prolong2_apply(v: VectorField, s: ODESystem) -> tuple[Expr, Expr]:
    """On-shell defects of the second prolongation of ``v`` on the system.

    Both entries vanish identically exactly when ``v`` is a point symmetry.
    """
    xi, eta1, eta2 = (c.tree for c in v.components)
    w = (s.omega1.tree, s.omega2.tree)
    dxi = _total_derivative(xi)
    eta1_1 = _total_derivative(eta1) - F1P * dxi
    eta2_1 = _total_derivative(eta2) - F2P * dxi
    eta1_2 = _total_derivative(eta1_1) - F1PP * dxi
    eta2_2 = _total_derivative(eta2_1) - F2PP * dxi
    shell = {F1PP: w[0], F2PP: w[1]}
    out = []
    for second, wi in ((eta1_2, w[0]), (eta2_2, w[1])):
        action = (
            second
            - xi * sp.diff(wi, X)
            - eta1 * sp.diff(wi, F1)
            - eta2 * sp.diff(wi, F2)
            - eta1_1 * sp.diff(wi, F1P)
            - eta2_1 * sp.diff(wi, F2P)
        )
        out.append(kernel.normal_form(Expr(action.xreplace(shell))))
    return out[0], out[1]


# -- determining equations ---------------------------------------------------



def _multi_indices(max_order: int = 2) -> list[tuple[int, int, int]]:
    out = []
    for k in range(max_order + 1):
        for m in itertools.product(range(k + 1), repeat=3):
            if sum(m) == k:
                out.append(m)
    return out


_ALPHAS = _multi_indices(2)


def _jet(c: int, alpha: tuple[int, int, int]) -> sp.Symbol:
    return sp.Symbol(f"J{c}_{alpha[0]}{alpha[1]}{alpha[2]}", real=True)


def _jet_total_derivative(expr):
    """D_x where jets J_c,alpha stand for d^alpha of component c."""
    d = _total_derivative(expr)
    for c in range(3):
        for alpha in _ALPHAS:
            sym = _jet(c, alpha)
            if not expr.has(sym):
                continue
            coeff = sp.diff(expr, sym)
            if sum(alpha) >= 2:
                raise AssertionError("jet order exceeded")
            step = [list(alpha) for _ in range(3)]
            for k in range(3):
                step[k][k] += 1
            d += coeff * (
                _jet(c, tuple(step[0])) + F1P * _jet(c, tuple(step[1])) + F2P * _jet(c, tuple(step[2]))
            )
    return d


@dataclass(frozen=True)
class _DeterminingTable:
    """Defect numerators as linear forms in the component jets."""

    coeffs: tuple  # per equation: {(c, alpha): sympy Poly in _JET_VARS}


def _determining_table(s: ODESystem) -> _DeterminingTable:
    xi, eta1, eta2 = (_jet(c, (0, 0, 0)) for c in range(3))
    w = (s.omega1.tree, s.omega2.tree)
    dxi = _jet_total_derivative(xi)
    eta1_1 = _jet_total_derivative(eta1) - F1P * dxi
    eta2_1 = _jet_total_derivative(eta2) - F2P * dxi
    eta1_2 = _jet_total_derivative(eta1_1) - F1PP * dxi
    eta2_2 = _jet_total_derivative(eta2_1) - F2PP * dxi
    shell = {F1PP: w[0], F2PP: w[1]}
    tables = []
    for second, wi in ((eta1_2, w[0]), (eta2_2, w[1])):
        action = (
            second
            - xi * sp.diff(wi, X)
            - eta1 * sp.diff(wi, F1)
            - eta2 * sp.diff(wi, F2)
            - eta1_1 * sp.diff(wi, F1P)
            - eta2_1 * sp.diff(wi, F2P)
        ).xreplace(shell)
        action = sp.expand(action)
        parts = {}
        for c in range(3):
            for alpha in _ALPHAS:
                k = sp.cancel(sp.together(action.coeff(_jet(c, alpha))))
                if k != 0:
                    parts[(c, alpha)] = k
        den = sp.Integer(1)
        for k in parts.values():
            den = sp.lcm(den, sp.fraction(k)[1])
        polys = {}
        for key, k in parts.items():
            num = sp.cancel(k * den)
            polys[key] = sp.Poly(num, *_JET_VARS, domain="QQ")
        tables.append(polys)
    return _DeterminingTable(tuple(tables))


def _monomials(degree: int) -> list[tuple[int, int, int]]:
    mons = []
    for d in range(degree + 1):
        for m in itertools.product(range(d + 1), repeat=3):
            if sum(m) == d:
                mons.append(m)
    return mons


def _derive_monomial(mon, alpha):
    coeff = 1
    out = []
    for e, a in zip(mon, alpha):
        if a > e:
            return 0, None
        for k in range(a):
            coeff *= e - k
        out.append(e - a)
    return coeff, tuple(out)


@dataclass
class SymmetryBasis:
    dimension: int
    basis: list[VectorField]
    structure_constants: list | None
    degree: int
    caveat: str = (
        "dimension is certified within the polynomial ansatz only; "
        "symmetries with non-polynomial or higher-degree components are not excluded"
    )


def find_symmetries(s: ODESystem, degree: int = 3, *, max_unknowns: int = 400) -> SymmetryBasis:
    """Point symmetries with polynomial components of total degree <= ``degree``."""
    if degree < 0:
        raise ValueError("degree must be non-negative")
    mons = _monomials(degree)
    unknowns = [(c, m) for c in range(3) for m in mons]
    if len(unknowns) > max_unknowns:
        raise AnsatzOverflow(f"{len(unknowns)} unknowns exceed the bound {max_unknowns}")
    table = _determining_table(s)
    rows: dict[tuple, dict[int, Fraction]] = {}
    for eq, polys in enumerate(table.coeffs):
        for col, (c, mon) in enumerate(unknowns):
            for (cc, alpha), poly in polys.items():
                if cc != c:
                    continue
                k, dmon = _derive_monomial(mon, alpha)
                if not k:
                    continue
                for pmon, coeff in poly.terms():
                    key = (eq, pmon[0] + dmon[0], pmon[1] + dmon[1], pmon[2] + dmon[2], pmon[3], pmon[4])
                    row = rows.setdefault(key, {})
                    row[col] = row.get(col, 0) + Fraction(int(coeff.p), int(coeff.q)) * k
    ech = linalg.RowEchelon(len(unknowns))
    for key in sorted(rows):
        row = {c: v for c, v in rows[key].items() if v}
        if row:
            ech.add(row)
    basis = []
    for vec in ech.nullspace():
        comps = [sp.Integer(0)] * 3
        for (c, mon), v in zip(unknowns, vec):
            if v:
                comps[c] += sp.Rational(v.numerator, v.denominator) * X ** mon[0] * F1 ** mon[1] * F2 ** mon[2]
        basis.append(VectorField(*(Expr(sp.expand(t)) for t in comps)))
    basis = _tidy(basis)
    return SymmetryBasis(len(basis), basis, structure_constants(basis), degree)


def _tidy(basis: list[VectorField]) -> list[VectorField]:
    """Order generators by degree, simplest first; span is unchanged."""

    def key(v):
        degs = [sp.Poly(c.tree, *_BASE).total_degree() if sp.expand(c.tree) != 0 else -1 for c in v.components]
        return (max(degs), str(v))

    return sorted(basis, key=key)


def in_span(v: VectorField, basis: list[VectorField]):
    """Rational coefficients expressing ``v`` in ``basis``, or ``None``."""
    return linalg.solve([b.coefficients() for b in basis], v.coefficients())


def structure_constants(basis: list[VectorField]):
    """``C[a][b][c]`` with ``[X_a, X_b] = sum_c C[a][b][c] X_c``; ``None`` if not closed."""
    n = len(basis)
    cols = [b.coefficients() for b in basis]
    table = [[[Fraction(0)] * n for _ in range(n)] for _ in range(n)]
    for a in range(n):
        for b in range(a + 1, n):
            br = commutator(basis[a], basis[b])
            coeffs = linalg.solve(cols, br.coefficients())
            if coeffs is None:
                return None
            for c in range(n):
                table[a][b][c] = coeffs[c]
                table[b][a][c] = -coeffs[c]
    return table

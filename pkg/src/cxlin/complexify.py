"""Cauchy-Riemann gate, lift to a complex scalar ODE, and realification."""

from __future__ import annotations

from dataclasses import dataclass

import sympy as sp

from . import kernel
from .kernel import F1, F1P, F2, F2P, UP, U_, CScalar, Expr, SliceSingularError

__all__ = ["ODESystem", "ComplexODE", "CRResult", "check_cr", "lift", "realify"]


@dataclass(frozen=True)
class ODESystem:
    """``f1'' = omega1``, ``f2'' = omega2``."""

    omega1: Expr
    omega2: Expr

    def __post_init__(self):
        allowed = set(kernel.SYSTEM_VARS)
        for w in (self.omega1, self.omega2):
            extra = {n for n in w.free_names if n not in allowed and not _is_param(w, n)}
            if extra:
                raise ValueError(f"system right-hand sides use foreign variables {sorted(extra)}")

    def __iter__(self):
        return iter((self.omega1, self.omega2))

    def conjugated(self) -> "ODESystem":
        """Flip the sign of f2 and f2' in omega2 (the conjugation probe)."""
        flip = {"f2": -Expr.var("f2"), "f2p": -Expr.var("f2p")}
        return ODESystem(self.omega1, kernel.substitute(self.omega2, flip))


def _is_param(e: Expr, name: str) -> bool:
    sym = next(s for s in e.tree.free_symbols if s.name == name)
    return sym.is_real is True and name not in kernel.COMPLEX_VARS


@dataclass(frozen=True)
class ComplexODE:
    """``u'' = omega(x, u, u')``."""

    omega: CScalar

    def __str__(self):
        return f"u'' = {self.omega}"


@dataclass(frozen=True)
class CRResult:
    status: str  # "pass" | "fail" | "undecided"
    witness: Expr | None = None
    condition: str | None = None

    @property
    def passed(self) -> bool:
        return self.status == "pass"


_CR_CONDITIONS = (
    ("omega1_f1 - omega2_f2", "f1", "f2", -1),
    ("omega1_f2 + omega2_f1", "f2", "f1", 1),
    ("omega1_f1p - omega2_f2p", "f1p", "f2p", -1),
    ("omega1_f2p + omega2_f1p", "f2p", "f1p", 1),
)


def check_cr(s: ODESystem, *, seed: int = 0) -> CRResult:
    """Test the four Cauchy-Riemann conditions on (omega1, omega2).

    On failure the first nonvanishing difference is returned as witness.
    """
    undecided = None
    for label, v1, v2, sign in _CR_CONDITIONS:
        diff = kernel.differentiate(s.omega1, v1) + sign * kernel.differentiate(s.omega2, v2)
        verdict = kernel.is_zero(diff, seed=seed)
        if verdict is False:
            return CRResult("fail", kernel.normal_form(diff), label)
        if verdict is None and undecided is None:
            undecided = CRResult("undecided", kernel.normal_form(diff), label)
    return undecided or CRResult("pass")


_SLICE = {"f1": U_, "f1p": UP, "f2": 0, "f2p": 0}


def _slice(e: Expr) -> sp.Expr:
    try:
        return kernel.substitute(CScalar(e.tree), _SLICE).tree
    except SliceSingularError:
        pass
    # shifted slice f2 -> eps, then eps -> 0
    eps = sp.Symbol("eps", positive=True)
    shifted = kernel._nf_tree(e.tree.xreplace({F1: U_, F1P: UP, F2: eps, F2P: 0}))
    limit = sp.limit(shifted, eps, 0)
    if limit.has(sp.oo, -sp.oo, sp.zoo, sp.nan, sp.Limit):
        raise SliceSingularError("real slice f2 = f2' = 0 is singular and has no limit")
    return kernel._nf_tree(limit)


def lift(s: ODESystem, *, check: bool = True, seed: int = 0) -> ComplexODE:
    """Project a CR-compatible system to ``u'' = omega1 + i*omega2`` on the real slice."""
    if check:
        cr = check_cr(s, seed=seed)
        if not cr.passed:
            raise ValueError(f"system is not CR-compatible ({cr.status}: {cr.condition})")
    tree = _slice(s.omega1) + sp.I * _slice(s.omega2)
    return ComplexODE(CScalar(kernel._nf_tree(tree)))


def realify(c, as_vars=("f1", "f2")) -> tuple[Expr, Expr]:
    """Split a complex expression (or ComplexODE) into (Re, Im) under u = f1 + i*f2."""
    if tuple(as_vars) != ("f1", "f2"):
        raise ValueError("only the (f1, f2) split is supported")
    if isinstance(c, ComplexODE):
        c = c.omega
    return kernel.realify_parts(c)


def system_from_complex(c: ComplexODE | CScalar) -> ODESystem:
    return ODESystem(*realify(c))

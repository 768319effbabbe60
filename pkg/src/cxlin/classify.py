"""Cubic structure, the E3-family criterion, and the two-class split.

The base equation is stored as ``u'' + E3 u'^3 + E2 u'^2 + E1 u' + E0 = 0``,
so the lifted right-hand side is negated when it is folded in.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import sympy as sp

from . import kernel
from .complexify import ComplexODE, ODESystem, check_cr, lift
from .kernel import UP, CScalar, Expr

__all__ = [
    "NotCubic",
    "CubicForm",
    "Classification",
    "extract_cubic",
    "criterion_e3",
    "classify",
]

UPSILON1 = "Υ1"
UPSILON2 = "Υ2"
UPSILON1_CANDIDATE = "Υ1-candidate"


class NotCubic(ValueError):
    pass


@dataclass(frozen=True)
class CubicForm:
    E0: CScalar
    E1: CScalar
    E2: CScalar
    E3: CScalar

    @property
    def coefficients(self) -> tuple[CScalar, CScalar, CScalar, CScalar]:
        return (self.E0, self.E1, self.E2, self.E3)

    def omega(self) -> CScalar:
        """Right-hand side ``-(E3 u'^3 + E2 u'^2 + E1 u' + E0)``."""
        up = CScalar(UP)
        return -(self.E3 * up**3 + self.E2 * up**2 + self.E1 * up + self.E0)

    def zero_pattern(self, seed: int = 0) -> tuple:
        return tuple(kernel.is_zero(e, seed=seed) for e in self.coefficients)

    def real_coefficients(self) -> dict[str, Expr]:
        """A1, A2, B1, B2, C1, C2, D1, D2 of the real cubic system.

        ``A = -E3``, ``B = -E2``, ``C = -E1``, ``D = -E0`` split under
        ``u = f1 + i f2``.
        """
        out = {}
        for letter, e in zip("DCBA", self.coefficients):
            re, im = kernel.realify_parts(-e)
            out[f"{letter}1"] = re
            out[f"{letter}2"] = im
        return dict(sorted(out.items()))

    def __str__(self):
        return ", ".join(f"E{k} = {e}" for k, e in enumerate(self.coefficients))


def extract_cubic(c: ComplexODE) -> CubicForm:
    """Collect omega as a polynomial of degree <= 3 in u'."""
    tree = kernel._nf_tree(c.omega.tree)
    num, den = sp.fraction(tree)
    if den.has(UP):
        raise NotCubic("omega has u' in a denominator")
    poly = sp.expand(num).as_poly(UP)
    if poly is None:
        raise NotCubic("omega is not polynomial in u'")
    if poly.degree() > 3:
        raise NotCubic(f"omega has degree {poly.degree()} in u'")
    coeffs = [sp.Integer(0)] * 4
    for (k,), coeff in poly.terms():
        if coeff.has(UP):
            raise NotCubic("coefficients depend on u'")
        coeffs[k] = coeff
    es = [CScalar(kernel._nf_tree(-k / den)) for k in coeffs]
    return CubicForm(*es)


def criterion_e3(f: CubicForm, *, seed: int = 0) -> str:
    """``"pass"``, ``"fail"``, ``"not-applicable"`` or ``"undecided"``.

    Applies only when E0 = E1 = E2 = 0; then linearizability is equivalent
    to E3 being (at most) linear in x.
    """
    lower = [kernel.is_zero(e, seed=seed) for e in (f.E0, f.E1, f.E2)]
    if any(v is False for v in lower):
        return "not-applicable"
    if any(v is None for v in lower):
        return "undecided"
    second = kernel.differentiate(kernel.differentiate(f.E3, "x"), "x")
    verdict = kernel.is_zero(second, seed=seed)
    if verdict is None:
        return "undecided"
    return "pass" if verdict else "fail"


@dataclass
class Classification:
    cr_ok: bool | None
    cubic_ok: bool
    family: str  # "E3-only" | "quadratic" | "general-cubic" | "non-cubic"
    class_: str  # "Υ1" | "Υ1-candidate" | "Υ2" | "outside" | "undecided"
    criterion_ok: bool | None = None
    linear_target: str | None = None
    base: ComplexODE | None = None
    cubic: CubicForm | None = None
    cr_witness: str | None = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "cr_ok": self.cr_ok,
            "cubic_ok": self.cubic_ok,
            "family": self.family,
            "class": self.class_,
            "criterion_ok": self.criterion_ok,
            "linear_target": self.linear_target,
            "notes": list(self.notes),
        }


def classify(s: ODESystem | ComplexODE, *, seed: int = 0) -> Classification:
    """Run the CR gate, lift, cubic extraction and criterion; assign a class."""
    if isinstance(s, ComplexODE):
        base = s
        cr_ok = True
    else:
        cr = check_cr(s, seed=seed)
        if cr.status == "fail":
            return Classification(False, False, "non-cubic", "outside", cr_witness=str(cr.witness),
                                  notes=[f"CR condition {cr.condition} fails"])
        if cr.status == "undecided":
            return Classification(None, False, "non-cubic", "undecided", cr_witness=str(cr.witness),
                                  notes=[f"CR condition {cr.condition} could not be decided"])
        base = lift(s, check=False)
        cr_ok = True
    try:
        form = extract_cubic(base)
    except NotCubic as err:
        return Classification(cr_ok, False, "non-cubic", "outside", base=base, notes=[str(err)])
    z0, z1, z2, z3 = form.zero_pattern(seed)
    if None in (z0, z1, z2, z3):
        return Classification(cr_ok, True, "general-cubic", "undecided", base=base, cubic=form,
                              notes=["a coefficient could not be zero-tested"])
    if z3:
        return Classification(
            cr_ok, True, "quadratic", UPSILON1_CANDIDATE, base=base, cubic=form,
            notes=["at most quadratic in u'; full linearization test for this class is out of scope"],
        )
    if not (z0 and z1 and z2):
        return Classification(
            cr_ok, True, "general-cubic", "undecided", base=base, cubic=form,
            notes=["cubic with lower-order terms; only the E3-only family is decided"],
        )
    verdict = criterion_e3(form, seed=seed)
    if verdict == "undecided":
        return Classification(cr_ok, True, "E3-only", "undecided", base=base, cubic=form,
                              notes=["E3_xx could not be zero-tested"])
    if verdict == "fail":
        return Classification(cr_ok, True, "E3-only", "outside", criterion_ok=False, base=base, cubic=form,
                              notes=["E3 is not linear in x: beta_xx = gamma_xx = 0 fails"])
    from .linearize import hodograph

    target = hodograph(form)
    return Classification(cr_ok, True, "E3-only", UPSILON2, criterion_ok=True, base=base, cubic=form,
                          linear_target=str(target))

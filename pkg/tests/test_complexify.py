import pytest
import sympy

from cxlin import corpus
from cxlin.complexify import ComplexODE, ODESystem, check_cr, lift, realify, system_from_complex
from cxlin.kernel import CScalar, Expr, is_zero
from cxlin.parser import parse_expr

SYSTEMS = ("sys3", "sys4", "sys5", "sys6", "sys7", "sys8", "sys1", "sys8_lifted")

BASES = {
    "sys3": "u'^3",
    "sys4": "x*u'^3",
    "sys5": "u*u'^3",
    "sys6": "x*u*u'^3",
    "sys7": "-3*u*u' - u^3",
    "sys1": "u'/u^2",
    "sys8_lifted": "x*u^2*u'^3",
}


def _system(name):
    return corpus.load(name).equation()


@pytest.mark.parametrize("name", SYSTEMS)
def test_corpus_passes_cr(name):
    assert check_cr(_system(name)).status == "pass"


def test_conjugate_pair_fails_with_witness():
    res = check_cr(_system("conjugate"))
    assert res.status == "fail"
    assert str(res.witness) == "2"
    assert res.condition == "omega1_f1 - omega2_f2"


@pytest.mark.parametrize("name, text", sorted(BASES.items()))
def test_lifted_base_equation(name, text):
    base = lift(_system(name))
    assert is_zero(base.omega - parse_expr(text, "scalar")) is True


@pytest.mark.parametrize("name", SYSTEMS)
def test_realify_lift_round_trip(name):
    s = _system(name)
    r1, r2 = realify(lift(s))
    assert is_zero(r1 - s.omega1) is True
    assert is_zero(r2 - s.omega2) is True


def test_sys6_realified_first_component():
    u, up, x = CScalar.var("u"), CScalar.var("up"), CScalar.var("x")
    w1, _ = realify(x * u * up**3)
    printed = parse_expr("x*f1*f1'^3 - 3*x*f2*f1'^2*f2' - 3*x*f1*f1'*f2'^2 + x*f2*f2'^3")
    assert is_zero(w1 - printed) is True


@pytest.mark.parametrize("name", ("sys3", "sys4", "sys5", "sys6", "sys7", "sys1"))
def test_conjugation_breaks_cr(name):
    assert check_cr(_system(name).conjugated()).status == "fail"


def test_sum_of_cr_systems_passes():
    a, b = _system("sys3"), _system("sys7")
    total = ODESystem(a.omega1 + b.omega1, a.omega2 + b.omega2)
    assert check_cr(total).passed
    u = CScalar.var("u")
    h = system_from_complex(ComplexODE(u.apply("exp") * CScalar.var("x")))
    assert check_cr(ODESystem(total.omega1 + h.omega1, total.omega2 + h.omega2)).passed


def test_lift_refuses_cr_failure():
    with pytest.raises(ValueError):
        lift(_system("conjugate"))


def test_foreign_variable_rejected():
    with pytest.raises(ValueError):
        ODESystem(Expr.var("f1"), Expr(sympy.Symbol("q")))

import math

import pytest

from cxlin.complexify import ComplexODE, lift
from cxlin.g2 import (
    FirstOrderODE,
    NoCatalogMatch,
    NotAutonomous,
    worked_pair,
    worked_points,
    back_substitute,
    implicit_residual,
    match_canonical,
    reduce_autonomous,
    reduction_sign_check,
    solve_first_order_catalog,
)
from cxlin.g2 import pair_values
from cxlin.kernel import CHI, U_, CScalar, cparam, differentiate, is_zero, normal_form
from cxlin.parser import parse_expr

C1, C2 = 2.0, 0.3


def base(text):
    return ComplexODE(parse_expr(text, "scalar"))


@pytest.mark.parametrize(
    "text, tag",
    [
        ("u'^3", "I"),
        ("sin(x)", "II"),
        ("u'^2/x", "III"),
        ("u'*x^2", "IV"),
        ("u'/u^2", "none"),
    ],
)
def test_canonical_types(text, tag):
    assert match_canonical(base(text)).tag == tag


@pytest.mark.parametrize("text", ["u'^3", "sin(x)", "u'^2/x", "u'*x^2", "u'/u^2", "x*u*u'^3"])
def test_canonical_stable_under_normal_form(text):
    c = base(text)
    assert match_canonical(c).tag == match_canonical(ComplexODE(normal_form(c.omega))).tag


def test_reduction_of_the_worked_example():
    red = reduce_autonomous(base("u'/u^2"))
    assert str(red.computed) == "U' = -U^2/chi^2"
    assert str(red.stated_sign) == "U' = U^2/chi^2"


@pytest.mark.parametrize("text", ["u'/u^2", "u'^3", "u*u'^3", "-3*u*u' - u^3", "u'^2 + u"])
def test_unreduce_recovers_omega(text):
    c = base(text)
    assert is_zero(reduce_autonomous(c).unreduce() - c.omega) is True


def test_reduce_needs_autonomy():
    with pytest.raises(NotAutonomous):
        reduce_autonomous(base("x*u'^3"))


def test_catalog_examples():
    zero = solve_first_order_catalog(FirstOrderODE(parse_expr("0", "target")))
    c = CScalar(cparam("C"))
    assert is_zero(zero.relation - (parse_expr("U", "target") - c)) is True
    sq = solve_first_order_catalog(FirstOrderODE(parse_expr("U^2", "target")))
    assert is_zero(sq.relation - (parse_expr("-1/U - chi", "target") - c)) is True
    with pytest.raises(NoCatalogMatch):
        solve_first_order_catalog(FirstOrderODE(parse_expr("U + chi", "target")))


def test_back_substitution_of_the_worked_example():
    red = reduce_autonomous(base("u'/u^2"))
    sol = solve_first_order_catalog(red.computed)
    r = back_substitute(sol)
    # R = x - integral of U(u) du - K, so dR/du = -U(u) and R_x = 1
    big_u = CScalar(sol.U.tree.xreplace({CHI: U_}))
    assert is_zero(differentiate(r, "u") + big_u) is True
    assert is_zero(differentiate(r, "x") - 1) is True


@pytest.fixture(scope="module")
def sys1(load):
    return load("sys1")


def test_reduction_sign_against_trajectories(sys1):
    red = reduce_autonomous(lift(sys1))
    res = reduction_sign_check(sys1, red, (2.0, 0.5, 1.0, 0.3), (0.0, 1.0))
    assert res["computed"] < 1e-8
    assert res["printed"] > 0.1


@pytest.fixture(scope="module")
def points():
    return worked_points(C1, C2, [0.5 + k / 49 for k in range(50)], 1.0 - 2.5j, branch=1)


def test_points_are_off_axis(points):
    assert all(abs(f2) > 0.1 for _, _, f2 in points)


def test_derived_pair_vanishes_on_points(points):
    con = {"c1": C1, "c2": C2}
    g1, g2 = worked_pair("derived")
    # the arctan relation holds modulo pi
    vals = pair_values((g1, parse_expr("0")), points, con)
    assert vals < 1e-12
    import sympy

    from cxlin.kernel import F1, F2, X, param

    f = sympy.lambdify((X, F1, F2), g2.tree.xreplace({param("c1"): C1}))
    for p in points:
        v = f(*p)
        assert abs(v / math.pi - round(v / math.pi)) < 1e-12


def test_derived_pair_satisfies_system(sys1, points):
    assert implicit_residual(sys1, worked_pair("derived"), points, {"c1": C1, "c2": C2}) < 1e-7


def test_printed_pair_fails(sys1, points):
    r = implicit_residual(sys1, worked_pair("printed"), points, {"c1": C1, "c2": C2})
    assert r > 0.1


def test_printed_pair_fails_even_with_equal_constants(sys1):
    pts = worked_points(1.5, 1.5, [0.5 + k / 49 for k in range(50)], 1.0 - 2.5j, branch=1)
    assert implicit_residual(sys1, worked_pair("printed"), pts, {"c1": 1.5, "c2": 1.5}) > 0.1
    assert implicit_residual(sys1, worked_pair("derived"), pts, {"c1": 1.5, "c2": 1.5}) < 1e-7


def test_unknown_variant():
    with pytest.raises(ValueError):
        worked_pair("other")

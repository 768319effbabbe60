import math

import pytest
import sympy

from cxlin.complexify import ODESystem
from cxlin.kernel import CHI, Expr
from cxlin.linearize import emden_solve
from cxlin.numeric import (
    AnalyticFunction,
    CriticalPoint,
    GridSingular,
    PoleEncounter,
    StepUnderflow,
    airy_seeds,
    continue_analytic,
    integrate,
    lanczos_gamma,
    residual,
    trace_implicit,
)
from cxlin.parser import parse_expr

# reference values to 18 digits
GAMMA_13 = 2.678938534707747633
GAMMA_23 = 1.354117939426400417
AI0, AIP0 = 0.355028053887817239, -0.258819403792806798
BI0, BIP0 = 0.614926627446000736, 0.448288357353826357
AI1 = 0.135292416312881416
AI_M2 = 0.227407428201685575


def test_lanczos_pinned_values():
    assert abs(lanczos_gamma(1 / 3) / GAMMA_13 - 1) < 1e-12
    assert abs(lanczos_gamma(2 / 3) / GAMMA_23 - 1) < 1e-12
    assert abs(lanczos_gamma(5.0) - 24.0) < 1e-11
    assert abs(lanczos_gamma(0.5) - math.sqrt(math.pi)) < 1e-13


def test_airy_seeds():
    for got, want in zip(airy_seeds(), (AI0, AIP0, BI0, BIP0)):
        assert abs(got - want) < 1e-10


def _airy():
    ai0, aip0, _, _ = airy_seeds()
    # U'' = chi*U seeded with Ai
    return AnalyticFunction.from_polys(CHI, sympy.Integer(0), 0, ai0, aip0, CHI)


def test_taylor_airy_values():
    f = _airy()
    assert abs(f.evaluate(1.0)[0] - AI1) < 1e-12
    assert abs(f.evaluate(-2.0)[0] - AI_M2) < 1e-12


def test_taylor_sine():
    f = AnalyticFunction.from_polys(sympy.Integer(-1), sympy.Integer(0), 0, 0, 1, CHI)
    for z in (math.pi / 2, 1 + 1j, 3 - 2j):
        import cmath

        u, up = f.evaluate(z)
        assert abs(u - cmath.sin(z)) < 1e-11 * max(1, abs(cmath.sin(z)))
        assert abs(up - cmath.cos(z)) < 1e-11 * max(1, abs(cmath.cos(z)))


def test_taylor_path_independence():
    f = _airy()
    a = continue_analytic(f, [0, 2, 2 + 2j])
    b = continue_analytic(_airy(), [0, 2j, -1 + 2j, 2 + 2j])
    assert abs(a[0] - b[0]) < 1e-9 * max(1, abs(a[0]))
    assert abs(a[1] - b[1]) < 1e-9 * max(1, abs(a[1]))


def _emden_system():
    w1 = parse_expr("-3*f1*f1' + 3*f2*f2' - f1^3 + 3*f1*f2^2")
    w2 = parse_expr("-3*f2*f1' - 3*f1*f2' + f2^3 - 3*f1^2*f2")
    return ODESystem(w1, w2)


def _emden_exact(xs):
    f1, f2 = emden_solve(1, 2, 3, -1)
    X = sympy.Symbol("x", real=True)
    fs = [sympy.lambdify(X, e.tree) for e in (f1, f2)]
    ds = [sympy.lambdify(X, sympy.diff(e.tree, X)) for e in (f1, f2)]
    return fs, ds


def _sup_error(tol):
    s = _emden_system()
    fs, ds = _emden_exact(None)
    ic = (fs[0](1.0), fs[1](1.0), ds[0](1.0), ds[1](1.0))
    traj = integrate(s, ic, (1.0, 2.0), tol=tol)
    return max(max(abs(y[0] - fs[0](x)), abs(y[1] - fs[1](x))) for x, y in zip(traj.xs, traj.ys)), traj


def test_integrate_matches_closed_form():
    err, traj = _sup_error(1e-10)
    assert err < 1e-6
    assert traj.xs[-1] == 2.0
    assert all(e <= 1e-10 for e in traj.errors)


def test_integrate_error_tracks_tolerance():
    errs = [_sup_error(t)[0] for t in (1e-6, 1e-8, 1e-10)]
    assert errs[0] > errs[1] > errs[2]
    # a fifth-order pair: error shrinks roughly in proportion to tol
    assert errs[2] < 1e-3 * errs[0] * 10


def test_integrate_backwards_and_dense_output():
    s = ODESystem(parse_expr("-f1"), parse_expr("-f2"))
    traj = integrate(s, (0.0, 1.0, 1.0, 0.0), (0.0, -2.0), tol=1e-11)
    assert traj.xs[-1] == -2.0
    for x in (-0.3, -1.1, -1.9):
        f1, f2, _, _ = traj(x)
        assert abs(f1 - math.sin(x)) < 1e-8
        assert abs(f2 - math.cos(x)) < 1e-8
    assert traj.to_csv().splitlines()[0] == "x,f1,f2,f1p,f2p"


def test_integrate_pole():
    s = ODESystem(parse_expr("2*f1^3"), parse_expr("0"))
    with pytest.raises((PoleEncounter, StepUnderflow)):
        integrate(s, (1.0, 0.0, 1.0, 0.0), (0.0, 2.0))


def test_residual_paths_agree():
    s = _emden_system()
    f1, f2 = emden_solve(1, 2, 3, -1)
    grid = [1.0 + k / 99 for k in range(100)]
    assert residual(s, f1, f2, grid) < 1e-9
    X = sympy.Symbol("x", real=True)
    g1, g2 = (sympy.lambdify(X, e.tree) for e in (f1, f2))
    assert residual(s, g1, g2, grid) < 1e-6


def test_residual_singular_grid():
    s = ODESystem(parse_expr("0"), parse_expr("0"))
    with pytest.raises(GridSingular):
        residual(s, parse_expr("1/x"), Expr.const(0), [0.0, 1.0])


@pytest.fixture(scope="module")
def airy_curve():
    ai0, aip0, bi0, bip0 = airy_seeds()
    # U'' = -chi U, U = Ai(-chi)
    f = AnalyticFunction.from_polys(-CHI, sympy.Integer(0), 0, ai0, -aip0, CHI)
    return f, trace_implicit(f, 1.0188 + 0.45j, (0.6, 1.6))


def test_trace_stays_on_level_set(airy_curve):
    f, curve = airy_curve
    assert curve.xs[0] == 0.6 and curve.xs[-1] == 1.6
    for u, x in zip(curve.us, curve.xs):
        val = f.evaluate(u)[0]
        assert abs(val.imag) < 1e-10
        assert abs(val.real - x) < 1e-10


def test_trace_agrees_with_integration(airy_curve, load):
    _, curve = airy_curve
    s = load("sys6")
    u0, s0 = curve.us[0], curve.slopes[0]
    traj = integrate(s, (u0.real, u0.imag, s0.real, s0.imag), (0.6, 1.6), tol=1e-12)
    err = max(abs(complex(*traj(x)[:2]) - u) for x, u in zip(curve.xs, curve.us))
    assert err < 1e-5


def test_trace_reports_critical_point(airy_curve):
    f, _ = airy_curve
    with pytest.raises(CriticalPoint):
        trace_implicit(f, 1.0 + 0j, (0.6, 1.6))


def test_curve_at_hits_level(airy_curve):
    f, curve = airy_curve
    u, _ = curve.at(1.234)
    assert abs(f.evaluate(u)[0] - 1.234) < 1e-12

import pytest
from hypothesis import HealthCheck, given, settings

from cxlin import corpus
from cxlin.kernel import CScalar, Expr, is_zero, normal_form
from cxlin.parser import ParseError, parse_expr, parse_problem, print_expr

from strategies import expressions

SYS3 = "f1'' = f1'^3 - 3*f1'*f2'^2\nf2'' = 3*f1'^2*f2' - f2'^3"


def test_sys3_system():
    pf = parse_problem(SYS3)
    assert pf.scalar is None
    w1, w2 = pf.system
    assert print_expr(w1) == "f1'^3 - 3*f1'*f2'^2"
    assert print_expr(w2) == "3*f1'^2*f2' - f2'^3"


def test_scalar_equation():
    pf = parse_problem("u'' = x*u*u'^3")
    assert pf.system is None
    assert print_expr(pf.scalar) == "x*u*u'^3"


def test_dangling_operator():
    with pytest.raises(ParseError) as info:
        parse_problem("f1'' = +")
    assert info.value.line == 1
    assert info.value.column == 9


@pytest.mark.parametrize(
    "e, text",
    [
        (2 * Expr.var("f1"), "2*f1"),
        (-3 * CScalar.var("u") * CScalar.var("up") - CScalar.var("u") ** 3, "-3*u*u' - u^3"),
        (Expr.const(0), "0"),
    ],
)
def test_print_examples(e, text):
    assert print_expr(e) == text


@pytest.mark.parametrize(
    "text, expected",
    [
        ("2^3^2", "512"),
        ("-f1^2", "-f1^2"),
        ("(-f1)^2", "f1^2"),
        ("f1 - f2 - x", "-x + f1 - f2"),
        ("f1/f2/x", "f1/(x*f2)"),
    ],
)
def test_precedence(text, expected):
    assert print_expr(normal_form(parse_expr(text))) == expected


def test_folded_constants_print_in_grammar():
    e = Expr.const(1).apply("exp") * Expr.var("f1") + Expr.const(1).apply("arctan")
    assert is_zero(parse_expr(print_expr(e)) - e) is True


def test_imaginary_unit_only_in_complex_contexts():
    c = parse_expr("i*u", "scalar")
    assert isinstance(c, CScalar)
    with pytest.raises(ParseError):
        parse_expr("i*f1", "system")


@pytest.mark.parametrize(
    "text, line, column",
    [
        ("f1'' = 2x", 1, 9),
        ("f1'' = f1^0.5\nf2'' = 0", 1, 10),
        ("f1'' = u\nf2'' = 0", 1, 8),
        ("u'' = f1", 1, 7),
        ("name = a\nf1'' = (f1", 2, 11),
        ("f1'' = sinh(f1)\nf2'' = 0", 1, 8),
    ],
)
def test_positioned_errors(text, line, column):
    with pytest.raises(ParseError) as info:
        parse_problem(text)
    assert (info.value.line, info.value.column) == (line, column)


def test_error_lists_expected_tokens():
    with pytest.raises(ParseError) as info:
        parse_problem("f1'' = f1 +")
    assert info.value.expected


def test_system_needs_both_equations():
    with pytest.raises(ParseError):
        parse_problem("f1'' = f1").require_single()
    with pytest.raises(ParseError):
        parse_problem("# empty\n").require_single()


def test_declarations_and_options():
    pf = corpus.load("sys3")
    assert pf.name == "sys3"
    assert [g.name for g in pf.generators] == ["X1", "X2", "X3", "X4"]
    hodo = pf.transforms[0]
    assert print_expr(hodo.chi) == "u"
    assert print_expr(hodo.U) == "x"
    assert print_expr(hodo.target) == "-1"


@pytest.mark.parametrize("name", corpus.available())
def test_corpus_parses(name):
    pf = corpus.load(name)
    pf.require_single()


@settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(expressions(max_leaves=8))
def test_round_trip(e):
    back = parse_expr(print_expr(e))
    assert normal_form(back) == normal_form(e) or is_zero(back - e) is True

"""Random expression trees for property tests."""

from hypothesis import strategies as st

from cxlin.kernel import Expr, PoleError

VARS = ("x", "f1", "f2", "f1p", "f2p")


def _leaf():
    return st.one_of(
        st.sampled_from(VARS).map(Expr.var),
        st.integers(-5, 5).map(Expr.const),
        st.fractions(min_value=-3, max_value=3, max_denominator=7).map(Expr.const),
    )


def _combine(children):
    def build(args):
        op, a, b, n = args
        try:
            if op == "+":
                return a + b
            if op == "-":
                return a - b
            if op == "*":
                return a * b
            if op == "/":
                return a / b
            if op == "^":
                return a**n
            return a.apply(op)
        except PoleError:
            return a

    ops = st.sampled_from(["+", "-", "*", "/", "^", "sin", "cos", "exp"])
    return st.tuples(ops, children, children, st.integers(-2, 3)).map(build)


def expressions(max_leaves: int = 8):
    return st.recursive(_leaf(), _combine, max_leaves=max_leaves)


def _poly_combine(children):
    ops = st.sampled_from(["+", "-", "*"])

    def build(args):
        op, a, b = args
        return a + b if op == "+" else a - b if op == "-" else a * b

    return st.tuples(ops, children, children).map(build)


polynomials = st.recursive(
    st.one_of(
        st.sampled_from(VARS).map(Expr.var),
        st.fractions(min_value=-4, max_value=4, max_denominator=9).map(Expr.const),
    ),
    _poly_combine,
    max_leaves=10,
)

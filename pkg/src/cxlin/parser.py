"""Problem-file reader and expression printer.

A problem file is plain text, one statement per line, ``#`` starts a comment::

    name = sys3
    f1'' = f1'^3 - 3*f1'*f2'^2
    f2'' = 3*f1'^2*f2' - f2'^3
    generator X4: xi = 2*x, eta1 = f1, eta2 = f2
    transform hodo: chi = u, U = x
    target hodo: U'' = -1
    ansatz_degree = 3

Scalar problems use ``u'' = <expr>`` with ``u``, ``u'``, ``x`` and the
imaginary unit ``i``. Precedence is ``^`` > unary minus > ``* /`` > ``+ -``;
``^`` is right associative and takes integer exponents only.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import sympy as sp

from .kernel import (
    BIG_U,
    BIG_UP,
    CHI,
    F1,
    F1P,
    F2,
    F2P,
    UP,
    U_,
    X,
    CScalar,
    Expr,
    _FUNCS,
)

__all__ = [
    "ParseError",
    "ProblemFile",
    "GeneratorDecl",
    "TransformDecl",
    "parse_problem",
    "parse_expr",
    "print_expr",
    "OPTION_KEYS",
]

OPTION_KEYS = ("name", "ansatz_degree", "tol", "seed", "format")


class ParseError(Exception):
    """Syntax or semantic error with a 1-based source position."""

    def __init__(self, message: str, line: int, column: int, expected=()):
        self.line = line
        self.column = column
        self.expected = tuple(sorted(expected))
        where = f"line {line}, column {column}"
        hint = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{where}: {message}{hint}")


@dataclass(frozen=True)
class GeneratorDecl:
    name: str
    xi: Expr
    eta1: Expr
    eta2: Expr


@dataclass(frozen=True)
class TransformDecl:
    name: str
    chi: CScalar
    U: CScalar
    target: CScalar | None = None


@dataclass
class ProblemFile:
    system: tuple[Expr, Expr] | None = None
    scalar: CScalar | None = None
    generators: list[GeneratorDecl] = field(default_factory=list)
    transforms: list[TransformDecl] = field(default_factory=list)
    options: dict = field(default_factory=dict)

    @property
    def name(self) -> str | None:
        return self.options.get("name")

    def equation(self):
        """The declared equation as an ``ODESystem`` or ``ComplexODE``."""
        from .complexify import ComplexODE, ODESystem

        self.require_single()
        if self.system is not None:
            return ODESystem(*self.system)
        return ComplexODE(self.scalar)

    def require_single(self) -> None:
        if (self.system is None) == (self.scalar is None):
            raise ParseError("exactly one of a system or a scalar equation is required", 1, 1)


# -- lexer -------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)? | \.\d+(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*'*)
  | (?P<op>[-+*/^(),=:])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str, line: int, col0: int = 1) -> list[Token]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col0 + pos)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(Token(kind, m.group(), line, col0 + pos))
        pos = m.end()
    toks.append(Token("end", "", line, col0 + len(text)))
    return toks


# -- expression parser (precedence climbing) ---------------------------------

_CONTEXTS = {
    "system": {"x": X, "f1": F1, "f2": F2, "f1'": F1P, "f2'": F2P},
    "generator": {"x": X, "f1": F1, "f2": F2},
    "scalar": {"x": X, "u": U_, "u'": UP, "i": sp.I},
    "transform": {"x": X, "u": U_, "i": sp.I},
    "target": {"chi": CHI, "U": BIG_U, "U'": BIG_UP, "i": sp.I},
}

_ADD_OPS = {"+", "-"}
_MUL_OPS = {"*", "/"}


class _ExprParser:
    def __init__(self, tokens: list[Token], context: str):
        self.toks = tokens
        self.i = 0
        self.names = _CONTEXTS[context]
        self.context = context

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def advance(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if self.tok.text != text or self.tok.kind == "end":
            self.fail({repr(text)})
        return self.advance()

    def fail(self, expected, message=None):
        t = self.tok
        got = "end of line" if t.kind == "end" else repr(t.text)
        raise ParseError(message or f"unexpected {got}", t.line, t.col, expected)

    def parse(self, stop=("end",)) -> sp.Expr:
        e = self.sum()
        if self.tok.kind not in stop and self.tok.text not in stop:
            self.fail({"operator", *[s for s in stop if s != "end"], "end of line"})
        return e

    def sum(self):
        left = self.product()
        while self.tok.kind == "op" and self.tok.text in _ADD_OPS:
            op = self.advance().text
            right = self.product()
            left = left + right if op == "+" else left - right
        return left

    def product(self):
        left = self.unary()
        while self.tok.kind == "op" and self.tok.text in _MUL_OPS:
            op_tok = self.advance()
            right = self.unary()
            if op_tok.text == "*":
                left = left * right
            else:
                if right == 0:
                    raise ParseError("division by the zero constant", op_tok.line, op_tok.col)
                left = left / right
        return left

    def unary(self):
        if self.tok.kind == "op" and self.tok.text in ("-", "+"):
            op = self.advance().text
            operand = self.unary()
            return -operand if op == "-" else operand
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            caret = self.advance()
            ex = self.unary_exponent()
            if not ex.is_Integer:
                raise ParseError("exponents must be integers; use sqrt()", caret.line, caret.col)
            if ex < 0 and base == 0:
                raise ParseError("negative power of zero", caret.line, caret.col)
            return base ** ex
        return base

    def unary_exponent(self):
        if self.tok.kind == "op" and self.tok.text in ("-", "+"):
            op = self.advance().text
            inner = self.unary_exponent()
            return -inner if op == "-" else inner
        return self.power()

    def atom(self):
        t = self.tok
        if t.kind == "num":
            self.advance()
            return sp.Rational(Fraction(t.text))
        if t.kind == "ident":
            self.advance()
            if t.text in _FUNCS and self.tok.text == "(":
                self.advance()
                arg = self.sum()
                self.expect(")")
                return _FUNCS[t.text](arg)
            if t.text in self.names:
                return self.names[t.text]
            if t.text.rstrip("'") in _FUNCS:
                raise ParseError(f"function {t.text} needs an argument", t.line, t.col, {"'('"})
            raise ParseError(self._unknown(t.text), t.line, t.col, set(self.names))
        if t.kind == "op" and t.text == "(":
            self.advance()
            e = self.sum()
            self.expect(")")
            return e
        self.fail({"number", "identifier", "'('"})

    def _unknown(self, name: str) -> str:
        owners = [c for c, names in _CONTEXTS.items() if name in names]
        if name == "i":
            return "the imaginary unit i is only legal in scalar, transform and target statements"
        if owners:
            return f"{name} is not allowed in a {self.context} statement"
        return f"unknown identifier {name}"


def parse_expr(text: str, context: str = "system", line: int = 1, col0: int = 1):
    """Parse one expression; returns an :class:`Expr` or :class:`CScalar`."""
    tree = _ExprParser(_tokenize(text, line, col0), context).parse()
    return _wrap(tree, context)


def _wrap(tree, context):
    if context in ("system", "generator"):
        return Expr(tree)
    return CScalar(tree)


# -- statements --------------------------------------------------------------

_LHS = {"f1''": "f1", "f2''": "f2", "u''": "u"}


def _split_items(tokens: list[Token]) -> Iterator[tuple[str, list[Token]]]:
    """Split ``key = expr, key = expr`` into (key, expression tokens)."""
    depth = 0
    start = 0
    for k, t in enumerate(tokens):
        if t.text == "(":
            depth += 1
        elif t.text == ")":
            depth -= 1
        if (t.text == "," and depth == 0) or t.kind == "end":
            chunk = tokens[start:k]
            if len(chunk) < 3 or chunk[0].kind != "ident" or chunk[1].text != "=":
                where = chunk[0] if chunk else t
                raise ParseError("expected 'name = expression'", where.line, where.col, {"identifier"})
            end = Token("end", "", t.line, t.col)
            yield chunk[0].text, chunk[2:] + [end]
            start = k + 1


def _parse_tokens(toks: list[Token], context: str):
    return _wrap(_ExprParser(toks, context).parse(), context)


def parse_problem(text: str) -> ProblemFile:
    """Parse a whole problem file. Raises :class:`ParseError` on bad input."""
    pf = ProblemFile()
    eqs: dict[str, Expr] = {}
    targets: dict[str, CScalar] = {}
    transforms: dict[str, tuple[CScalar, CScalar, Token]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        toks = _tokenize(body, lineno)
        head = toks[0]
        if head.kind == "ident" and head.text in _LHS:
            if toks[1].text != "=":
                raise ParseError("expected '='", toks[1].line, toks[1].col, {"'='"})
            which = _LHS[head.text]
            ctx = "scalar" if which == "u" else "system"
            try:
                value = _parse_tokens(toks[2:], ctx)
            except ParseError as err:
                if which != "u" and _mentions(toks[2:], ("u", "u'")):
                    raise ParseError("u may not appear in a system equation", err.line, err.column) from None
                if which == "u" and _mentions(toks[2:], ("f1", "f2", "f1'", "f2'")):
                    raise ParseError("f1/f2 may not appear in a scalar equation", err.line, err.column) from None
                raise
            if which in eqs:
                raise ParseError(f"duplicate equation for {head.text}", head.line, head.col)
            eqs[which] = value
        elif head.kind == "ident" and head.text in ("generator", "transform", "target"):
            if toks[1].kind != "ident" or toks[2].text != ":":
                raise ParseError(f"expected '{head.text} NAME:'", toks[1].line, toks[1].col, {"identifier"})
            name = toks[1].text
            rest = toks[3:]
            if head.text == "target":
                if not rest or rest[0].text != "U''" or len(rest) < 2 or rest[1].text != "=":
                    t = rest[0] if rest else toks[-1]
                    raise ParseError("expected U'' = <expression>", t.line, t.col, {"U''"})
                targets[name] = _parse_tokens(rest[2:], "target")
                continue
            items = {}
            for key, etoks in _split_items(rest):
                items[key] = (etoks, key)
            if head.text == "generator":
                comps = {}
                for key in ("xi", "eta1", "eta2"):
                    comps[key] = _parse_tokens(items.pop(key)[0], "generator") if key in items else Expr(0)
                if items:
                    bad = next(iter(items.values()))[0][0]
                    raise ParseError("unknown generator component", bad.line, bad.col, {"xi", "eta1", "eta2"})
                pf.generators.append(GeneratorDecl(name, comps["xi"], comps["eta1"], comps["eta2"]))
            else:
                if set(items) != {"chi", "U"}:
                    raise ParseError("transform needs exactly chi = ... and U = ...", head.line, head.col, {"chi", "U"})
                chi = _parse_tokens(items["chi"][0], "transform")
                big_u = _parse_tokens(items["U"][0], "transform")
                transforms[name] = (chi, big_u, head)
        elif head.kind == "ident" and toks[1].text == "=":
            key = head.text
            if key not in OPTION_KEYS:
                raise ParseError(f"unknown statement {key!r}", head.line, head.col, set(OPTION_KEYS) | set(_LHS))
            pf.options[key] = _option_value(key, toks[2:])
        else:
            raise ParseError(
                "expected an equation, declaration or option",
                head.line,
                head.col,
                {"f1''", "f2''", "u''", "generator", "transform", "target", *OPTION_KEYS},
            )
    if "u" in eqs and ("f1" in eqs or "f2" in eqs):
        raise ParseError("a file holds either a system or a scalar equation, not both", 1, 1)
    if ("f1" in eqs) != ("f2" in eqs):
        raise ParseError("a system needs both f1'' and f2'' equations", 1, 1)
    if "f1" in eqs:
        pf.system = (eqs["f1"], eqs["f2"])
    if "u" in eqs:
        pf.scalar = eqs["u"]
    for name, target in targets.items():
        if name not in transforms:
            raise ParseError(f"target for undeclared transform {name!r}", 1, 1)
    for name, (chi, big_u, _) in transforms.items():
        pf.transforms.append(TransformDecl(name, chi, big_u, targets.get(name)))
    return pf


def _mentions(toks, names) -> bool:
    return any(t.kind == "ident" and t.text in names for t in toks)


def _option_value(key, toks):
    body = [t for t in toks if t.kind != "end"]
    if not body:
        raise ParseError(f"option {key} needs a value", toks[0].line, toks[0].col, {"value"})
    text = "".join(t.text for t in body)
    if key in ("ansatz_degree", "seed"):
        try:
            return int(text)
        except ValueError:
            raise ParseError(f"option {key} must be an integer", body[0].line, body[0].col) from None
    if key == "tol":
        try:
            return float(text)
        except ValueError:
            raise ParseError("option tol must be a number", body[0].line, body[0].col) from None
    if key == "format" and text not in ("json", "text"):
        raise ParseError("format must be json or text", body[0].line, body[0].col, {"json", "text"})
    return text


# -- printer -----------------------------------------------------------------

_PRINT_NAMES = {
    X: "x", F1: "f1", F2: "f2", F1P: "f1'", F2P: "f2'",
    U_: "u", UP: "u'", CHI: "chi", BIG_U: "U", BIG_UP: "U'",
}
_VAR_ORDER = [X, F1, F2, F1P, F2P, U_, UP, CHI, BIG_U, BIG_UP]
_FUNC_NAMES = {sp.sin: "sin", sp.cos: "cos", sp.exp: "exp", sp.log: "log", sp.atan: "arctan"}

# binding strengths
_P_ADD, _P_MUL, _P_NEG, _P_POW, _P_ATOM = 1, 2, 3, 4, 5


def _term_key(term):
    powers = term.as_powers_dict()
    exps = []
    for v in _VAR_ORDER:
        e = sp.sympify(powers.get(v, 0))
        exps.append(int(e) if e.is_Integer else 0)
    degree = sum(abs(e) for e in exps)
    has_i = 1 if term.has(sp.I) else 0
    return (degree, [-e for e in exps], has_i, sp.default_sort_key(term))


def _factor_key(f):
    base = f.base if f.is_Pow else f
    if base in _VAR_ORDER:
        return (1, _VAR_ORDER.index(base), "")
    if base.is_Symbol:
        return (0, 0, base.name)
    return (2, 0, sp.default_sort_key(f))


def _print(node, prec: int) -> str:
    if node.is_Add:
        terms = sorted(sp.Add.make_args(node), key=_term_key)
        parts = []
        for k, t in enumerate(terms):
            coeff, _ = t.as_coeff_Mul()
            if coeff.is_negative:
                body = _print(-t, _P_MUL)
                parts.append(("-" if k == 0 else " - ") + body)
            else:
                parts.append(("" if k == 0 else " + ") + _print(t, _P_ADD))
        s = "".join(parts)
        return f"({s})" if prec > _P_ADD else s
    if node.is_Mul or (node.is_Pow and node.exp.is_Integer and node.exp < 0):
        return _print_mul(node, prec)
    if node.is_Rational and not node.is_Integer:
        s = f"{abs(node.p)}/{node.q}"
        if node.is_negative:
            s = "-" + s
            return f"({s})" if prec > _P_ADD else s
        return f"({s})" if prec > _P_MUL else s
    if node.is_Integer:
        s = str(int(node))
        if node.is_negative and prec > _P_ADD:
            return f"({s})"
        return s
    if node is sp.I:
        return "i"
    if node is sp.E:
        return "exp(1)"
    if node is sp.pi:
        # no constant for pi in the grammar; arctan(1) folds back to pi/4
        return _wrap_prec("4*arctan(1)", _P_MUL, prec)
    if node.is_Symbol:
        return _PRINT_NAMES.get(node, node.name)
    if node.is_Pow:
        if node.exp == sp.Rational(1, 2):
            return f"sqrt({_print(node.base, 0)})"
        if node.exp.is_Integer:
            return _wrap_prec(f"{_print(node.base, _P_ATOM)}^{int(node.exp)}", _P_POW, prec)
        if node.exp.is_Rational and node.exp.q == 2:
            # sqrt(b)^n with odd n
            inner = f"sqrt({_print(node.base, 0)})"
            return _wrap_prec(f"{inner}^{int(node.exp.p)}", _P_POW, prec)
        raise ValueError(f"exponent {node.exp} is outside the grammar")
    if node.func in _FUNC_NAMES:
        return f"{_FUNC_NAMES[node.func]}({_print(node.args[0], 0)})"
    raise ValueError(f"{node.func.__name__} is outside the grammar")


def _wrap_prec(s, own, prec):
    return f"({s})" if prec > own else s


def _mul_order(f):
    if f.is_Number:
        return (0,)
    if f is sp.I:
        return (1,)
    return (2, _factor_key(f))


def _print_mul(node, prec):
    coeff, rest = node.as_coeff_Mul()
    num_f, den_f = [], []
    for f in sp.Mul.make_args(rest):
        if f.is_Pow and f.exp.is_Integer and f.exp < 0:
            den_f.append(f.base ** (-f.exp))
        elif f.is_Pow and f.exp.is_Rational and f.exp < 0:
            den_f.append(f.base ** (-f.exp))
        else:
            num_f.append(f)
    neg = coeff.is_negative
    coeff = abs(coeff)
    if coeff.p != 1:
        num_f.append(sp.Integer(coeff.p))
    if coeff.q != 1:
        den_f.append(sp.Integer(coeff.q))
    num_f = sorted(num_f, key=_mul_order)
    den_f = sorted(den_f, key=_mul_order)
    num_s = "*".join(_print(f, _P_MUL + 1 if not f.is_Add else _P_ATOM) for f in num_f) or "1"
    if den_f:
        if len(den_f) == 1 and not den_f[0].is_Add and not den_f[0].is_Mul:
            den_s = _print(den_f[0], _P_POW)
        else:
            den_s = "(" + "*".join(_print(f, _P_ATOM if f.is_Add else _P_MUL + 1) for f in den_f) + ")"
        s = f"{num_s}/{den_s}"
    else:
        s = num_s
    if neg:
        s = "-" + s
        return f"({s})" if prec > _P_ADD else s
    return _wrap_prec(s, _P_MUL, prec)


def print_expr(e) -> str:
    """Render an :class:`Expr` or :class:`CScalar` in problem-file syntax."""
    tree = e.tree if hasattr(e, "tree") else sp.sympify(e)
    return _print(tree, 0)

"""Symbolic expression kernel.

Two value types live here:

* :class:`Expr`, a real expression over the system variables
  ``x, f1, f2, f1p, f2p`` (plus named real parameters), and
* :class:`CScalar`, a complex expression over ``x, u, up`` (and the target
  variables ``chi, U, Up``) whose real and imaginary parts are available as
  :class:`Expr` trees.

Both wrap an immutable sympy tree. Constants are exact rationals; the only
irrational values come from function applications. ``normal_form`` is backed
by sympy's rational-function canonicalisation, while zero testing adds a
seeded numeric check and never guesses on transcendental input.
"""

from __future__ import annotations

import cmath
import contextlib
import contextvars
import random
from fractions import Fraction
from typing import Mapping, Union

import sympy as sp

__all__ = [
    "Expr",
    "CScalar",
    "KernelError",
    "PoleError",
    "BranchError",
    "SliceSingularError",
    "SYSTEM_VARS",
    "COMPLEX_VARS",
    "differentiate",
    "normal_form",
    "is_zero",
    "substitute",
    "evaluate",
    "param",
    "cparam",
    "var",
]


class KernelError(Exception):
    """Base class for kernel failures."""


class PoleError(KernelError, ZeroDivisionError):
    pass


class BranchError(KernelError, ValueError):
    pass


class SliceSingularError(KernelError):
    pass


# -- symbols -----------------------------------------------------------------

X = sp.Symbol("x", real=True)
F1 = sp.Symbol("f1", real=True)
F2 = sp.Symbol("f2", real=True)
F1P = sp.Symbol("f1p", real=True)
F2P = sp.Symbol("f2p", real=True)

U_ = sp.Symbol("u")
UP = sp.Symbol("up")
CHI = sp.Symbol("chi")
BIG_U = sp.Symbol("U")
BIG_UP = sp.Symbol("Up")

SYSTEM_VARS = {"x": X, "f1": F1, "f2": F2, "f1p": F1P, "f2p": F2P}
COMPLEX_VARS = {"x": X, "u": U_, "up": UP, "chi": CHI, "U": BIG_U, "Up": BIG_UP}

_FUNCS = {
    "sin": sp.sin,
    "cos": sp.cos,
    "exp": sp.exp,
    "log": sp.log,
    "sqrt": sp.sqrt,
    "arctan": sp.atan,
}


def param(name: str) -> sp.Symbol:
    """A named real constant usable inside :class:`Expr`."""
    if name in SYSTEM_VARS or name in COMPLEX_VARS:
        raise ValueError(f"{name!r} is a reserved variable name")
    return sp.Symbol(name, real=True)


def cparam(name: str) -> sp.Symbol:
    """A named complex constant usable inside :class:`CScalar`."""
    if name in SYSTEM_VARS or name in COMPLEX_VARS:
        raise ValueError(f"{name!r} is a reserved variable name")
    return sp.Symbol(name)


def _symbol(v) -> sp.Symbol:
    if isinstance(v, sp.Symbol):
        return v
    if isinstance(v, str):
        if v in SYSTEM_VARS:
            return SYSTEM_VARS[v]
        if v in COMPLEX_VARS:
            return COMPLEX_VARS[v]
        # prime spelling from the problem-file grammar
        alias = {"f1'": F1P, "f2'": F2P, "u'": UP, "U'": BIG_UP}
        if v in alias:
            return alias[v]
    raise KeyError(f"unknown variable {v!r}")


def _sympify(value) -> sp.Expr:
    if isinstance(value, _Symbolic):
        return value.tree
    if isinstance(value, bool):
        raise TypeError("booleans are not expressions")
    if isinstance(value, int):
        return sp.Integer(value)
    if isinstance(value, Fraction):
        return sp.Rational(value.numerator, value.denominator)
    if isinstance(value, float):
        # floats are converted exactly; callers wanting 0.1 should pass "1/10"
        return sp.Rational(Fraction(value))
    if isinstance(value, complex):
        return _sympify(value.real) + sp.I * _sympify(value.imag)
    if isinstance(value, sp.Basic):
        return value
    raise TypeError(f"cannot build an expression from {type(value).__name__}")


# -- expression types --------------------------------------------------------


class _Symbolic:
    __slots__ = ("tree",)

    def __init__(self, tree):
        tree = _sympify(tree)
        if tree.has(sp.zoo, sp.nan, sp.oo, -sp.oo):
            raise PoleError("expression divides by zero")
        object.__setattr__(self, "tree", tree)

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    def _wrap(self, tree):
        return type(self)(tree)

    def _coerce(self, other):
        if isinstance(other, _Symbolic) and type(other) is not type(self):
            if isinstance(self, CScalar):
                return other.tree
            raise TypeError("cannot mix Expr with CScalar; lift the Expr first")
        return _sympify(other)

    def __add__(self, other):
        return self._wrap(self.tree + self._coerce(other))

    def __radd__(self, other):
        return self._wrap(self._coerce(other) + self.tree)

    def __sub__(self, other):
        return self._wrap(self.tree - self._coerce(other))

    def __rsub__(self, other):
        return self._wrap(self._coerce(other) - self.tree)

    def __mul__(self, other):
        return self._wrap(self.tree * self._coerce(other))

    def __rmul__(self, other):
        return self._wrap(self._coerce(other) * self.tree)

    def __truediv__(self, other):
        den = self._coerce(other)
        if den == 0:
            raise PoleError("division by the zero constant")
        return self._wrap(self.tree / den)

    def __rtruediv__(self, other):
        if self.tree == 0:
            raise PoleError("division by the zero constant")
        return self._wrap(self._coerce(other) / self.tree)

    def __pow__(self, n):
        if not isinstance(n, int) or isinstance(n, bool):
            raise TypeError("only integer exponents are allowed; use sqrt()")
        if n < 0 and self.tree == 0:
            raise PoleError("negative power of the zero constant")
        return self._wrap(self.tree**n)

    def __neg__(self):
        return self._wrap(-self.tree)

    def __pos__(self):
        return self

    def __eq__(self, other):
        if isinstance(other, _Symbolic):
            return type(self) is type(other) and self.tree == other.tree
        if isinstance(other, (int, Fraction)):
            return self.tree == _sympify(other)
        return NotImplemented

    def __hash__(self):
        return hash((type(self).__name__, self.tree))

    def __repr__(self):
        return f"{type(self).__name__}({self})"

    def __str__(self):
        from .parser import print_expr

        return print_expr(self)

    @property
    def free_names(self) -> set[str]:
        return {s.name for s in self.tree.free_symbols}

    def has(self, *names) -> bool:
        return any(self.tree.has(_symbol(n)) for n in names)

    def is_rational_function(self) -> bool:
        return not self.tree.atoms(sp.Function) and not any(
            not p.exp.is_Integer for p in self.tree.atoms(sp.Pow)
        )

    def apply(self, fname: str):
        return self._wrap(_FUNCS[fname](self.tree))


class Expr(_Symbolic):
    """Real symbolic expression in ``x, f1, f2, f1p, f2p`` and real parameters."""

    __slots__ = ()

    def __init__(self, tree):
        super().__init__(tree)
        if self.tree.has(sp.I):
            raise TypeError("Expr must be real; use CScalar for complex values")

    @classmethod
    def var(cls, name: str) -> "Expr":
        sym = _symbol(name)
        if sym not in SYSTEM_VARS.values():
            raise KeyError(f"{name!r} is not a system variable")
        return cls(sym)

    @classmethod
    def const(cls, value) -> "Expr":
        return cls(_sympify(value))


class CScalar(_Symbolic):
    """Complex symbolic expression over ``x, u, up`` (and ``chi, U, Up``).

    The real and imaginary parts under ``u = f1 + i f2``, ``up = f1p + i f2p``
    are exposed as :attr:`re` and :attr:`im`.
    """

    __slots__ = ()

    @classmethod
    def var(cls, name: str) -> "CScalar":
        sym = _symbol(name)
        if sym not in COMPLEX_VARS.values():
            raise KeyError(f"{name!r} is not a complex-side variable")
        return cls(sym)

    @classmethod
    def const(cls, value) -> "CScalar":
        return cls(_sympify(value))

    @property
    def re(self) -> Expr:
        return realify_parts(self)[0]

    @property
    def im(self) -> Expr:
        return realify_parts(self)[1]


Symbolic = Union[Expr, CScalar]


def var(name: str) -> Symbolic:
    sym = _symbol(name)
    if sym in SYSTEM_VARS.values() and name != "x":
        return Expr(sym)
    if name == "x":
        return Expr(X)
    return CScalar(sym)


# -- operations --------------------------------------------------------------


def differentiate(e: Symbolic, v) -> Symbolic:
    """Partial derivative treating every variable as an independent symbol."""
    return e._wrap(sp.diff(e.tree, _symbol(v)))


def _nf_tree(tree: sp.Expr) -> sp.Expr:
    def inner(node):
        if isinstance(node, sp.Function) or (
            isinstance(node, sp.Pow) and not node.exp.is_Integer
        ):
            args = [_nf_tree(a) for a in node.args]
            return node.func(*args)
        return node

    tree = sp.bottom_up(tree, inner, atoms=False)
    return sp.cancel(sp.together(sp.expand(tree)))


def normal_form(e: Symbolic) -> Symbolic:
    """Canonical numerator/denominator form; semantically the same expression."""
    return e._wrap(_nf_tree(e.tree))


def _sample_point(symbols, rng: random.Random) -> dict:
    point = {}
    for s in sorted(symbols, key=lambda s: s.name):
        # generic points near the positive real axis keep principal branches
        # of log/sqrt/arctan on their analytic sheet
        point[s] = complex(rng.uniform(0.4, 1.9), rng.uniform(-0.45, 0.45))
    return point


def _scale(tree, point) -> float:
    terms = sp.Add.make_args(sp.expand(tree)) if tree.is_Add else (tree,)
    total = 0.0
    for t in terms:
        try:
            total += abs(_eval(t, point))
        except KernelError:
            continue
    return max(1.0, total)


_ZERO_TOL = contextvars.ContextVar("zero_tol", default=1e-10)


@contextlib.contextmanager
def zero_tolerance(tol: float):
    """Set the relative sample tolerance used by ``is_zero`` inside the block."""
    token = _ZERO_TOL.set(float(tol))
    try:
        yield
    finally:
        _ZERO_TOL.reset(token)


def is_zero(e: Symbolic, *, seed: int = 0, samples: int = 8, tol: float | None = None):
    """Decide whether ``e`` is identically zero.

    Returns ``True`` or ``False``, or ``None`` when the numeric evidence says
    zero but no symbolic confirmation can be found.
    """
    if tol is None:
        tol = _ZERO_TOL.get()
    nf = _nf_tree(e.tree)
    if nf == 0:
        return True
    transcendental = bool(nf.atoms(sp.Function)) or any(
        not p.exp.is_Integer for p in nf.atoms(sp.Pow)
    )
    if not transcendental:
        # canonical rational normal forms are zero iff literally zero
        return False
    rng = random.Random(seed)
    vanished = 0
    attempts = 0
    while vanished < samples and attempts < 4 * samples:
        attempts += 1
        point = _sample_point(nf.free_symbols, rng)
        try:
            value = _eval(nf, point)
        except KernelError:
            continue
        if abs(value) > tol * _scale(nf, point):
            return False
        vanished += 1
    if vanished < samples:
        return None
    confirm = sp.simplify(sp.expand_trig(e.tree).rewrite(sp.exp))
    if sp.simplify(confirm) == 0:
        return True
    return None


def substitute(e: Symbolic, bindings: Mapping) -> Symbolic:
    """Simultaneous substitution followed by ``normal_form``.

    Raises :class:`SliceSingularError` when a denominator becomes
    identically zero.
    """
    repl = {_symbol(k): _sympify(v) for k, v in bindings.items()}
    if not repl:
        return normal_form(e)
    nf = _nf_tree(e.tree)
    num, den = sp.fraction(nf)
    den_sub = _nf_tree(den.xreplace(repl))
    if den_sub == 0:
        raise SliceSingularError(f"denominator {den} vanishes under substitution")
    num_sub = num.xreplace(repl)
    if num_sub.has(sp.zoo, sp.nan):
        raise SliceSingularError("an inner denominator vanishes under substitution")
    out = _nf_tree(num_sub / den_sub)
    if out.has(sp.zoo, sp.nan):
        raise SliceSingularError("substitution produced a pole")
    try:
        return e._wrap(out)
    except TypeError:
        return CScalar(out)


# -- evaluation --------------------------------------------------------------

_POLE_EPS = 1e-14


def _eval(node, point) -> complex:
    if node.is_Symbol:
        try:
            return complex(point[node])
        except KeyError:
            raise KeyError(f"no value for variable {node.name}") from None
    if node.is_Number:
        return complex(node)
    if node is sp.I:
        return 1j
    if node.is_Add:
        return sum((_eval(a, point) for a in node.args), 0j)
    if node.is_Mul:
        out = 1 + 0j
        for a in node.args:
            out *= _eval(a, point)
        return out
    if node.is_Pow:
        base = _eval(node.base, point)
        ex = node.exp
        if ex.is_Integer:
            n = int(ex)
            if n < 0 and abs(base) < _POLE_EPS:
                raise PoleError(f"pole at {node.base}")
            return base**n
        if ex == sp.Rational(1, 2):
            return cmath.sqrt(base)
        if ex == -sp.Rational(1, 2):
            if abs(base) < _POLE_EPS:
                raise PoleError(f"pole at {node.base}")
            return 1 / cmath.sqrt(base)
        if ex.is_Rational:
            if ex < 0 and abs(base) < _POLE_EPS:
                raise PoleError(f"pole at {node.base}")
            return cmath.exp(complex(ex) * cmath.log(base)) if base != 0 else 0j
        raise BranchError(f"unsupported exponent {ex}")
    if isinstance(node, sp.exp):
        return cmath.exp(_eval(node.args[0], point))
    if isinstance(node, sp.log):
        z = _eval(node.args[0], point)
        if z == 0:
            raise BranchError("log at its branch point 0")
        return cmath.log(z)
    if isinstance(node, sp.sin):
        return cmath.sin(_eval(node.args[0], point))
    if isinstance(node, sp.cos):
        return cmath.cos(_eval(node.args[0], point))
    if isinstance(node, sp.atan):
        z = _eval(node.args[0], point)
        if z == 1j or z == -1j:
            raise BranchError("arctan at a branch point")
        return cmath.atan(z)
    if node.is_number:
        return complex(node.evalf(17))
    raise KernelError(f"cannot evaluate {node.func.__name__}")


def evaluate(e: Symbolic, point: Mapping) -> complex:
    """Evaluate at a point given as ``{name: number}`` (principal branches)."""
    values = {_symbol(k): v for k, v in point.items()}
    return _eval(e.tree, values)


# -- realification -------------------------------------------------------------

_REALIFY = {U_: F1 + sp.I * F2, UP: F1P + sp.I * F2P}


def _split_rational(tree):
    num, den = sp.fraction(sp.cancel(sp.together(tree)))
    num = sp.expand(num)
    den = sp.expand(den)
    den_conj = sp.expand(sp.conjugate(den))
    if den_conj != den:
        num = sp.expand(num * den_conj)
        den = sp.expand(den * den_conj)
    re_num, im_num = (sp.expand(p) for p in num.as_real_imag())
    return sp.cancel(re_num / den), sp.cancel(im_num / den)


def _arg_as_atan(z):
    re_z, im_z = z.as_real_imag()
    # principal branch on the half plane Re z > 0, where the samplers live
    return sp.atan(im_z / re_z)


def _real_functions(tree):
    """Rewrite hyperbolic functions and ``arg`` into the kernel's function set."""
    tree = tree.replace(sp.arg, _arg_as_atan)
    tree = tree.replace(sp.Abs, lambda z: sp.sqrt(sp.expand(z * sp.conjugate(z))))
    for f in (sp.sinh, sp.cosh, sp.tanh):
        tree = tree.replace(f, lambda a, f=f: f(a).rewrite(sp.exp))
    return tree


def realify_parts(c: CScalar, subs: Mapping | None = None) -> tuple[Expr, Expr]:
    """Real and imaginary parts with ``u = f1 + i f2``, ``up = f1p + i f2p``.

    Complex parameters must be bound to explicit values in ``subs`` (or be
    absent); ``x`` stays real.
    """
    mapping = dict(_REALIFY)
    if subs:
        mapping.update({_symbol(k) if isinstance(k, str) else k: _sympify(v) for k, v in subs.items()})
    tree = c.tree.xreplace(mapping)
    leftover = [s for s in tree.free_symbols if not s.is_real]
    if leftover:
        raise ValueError(f"complex symbols {sorted(s.name for s in leftover)} have no real split")
    if tree.atoms(sp.Function) or any(not p.exp.is_Integer for p in tree.atoms(sp.Pow)):
        re_t, im_t = (_real_functions(t) for t in sp.expand_complex(tree).as_real_imag())
        return Expr(_nf_tree(re_t)), Expr(_nf_tree(im_t))
    re_t, im_t = _split_rational(tree)
    return Expr(re_t), Expr(im_t)

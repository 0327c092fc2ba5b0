"""Height-function expressions: parsing, evaluation, symbolic derivatives.

Grammar (``^`` binds tighter than unary minus, which binds tighter than
``*`` and ``/``)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := number | ident | ident '(' expr ')' | '(' expr ')'

>>> ast = parse("a*cosh(x/a)", variables=("x",), parameters=("a",))
>>> evaluate(ast, {"a": 2.0, "x": 2.0})  # doctest: +ELLIPSIS
3.0861...
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Union

import numpy as np

from .errors import DomainError, NonDifferentiable, ParseError, UnboundVariable, UnknownIdentifier

FUNCTIONS = ("sin", "cos", "tan", "sinh", "cosh", "tanh", "exp", "ln", "sqrt", "abs")
# sgn only appears in derivatives of abs; it is not accepted from user text
_INTERNAL = ("sgn",)


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "ExprAst"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "ExprAst"
    right: "ExprAst"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "ExprAst"


ExprAst = Union[Num, Var, Neg, BinOp, Call]


@dataclass(frozen=True)
class EvalContext:
    variables: Mapping[str, float]
    parameters: Mapping[str, float] = None

    def lookup(self, name):
        if name in self.variables:
            return self.variables[name]
        if self.parameters and name in self.parameters:
            return self.parameters[name]
        raise UnboundVariable(f"no value bound for {name!r}")


# ------------------------------------------------------------------ lexing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(text):
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


_ATOM_START = ("number", "identifier", "'('", "'-'")


class _Parser:
    def __init__(self, text, variables, parameters):
        self.toks = _tokenize(text)
        self.i = 0
        self.names = None if variables is None and parameters is None else (
            set(variables or ()) | set(parameters or ()))

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.peek()
        if val != value or kind != "op":
            raise ParseError(f"unexpected {val or 'end of input'!r}", pos, (f"'{value}'",))
        self.i += 1

    def parse(self):
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {val!r}", pos, ("operator", "end of input"))
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        kind, val, pos = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "ident":
            if self.peek()[0] == "op" and self.peek()[1] == "(":
                if val not in FUNCTIONS:
                    raise UnknownIdentifier(val, pos)
                self.take()
                arg = self.expr()
                self.expect(")")
                return Call(val, arg)
            if val in FUNCTIONS:
                raise ParseError(f"function {val!r} needs an argument", self.peek()[2], ("'('",))
            if self.names is not None and val not in self.names:
                raise UnknownIdentifier(val, pos)
            return Var(val)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ParseError(f"unexpected {val or 'end of input'!r}", pos, _ATOM_START)


def parse(text: str, variables: Optional[Iterable[str]] = None,
          parameters: Optional[Iterable[str]] = None) -> ExprAst:
    """Parse ``text``.  With ``variables``/``parameters`` given, any other
    identifier raises :class:`UnknownIdentifier`."""
    if not text or not text.strip():
        raise ParseError("empty expression", 0, _ATOM_START)
    return _Parser(text, variables, parameters).parse()


# --------------------------------------------------------------- printing

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def _prec(node):
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return _PREC["neg"]
    if isinstance(node, Num) and (node.value < 0 or math.copysign(1.0, node.value) < 0):
        return 0
    return 5


def to_string(node: ExprAst) -> str:
    """Render with the fewest parentheses that still parse back identically."""
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({to_string(node.arg)})"

    def wrap(child, need):
        s = to_string(child)
        return f"({s})" if need else s

    if isinstance(node, Neg):
        return "-" + wrap(node.arg, _prec(node.arg) < 3)
    p = _PREC[node.op]
    if node.op == "^":
        return wrap(node.left, _prec(node.left) < 5) + "^" + wrap(node.right, _prec(node.right) < 3)
    return (wrap(node.left, _prec(node.left) < p) + f" {node.op} "
            + wrap(node.right, _prec(node.right) <= p))


# ------------------------------------------------------------ evaluation


def _free(node, out):
    if isinstance(node, Var):
        out.add(node.name)
    elif isinstance(node, (Neg, Call)):
        _free(node.arg, out)
    elif isinstance(node, BinOp):
        _free(node.left, out)
        _free(node.right, out)
    return out


def free_names(node: ExprAst) -> set[str]:
    return _free(node, set())


def _call(func, x):
    if func == "ln":
        if x <= 0.0:
            raise DomainError(f"ln of non-positive argument {x!r}")
        return math.log(x)
    if func == "sqrt":
        if x < 0.0:
            raise DomainError(f"sqrt of negative argument {x!r}")
        return math.sqrt(x)
    if func == "abs":
        return abs(x)
    if func == "sgn":
        if x == 0.0:
            raise NonDifferentiable("abs is not differentiable at 0")
        return 1.0 if x > 0 else -1.0
    try:
        return getattr(math, func)(x)
    except (OverflowError, ValueError) as exc:
        raise DomainError(f"{func}({x!r}): {exc}") from None


def _eval(node, ctx):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return float(ctx.lookup(node.name))
    if isinstance(node, Neg):
        return -_eval(node.arg, ctx)
    if isinstance(node, Call):
        return _call(node.func, _eval(node.arg, ctx))
    a = _eval(node.left, ctx)
    b = _eval(node.right, ctx)
    op = node.op
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        if b == 0.0:
            raise DomainError("division by zero")
        return a / b
    if a < 0.0 and b != int(b):
        raise DomainError(f"negative base {a!r} with non-integer exponent {b!r}")
    if a == 0.0 and b < 0.0:
        raise DomainError("zero raised to a negative power")
    try:
        return math.pow(a, b)
    except OverflowError:
        raise DomainError(f"overflow in {a!r}^{b!r}") from None


def evaluate(node: ExprAst, ctx) -> float:
    """Evaluate in IEEE double precision.  ``ctx`` may be a plain mapping."""
    if not isinstance(ctx, EvalContext):
        ctx = EvalContext(dict(ctx))
    return float(_eval(node, ctx))


def as_function(node: ExprAst, variable: str, parameters: Mapping[str, float] | None = None):
    """Numpy-friendly callable of one variable (element-wise evaluation)."""
    params = dict(parameters or {})

    def f(x):
        arr = np.asarray(x, dtype=float)
        if arr.ndim == 0:
            return evaluate(node, EvalContext({variable: float(arr)}, params))
        flat = [evaluate(node, EvalContext({variable: float(v)}, params)) for v in arr.ravel()]
        return np.array(flat).reshape(arr.shape)

    return f


# -------------------------------------------------------- differentiation

ZERO = Num(0.0)
ONE = Num(1.0)


def _is(node, value):
    return isinstance(node, Num) and node.value == value


def _add(a, b):
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    if _is(a, 0.0):
        return b
    if _is(b, 0.0):
        return a
    return BinOp("+", a, b)


def _sub(a, b):
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    if _is(b, 0.0):
        return a
    if _is(a, 0.0):
        return _neg(b)
    return BinOp("-", a, b)


def _mul(a, b):
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    if _is(a, 0.0) or _is(b, 0.0):
        return ZERO
    if _is(a, 1.0):
        return b
    if _is(b, 1.0):
        return a
    return BinOp("*", a, b)


def _div(a, b):
    if isinstance(a, Num) and isinstance(b, Num) and b.value != 0.0:
        return Num(a.value / b.value)
    if _is(a, 0.0):
        return ZERO
    if _is(b, 1.0):
        return a
    return BinOp("/", a, b)


def _pow(a, b):
    if isinstance(a, Num) and isinstance(b, Num):
        try:
            return Num(math.pow(a.value, b.value))
        except (OverflowError, ValueError):
            pass
    if _is(b, 1.0):
        return a
    if _is(b, 0.0):
        return ONE
    return BinOp("^", a, b)


def _neg(a):
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def _fn(name, arg):
    return Call(name, arg)


def _dcall(func, u):
    """d func(u) / du as an AST."""
    if func == "sin":
        return _fn("cos", u)
    if func == "cos":
        return _neg(_fn("sin", u))
    if func == "tan":
        return _div(ONE, _pow(_fn("cos", u), Num(2.0)))
    if func == "sinh":
        return _fn("cosh", u)
    if func == "cosh":
        return _fn("sinh", u)
    if func == "tanh":
        return _sub(ONE, _pow(_fn("tanh", u), Num(2.0)))
    if func == "exp":
        return _fn("exp", u)
    if func == "ln":
        return _div(ONE, u)
    if func == "sqrt":
        return _div(ONE, _mul(Num(2.0), _fn("sqrt", u)))
    if func == "abs":
        return _fn("sgn", u)
    if func == "sgn":
        return ZERO
    raise ValueError(f"unknown function {func!r}")


def differentiate(node: ExprAst, variable: str) -> ExprAst:
    """Exact symbolic derivative; only constant folding is applied."""
    if isinstance(node, Num):
        return ZERO
    if isinstance(node, Var):
        return ONE if node.name == variable else ZERO
    if isinstance(node, Neg):
        return _neg(differentiate(node.arg, variable))
    if isinstance(node, Call):
        du = differentiate(node.arg, variable)
        if _is(du, 0.0):
            return ZERO
        return _mul(_dcall(node.func, node.arg), du)
    u, v = node.left, node.right
    du, dv = differentiate(u, variable), differentiate(v, variable)
    op = node.op
    if op == "+":
        return _add(du, dv)
    if op == "-":
        return _sub(du, dv)
    if op == "*":
        return _add(_mul(du, v), _mul(u, dv))
    if op == "/":
        return _div(_sub(_mul(du, v), _mul(u, dv)), _pow(v, Num(2.0)))
    if variable not in free_names(v):
        # d(u^c) = c u^(c-1) du
        return _mul(_mul(v, _pow(u, _sub(v, ONE))), du)
    # d(u^v) = u^v (dv ln u + v du / u)
    return _mul(node, _add(_mul(dv, _fn("ln", u)), _div(_mul(v, du), u)))

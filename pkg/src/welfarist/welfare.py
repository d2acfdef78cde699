"""Welfare functions as small expressions over the utility vector ``u``.

An expression has one aggregation level: ``sum``, ``prod``, ``min`` or ``max``
applied to an elementwise expression in ``u``, combined by scalar arithmetic,
``log``, ``exp`` and ``^``. Examples::

    prod(u)            sum(log(u))        min(u)
    sum(u^2)           prod(u)^3          log(prod(u)) + 1

Expressions built only from ``+ - * /``, the aggregators and integer powers are
*rational closed* and are evaluated exactly with ``Fraction``. Everything else
goes through a 160-bit mpmath context. ``log(0)`` is ``-inf``.
"""
from __future__ import annotations

import enum
import functools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence, Union

import mpmath

FLOAT_PRECISION = 160
FLOAT_TOLERANCE = Fraction(1, 2**64)

_ctx = mpmath.MPContext()
_ctx.prec = FLOAT_PRECISION


class WelfareParseError(ValueError):
    def __init__(self, message: str, position: int | None = None):
        self.position = position
        super().__init__(message if position is None else f"{message} (at position {position})")


class WelfareStructureError(WelfareParseError):
    """Well-formed text that breaks the one-aggregation-level rule."""


class WelfareDomainError(ArithmeticError):
    pass


# -- AST ---------------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Const:
    value: Fraction


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class Func:
    name: str  # "log" | "exp"
    arg: "Node"


@dataclass(frozen=True)
class Power:
    base: "Node"
    exponent: Fraction


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Aggregate:
    kind: str  # sum | prod | min | max
    body: "Node"


Node = Union[Var, Const, Neg, Func, Power, BinOp, Aggregate]

AGGREGATORS = ("sum", "prod", "min", "max")
FUNCTIONS = ("log", "exp")

SHORTCUTS = {
    "nash": "prod(u)",
    "lognash": "sum(log(u))",
    "util": "sum(u)",
    "egal": "min(u)",
}

# Built-in families, all non-decreasing on [0, inf)^n. The first group depends
# on u only through the product.
PRODUCT_FAMILIES = {
    "nash": "prod(u)",
    "lognash": "sum(log(u))",
    "nash_cubed": "prod(u)^3",
    "log_of_nash": "log(prod(u))",
    "sqrt_nash": "prod(u)^(1/2)",
}
OTHER_FAMILIES = {
    "util": "sum(u)",
    "egal": "min(u)",
    "sum_squares": "sum(u^2)",
    "sum_sqrt": "sum(u^(1/2))",
}


def _walk(node: Node):
    yield node
    for child in ("arg", "base", "left", "right", "body"):
        sub = getattr(node, child, None)
        if sub is not None:
            yield from _walk(sub)


@functools.lru_cache(maxsize=256)
def _rational_closed(root: Node) -> bool:
    for node in _walk(root):
        if isinstance(node, Func):
            return False
        if isinstance(node, Power) and node.exponent.denominator != 1:
            return False
    return True


def render(node: Node) -> str:
    """Canonical, fully parenthesized text that parses back to ``node``."""
    if isinstance(node, Var):
        return "u"
    if isinstance(node, Const):
        v = node.value
        return str(v) if v.denominator == 1 and v >= 0 else f"({v})"
    if isinstance(node, Neg):
        return f"(-{render(node.arg)})"
    if isinstance(node, Func):
        return f"{node.name}({render(node.arg)})"
    if isinstance(node, Power):
        e = node.exponent
        etext = str(e) if e.denominator == 1 and e >= 0 else f"({e})"
        return f"{render(node.base)}^{etext}"
    if isinstance(node, BinOp):
        return f"({render(node.left)} {node.op} {render(node.right)})"
    if isinstance(node, Aggregate):
        return f"{node.kind}({render(node.body)})"
    raise TypeError(node)


@dataclass(frozen=True)
class WelfareExpr:
    root: Node
    source: str = field(default="", compare=False)

    @property
    def rational_closed(self) -> bool:
        return _rational_closed(self.root)

    @property
    def family(self) -> str | None:
        """Name of the built-in family this expression is, if any."""
        for name, text in {**PRODUCT_FAMILIES, **OTHER_FAMILIES}.items():
            if self.root == parse_welfare(text).root:
                return name
        return None

    def __str__(self):
        return self.source or render(self.root)

    def __call__(self, x: Sequence) -> "ExtendedValue":
        return evaluate(self, x)


# -- parser ------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d+)?)|([A-Za-z_]\w*)|(\S))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if match is None:  # trailing whitespace
            break
        number, name, sym = match.groups()
        start = match.start(match.lastindex)
        if number is not None:
            tokens.append(("num", number, start))
        elif name is not None:
            tokens.append(("name", name, start))
        else:
            if sym not in "+-*/^()":
                raise WelfareParseError(f"unexpected character {sym!r}", start)
            tokens.append(("sym", sym, start))
        pos = match.end()
    tokens.append(("end", "", len(text)))
    return tokens


def _has_var(node: Node) -> bool:
    return any(isinstance(n, (Var, Aggregate)) for n in _walk(node))


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, sym: str):
        kind, value, where = self.take()
        if value != sym or kind != "sym":
            found = "end of input" if kind == "end" else repr(value)
            raise WelfareParseError(f"expected {sym!r}, found {found}", where)

    def parse(self) -> Node:
        node = self.additive(False)
        kind, value, where = self.peek()
        if kind != "end":
            raise WelfareParseError(f"unexpected {value!r}", where)
        return node

    def additive(self, inside: bool) -> Node:
        node = self.multiplicative(inside)
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "sym":
            op = self.take()[1]
            node = BinOp(op, node, self.multiplicative(inside))
        return node

    def multiplicative(self, inside: bool) -> Node:
        node = self.unary(inside)
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "sym":
            op = self.take()[1]
            node = BinOp(op, node, self.unary(inside))
        return node

    def unary(self, inside: bool) -> Node:
        if self.peek()[:2] == ("sym", "-"):
            self.take()
            return Neg(self.unary(inside))
        if self.peek()[:2] == ("sym", "+"):
            self.take()
            return self.unary(inside)
        return self.power(inside)

    def power(self, inside: bool) -> Node:
        base = self.primary(inside)
        if self.peek()[:2] == ("sym", "^"):
            where = self.take()[2]
            exponent = self.unary(inside)
            if _has_var(exponent):
                raise WelfareStructureError("exponent must be a constant", where)
            value = _constant_value(exponent, where)
            return Power(base, value)
        return base

    def primary(self, inside: bool) -> Node:
        kind, value, where = self.take()
        if kind == "num":
            return Const(Fraction(value))
        if kind == "sym" and value == "(":
            node = self.additive(inside)
            self.expect(")")
            return node
        if kind == "name":
            if value == "u":
                if not inside:
                    raise WelfareStructureError("'u' must appear inside an aggregator", where)
                return Var()
            if value in AGGREGATORS:
                if inside:
                    raise WelfareStructureError(f"nested aggregator {value!r}", where)
                self.expect("(")
                body = self.additive(True)
                self.expect(")")
                return Aggregate(value, body)
            if value in FUNCTIONS:
                self.expect("(")
                arg = self.additive(inside)
                self.expect(")")
                return Func(value, arg)
            raise WelfareParseError(f"unknown name {value!r}", where)
        found = "end of input" if kind == "end" else repr(value)
        raise WelfareParseError(f"unexpected {found}", where)


def _constant_value(node: Node, where: int) -> Fraction:
    try:
        value = _compile(node, exact=True)(None)
    except WelfareDomainError as exc:
        raise WelfareParseError(f"bad exponent: {exc}", where) from None
    if value is NEG_INF or not isinstance(value, (int, Fraction)):
        raise WelfareParseError("exponent must be a rational constant", where)
    return Fraction(value)


def parse_welfare(text: str) -> WelfareExpr:
    source = text.strip()
    return WelfareExpr(_parse_cached(SHORTCUTS.get(source, source)), source)


@functools.lru_cache(maxsize=256)
def _parse_cached(text: str) -> Node:
    return _Parser(text).parse()


# -- extended values -----------------------------------------------------------


class Tag(enum.Enum):
    NEG_INFINITY = "-inf"
    FINITE = "finite"


class Backend(str, enum.Enum):
    EXACT = "exact"
    FLOAT = "float"


@functools.total_ordering
@dataclass(frozen=True)
class ExtendedValue:
    """A welfare value in [-inf, inf): an exact Fraction or a 160-bit mpf."""

    tag: Tag
    value: object = None
    backend: Backend = Backend.EXACT

    @property
    def is_neg_inf(self) -> bool:
        return self.tag is Tag.NEG_INFINITY

    def _key(self):
        return (0, 0) if self.is_neg_inf else (1, self.value)

    def __eq__(self, other):
        if not isinstance(other, ExtendedValue):
            return NotImplemented
        return _cmp_raw(self, other) == 0

    def __lt__(self, other):
        if not isinstance(other, ExtendedValue):
            return NotImplemented
        return _cmp_raw(self, other) < 0

    def __hash__(self):
        return hash(self._key()) if self.backend is Backend.EXACT else hash(str(self))

    def __str__(self):
        if self.is_neg_inf:
            return "-inf"
        if self.backend is Backend.EXACT:
            return str(self.value)
        return _ctx.nstr(self.value, 40)

    def to_float(self) -> float:
        return float("-inf") if self.is_neg_inf else float(self.value)


NEG_INFINITY = ExtendedValue(Tag.NEG_INFINITY)


def finite(value, backend: Backend = Backend.EXACT) -> ExtendedValue:
    return ExtendedValue(Tag.FINITE, value, backend)


def _as_mpf(v):
    if isinstance(v, Fraction):
        return _ctx.mpf(v.numerator) / v.denominator
    return _ctx.mpf(v)


def _cmp_raw(a: ExtendedValue, b: ExtendedValue) -> int:
    if a.is_neg_inf or b.is_neg_inf:
        return int(b.is_neg_inf) - int(a.is_neg_inf) if a.is_neg_inf != b.is_neg_inf else 0
    x, y = a.value, b.value
    if a.backend is not b.backend:
        x, y = _as_mpf(x), _as_mpf(y)
    return (x > y) - (x < y)


# -- evaluation ----------------------------------------------------------------


class _NegInf:
    __slots__ = ()

    def __repr__(self):
        return "NEG_INF"


NEG_INF = _NegInf()


def _add(a, b):
    if a is NEG_INF or b is NEG_INF:
        return NEG_INF
    return a + b


def _sub(a, b):
    if b is NEG_INF:
        raise WelfareDomainError("subtracting -inf yields +inf")
    if a is NEG_INF:
        return NEG_INF
    return a - b


def _mul(a, b):
    if a is NEG_INF or b is NEG_INF:
        other = b if a is NEG_INF else a
        if other is NEG_INF or other <= 0:
            raise WelfareDomainError("-inf times a non-positive value")
        return NEG_INF
    return a * b


def _div(a, b):
    if b is NEG_INF:
        if a is NEG_INF:
            raise WelfareDomainError("-inf / -inf")
        return 0 * a
    if b == 0:
        raise WelfareDomainError("division by zero")
    if a is NEG_INF:
        if b < 0:
            raise WelfareDomainError("-inf divided by a negative value")
        return NEG_INF
    if isinstance(a, int) and isinstance(b, int):
        return Fraction(a, b)
    return a / b


def _neg(a):
    if a is NEG_INF:
        raise WelfareDomainError("negating -inf yields +inf")
    return -a


def _min(a, b):
    if a is NEG_INF or b is NEG_INF:
        return NEG_INF
    return a if a <= b else b


def _max(a, b):
    if a is NEG_INF:
        return b
    if b is NEG_INF:
        return a
    return a if a >= b else b


_BINARY = {"+": _add, "-": _sub, "*": _mul, "/": _div}
_FOLD = {"sum": _add, "prod": _mul, "min": _min, "max": _max}


def _exact_power(base, p: Fraction):
    if base is NEG_INF:
        raise WelfareDomainError("power of -inf")
    if base == 0 and p < 0:
        raise WelfareDomainError("zero raised to a negative power")
    if p >= 0:
        return base ** int(p)
    return Fraction(base) ** int(p)


def _float_power(base, p: Fraction):
    if base is NEG_INF:
        raise WelfareDomainError("power of -inf")
    if p.denominator == 1:
        if base == 0 and p < 0:
            raise WelfareDomainError("zero raised to a negative power")
        return base ** int(p)
    if base < 0:
        raise WelfareDomainError("fractional power of a negative value")
    if base == 0:
        if p < 0:
            raise WelfareDomainError("zero raised to a negative power")
        return _ctx.mpf(0)
    return _ctx.power(base, _as_mpf(p))


def _log(a):
    if a is NEG_INF:
        raise WelfareDomainError("log of -inf")
    if a < 0:
        raise WelfareDomainError("log of a negative value")
    if a == 0:
        return NEG_INF
    return _ctx.log(a)


def _exp(a):
    if a is NEG_INF:
        return _ctx.mpf(0)
    return _ctx.exp(a)


def _compile(node: Node, exact: bool) -> Callable:
    """Turn ``node`` into a function of the current element (inside an
    aggregator) or of the whole vector (outside)."""
    if isinstance(node, Var):
        return lambda v: v
    if isinstance(node, Const):
        value = node.value if exact else _as_mpf(node.value)
        return lambda v: value
    if isinstance(node, Neg):
        arg = _compile(node.arg, exact)
        return lambda v: _neg(arg(v))
    if isinstance(node, BinOp):
        fn = _BINARY[node.op]
        left = _compile(node.left, exact)
        right = _compile(node.right, exact)
        return lambda v: fn(left(v), right(v))
    if isinstance(node, Power):
        base = _compile(node.base, exact)
        p = node.exponent
        pow_fn = _exact_power if exact else _float_power
        if p == 1:
            return base
        return lambda v: pow_fn(base(v), p)
    if isinstance(node, Func):
        if exact:
            raise WelfareDomainError(f"{node.name} is not rational closed")
        arg = _compile(node.arg, exact)
        fn = _log if node.name == "log" else _exp
        return lambda v: fn(arg(v))
    if isinstance(node, Aggregate):
        body = _compile(node.body, exact)
        fold = _FOLD[node.kind]

        def aggregate(vector):
            it = iter(vector)
            try:
                acc = body(next(it))
            except StopIteration:
                raise WelfareDomainError("aggregate over an empty vector") from None
            for x in it:
                acc = fold(acc, body(x))
            return acc

        return aggregate
    raise TypeError(node)


@functools.lru_cache(maxsize=256)
def _compiled(root: Node, exact: bool) -> Callable:
    return _compile(root, exact)


_RAW_NEG_INF = float("-inf")


def exact_raw(f: WelfareExpr, x: Sequence):
    """Exact welfare as a bare int/Fraction, or ``float('-inf')``.

    Cheap to compare in bulk; :func:`evaluate` wraps the same value.
    """
    # ints stay ints: exact, and much cheaper than Fraction
    vector = [x_i if isinstance(x_i, (int, Fraction)) else Fraction(x_i) for x_i in x]
    result = _compiled(f.root, True)(vector)
    return _RAW_NEG_INF if result is NEG_INF else result


def evaluate(f: WelfareExpr, x: Sequence, backend: Backend | str | None = None) -> ExtendedValue:
    """Welfare of utility vector ``x``.

    ``backend`` defaults to exact arithmetic when ``f`` is rational closed and
    to the 160-bit float context otherwise.
    """
    if backend is None:
        backend = Backend.EXACT if f.rational_closed else Backend.FLOAT
    backend = Backend(backend)
    if backend is Backend.EXACT:
        if not f.rational_closed:
            raise WelfareDomainError(f"{f} is not rational closed; exact evaluation impossible")
        result = exact_raw(f, x)
        if result == _RAW_NEG_INF:
            return NEG_INFINITY
        return finite(Fraction(result), Backend.EXACT)
    vector = [_as_mpf(Fraction(x_i) if isinstance(x_i, int) else x_i) for x_i in x]
    result = _compiled(f.root, False)(vector)
    if result is NEG_INF:
        return ExtendedValue(Tag.NEG_INFINITY, None, Backend.FLOAT)
    result = _as_mpf(result)
    if not _ctx.isfinite(result):
        raise WelfareDomainError(f"non-finite result {result}")
    return finite(result, Backend.FLOAT)


# -- comparison ----------------------------------------------------------------


class Ordering(enum.IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


@dataclass(frozen=True)
class ComparisonResult:
    ordering: Ordering
    left: ExtendedValue
    right: ExtendedValue
    backend: Backend
    tolerance: Fraction | None = None


def compare_values(a: ExtendedValue, b: ExtendedValue) -> ComparisonResult:
    """Three-way comparison. Exact when both sides are exact; otherwise values
    within ``2^-64 * max(1, |a|, |b|)`` compare EQUAL and the tolerance is
    recorded on the result."""
    if a.backend is Backend.EXACT and b.backend is Backend.EXACT:
        return ComparisonResult(Ordering(_cmp_raw(a, b)), a, b, Backend.EXACT)
    if a.is_neg_inf or b.is_neg_inf:
        order = Ordering(_cmp_raw(a, b))
    else:
        x, y = _as_mpf(a.value), _as_mpf(b.value)
        scale = max(_ctx.mpf(1), abs(x), abs(y))
        if abs(x - y) <= _as_mpf(FLOAT_TOLERANCE) * scale:
            order = Ordering.EQUAL
        else:
            order = Ordering.LESS if x < y else Ordering.GREATER
    return ComparisonResult(order, a, b, Backend.FLOAT, FLOAT_TOLERANCE)


def compare(f: WelfareExpr, x: Sequence, y: Sequence) -> ComparisonResult:
    if len(x) != len(y):
        raise ValueError("utility vectors differ in length")
    return compare_values(evaluate(f, x), evaluate(f, y))


# -- MNW ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class MnwKey:
    """Lexicographic MNW score: more positive agents first, then their product."""

    positive_count: int
    positive_product: Fraction

    def __str__(self):
        return f"({self.positive_count}, {self.positive_product})"


def mnw_key(x: Sequence) -> MnwKey:
    count = 0
    product = Fraction(1)
    for x_i in x:
        if x_i < 0:
            raise ValueError("utilities must be nonnegative")
        if x_i > 0:
            count += 1
            product *= x_i
    return MnwKey(count, product)

"""Expression nodes over jet coordinates ``y{i}_{r}``.

Nodes are hash-consed: building the same tree twice returns the same
object, so identity comparison is structural comparison and shared
subtrees are evaluated and differentiated once.
"""
from __future__ import annotations

import sys
from fractions import Fraction
from numbers import Rational

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))

_TABLE: dict = {}
_DIFF_CACHE: dict = {}


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to a rational constant")


def as_expr(x) -> "Expr":
    if isinstance(x, Expr):
        return x
    return Const(x)


class Expr:
    """Immutable scalar expression. Build with the module constructors or
    with Python operators."""

    __slots__ = ("vars", "__weakref__")
    # filled by subclasses
    prec = 100

    def __add__(self, o):
        return add(self, as_expr(o))

    def __radd__(self, o):
        return add(as_expr(o), self)

    def __sub__(self, o):
        return sub(self, as_expr(o))

    def __rsub__(self, o):
        return sub(as_expr(o), self)

    def __mul__(self, o):
        return mul(self, as_expr(o))

    def __rmul__(self, o):
        return mul(as_expr(o), self)

    def __truediv__(self, o):
        return div(self, as_expr(o))

    def __rtruediv__(self, o):
        return div(as_expr(o), self)

    def __pow__(self, p):
        if isinstance(p, Const):
            p = p.value
        return power(self, p)

    def __neg__(self):
        return neg(self)

    def __pos__(self):
        return self

    def __str__(self):
        return to_string(self)

    @property
    def order(self) -> int:
        """Highest derivative level appearing, -1 for constants."""
        return max((r for _, r in self.vars), default=-1)

    @property
    def dim(self) -> int:
        return max((i for i, _ in self.vars), default=0)

    def is_zero(self) -> bool:
        return isinstance(self, Const) and self.value == 0

    def is_one(self) -> bool:
        return isinstance(self, Const) and self.value == 1


class Const(Expr):
    __slots__ = ("value",)
    prec = 100

    def __new__(cls, value):
        v = _frac(value)
        key = ("c", v)
        node = _TABLE.get(key)
        if node is None:
            node = object.__new__(cls)
            node.value = v
            node.vars = frozenset()
            _TABLE[key] = node
        return node

    def __repr__(self):
        return f"Const({self.value})"


class Var(Expr):
    """Jet coordinate y^i_r; component ``i`` is 1-based, level ``r`` 0-based."""

    __slots__ = ("i", "r")

    def __new__(cls, i: int, r: int):
        i, r = int(i), int(r)
        if i < 1 or r < 0:
            raise ValueError(f"bad coordinate index y{i}_{r}")
        key = ("v", i, r)
        node = _TABLE.get(key)
        if node is None:
            node = object.__new__(cls)
            node.i, node.r = i, r
            node.vars = frozenset([(i, r)])
            _TABLE[key] = node
        return node

    def __repr__(self):
        return f"Var({self.i}, {self.r})"


class _Binary(Expr):
    __slots__ = ("a", "b")
    tag = "?"

    def __new__(cls, a: Expr, b: Expr):
        key = (cls.tag, a, b)
        node = _TABLE.get(key)
        if node is None:
            node = object.__new__(cls)
            node.a, node.b = a, b
            node.vars = a.vars | b.vars
            _TABLE[key] = node
        return node

    def __repr__(self):
        return f"{type(self).__name__}({self.a!r}, {self.b!r})"


class Add(_Binary):
    __slots__ = ()
    tag = "+"
    prec = 1


class Sub(_Binary):
    __slots__ = ()
    tag = "-"
    prec = 1


class Mul(_Binary):
    __slots__ = ()
    tag = "*"
    prec = 2


class Div(_Binary):
    __slots__ = ()
    tag = "/"
    prec = 2


class Pow(Expr):
    __slots__ = ("base", "exp")
    prec = 4

    def __new__(cls, base: Expr, exp):
        e = _frac(exp)
        key = ("^", base, e)
        node = _TABLE.get(key)
        if node is None:
            node = object.__new__(cls)
            node.base, node.exp = base, e
            node.vars = base.vars
            _TABLE[key] = node
        return node

    def __repr__(self):
        return f"Pow({self.base!r}, {self.exp})"


ZERO = Const(0)
ONE = Const(1)


# -- smart constructors: constant folding and 0/1 identities only ----------

def add(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if a.is_zero():
        return b
    if b.is_zero():
        return a
    return Add(a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    if b.is_zero():
        return a
    if a is b:
        return ZERO
    if a.is_zero():
        return neg(b)
    return Sub(a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if isinstance(b, Const) and not isinstance(a, Const):
        a, b = b, a
    if isinstance(a, Const):
        if isinstance(b, Const):
            return Const(a.value * b.value)
        if a.value == 0:
            return ZERO
        if a.value == 1:
            return b
        if isinstance(b, Mul) and isinstance(b.a, Const):
            return mul(Const(a.value * b.a.value), b.b)
    if b.is_one():
        return a
    return Mul(a, b)


def div(a: Expr, b: Expr) -> Expr:
    if isinstance(b, Const):
        if b.value == 0:
            raise ZeroDivisionError("division by constant zero")
        return mul(Const(1 / b.value), a)
    if a.is_zero():
        return ZERO
    if a is b:
        return ONE
    return Div(a, b)


def neg(a: Expr) -> Expr:
    return mul(Const(-1), a)


def power(base: Expr, exp) -> Expr:
    e = _frac(exp)
    if e == 0:
        return ONE
    if e == 1:
        return base
    if isinstance(base, Const):
        if base.value == 1:
            return ONE
        if e.denominator == 1 and (base.value != 0 or e > 0):
            return Const(base.value ** int(e))
    if isinstance(base, Pow) and e.denominator == 1:
        return power(base.base, base.exp * e)
    return Pow(base, e)


def sqrt(x) -> Expr:
    return power(as_expr(x), Fraction(1, 2))


def balanced_sum(terms) -> Expr:
    """Sum with logarithmic tree depth."""
    terms = [as_expr(t) for t in terms]
    terms = [t for t in terms if not t.is_zero()]
    if not terms:
        return ZERO
    while len(terms) > 1:
        nxt = [add(terms[k], terms[k + 1]) for k in range(0, len(terms) - 1, 2)]
        if len(terms) % 2:
            nxt.append(terms[-1])
        terms = nxt
    return terms[0]


# -- traversal helpers ------------------------------------------------------

def children(e: Expr):
    if isinstance(e, _Binary):
        return (e.a, e.b)
    if isinstance(e, Pow):
        return (e.base,)
    return ()


def topo_order(roots) -> list:
    """Distinct nodes reachable from ``roots``, children before parents."""
    seen = set()
    out = []
    stack = [(r, False) for r in reversed(list(roots))]
    while stack:
        node, done = stack.pop()
        if done:
            out.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for c in reversed(children(node)):
            if id(c) not in seen:
                stack.append((c, False))
    return out


def size(e: Expr) -> int:
    """Number of distinct DAG nodes."""
    return len(topo_order([e]))


# -- calculus ---------------------------------------------------------------

def diff(e: Expr, i: int, r: int) -> Expr:
    """Exact partial derivative with respect to y^i_r."""
    key = (i, r)
    if key not in e.vars:
        return ZERO
    # iterative over the topological order so deep trees are fine
    for node in topo_order([e]):
        ck = (node, i, r)
        if ck in _DIFF_CACHE:
            continue
        if key not in node.vars:
            _DIFF_CACHE[ck] = ZERO
            continue
        _DIFF_CACHE[ck] = _diff_node(node, i, r)
    return _DIFF_CACHE[(e, i, r)]


def _d(node, i, r):
    if (i, r) not in node.vars:
        return ZERO
    return _DIFF_CACHE[(node, i, r)]


def _diff_node(node, i, r):
    if isinstance(node, Var):
        return ONE
    if isinstance(node, Add):
        return add(_d(node.a, i, r), _d(node.b, i, r))
    if isinstance(node, Sub):
        return sub(_d(node.a, i, r), _d(node.b, i, r))
    if isinstance(node, Mul):
        return add(mul(_d(node.a, i, r), node.b), mul(node.a, _d(node.b, i, r)))
    if isinstance(node, Div):
        da, db = _d(node.a, i, r), _d(node.b, i, r)
        return sub(div(da, node.b), div(mul(node.a, db), power(node.b, 2)))
    if isinstance(node, Pow):
        db = _d(node.base, i, r)
        return mul(mul(Const(node.exp), power(node.base, node.exp - 1)), db)
    raise TypeError(node)


def subst(e: Expr, bindings) -> Expr:
    """Simultaneous substitution ``{(i, r): Expr}``."""
    bindings = {k: as_expr(v) for k, v in dict(bindings).items()}
    keys = frozenset(bindings)
    if not (e.vars & keys):
        return e
    memo: dict = {}
    for node in topo_order([e]):
        if not (node.vars & keys):
            memo[node] = node
        elif isinstance(node, Var):
            memo[node] = bindings[(node.i, node.r)]
        elif isinstance(node, Pow):
            memo[node] = power(memo[node.base], node.exp)
        else:
            a, b = memo[node.a], memo[node.b]
            memo[node] = {Add: add, Sub: sub, Mul: mul, Div: div}[type(node)](a, b)
    return memo[e]


# -- printing ---------------------------------------------------------------

def _const_str(v: Fraction) -> str:
    if v.denominator == 1:
        s = str(v.numerator)
        return f"({s})" if v < 0 else s
    return f"({v.numerator}/{v.denominator})"


def to_string(e: Expr) -> str:
    """Render in the parser's grammar; the output re-parses to ``e``."""
    memo: dict = {}
    for node in topo_order([e]):
        memo[node] = _render(node, memo)
    return memo[e]


def _wrap(child, text, prec, right=False):
    cp = child.prec
    if cp < prec or (right and cp == prec):
        return f"({text})"
    return text


def _render(node, memo):
    if isinstance(node, Const):
        return _const_str(node.value)
    if isinstance(node, Var):
        return f"y{node.i}_{node.r}"
    if isinstance(node, Pow):
        base = memo[node.base]
        if not isinstance(node.base, Var):
            base = f"({base})"
        p = node.exp
        if p.denominator != 1:
            ps = f"({p.numerator}/{p.denominator})"
        elif p > 0:
            ps = str(p.numerator)
        else:
            ps = f"({p.numerator})"
        return f"{base}^{ps}"
    op = node.tag
    left = _wrap(node.a, memo[node.a], node.prec)
    right = _wrap(node.b, memo[node.b], node.prec, right=True)
    return f"{left} {op} {right}"

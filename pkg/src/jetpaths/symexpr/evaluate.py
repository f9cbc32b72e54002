"""Numerical evaluation of expressions.

Expressions are compiled once into straight-line Python (one temporary per
distinct DAG node). The same source is bound twice: against ``math`` for
strict scalar evaluation, which raises on domain errors, and against
``numpy`` for batched evaluation, which yields nan/inf instead.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .core import Add, Const, Div, Expr, Mul, Pow, Sub, Var, topo_order


class EvalError(ArithmeticError):
    """Raised by strict evaluation: division by zero, negative base under a
    fractional power, or a non-finite result."""


_COMPILED: dict = {}


def _scalar_fpow(x, p):
    if x < 0:
        raise EvalError(f"negative base {x!r} under fractional power {p}")
    if x == 0 and p < 0:
        raise EvalError("division by zero")
    return math.pow(x, p)


def _vector_fpow(x, p):
    return np.power(x, p)


class Compiled:
    """A tuple of expressions compiled for repeated evaluation."""

    def __init__(self, exprs):
        self.exprs = tuple(exprs)
        self.order = max((e.order for e in self.exprs), default=-1)
        self.dim = max((e.dim for e in self.exprs), default=0)
        src = _generate(self.exprs)
        code = compile(src, "<jetpaths-expr>", "exec")
        ns_s = {"_fpow": _scalar_fpow, "_sqrt": _scalar_sqrt}
        ns_v = {"_fpow": _vector_fpow, "_sqrt": np.sqrt}
        exec(code, ns_s)
        exec(code, ns_v)
        self._scalar = ns_s["_f"]
        self._vector = ns_v["_f"]
        self.source = src

    def _check_shape(self, rows, cols):
        if rows <= self.order:
            raise ValueError(f"point has levels 0..{rows - 1} but expression needs level {self.order}")
        if cols < self.dim:
            raise ValueError(f"point has {cols} components but expression needs {self.dim}")

    def scalar(self, point) -> tuple:
        """Evaluate at one point given as an (N+1, m) array; strict."""
        arr = np.asarray(getattr(point, "coords", point), dtype=float)
        self._check_shape(*arr.shape)
        try:
            with np.errstate(all="raise"):
                out = self._scalar(arr.tolist())
        except ZeroDivisionError as exc:
            raise EvalError("division by zero") from exc
        except (OverflowError, FloatingPointError, ValueError) as exc:
            raise EvalError(str(exc)) from exc
        for v in out:
            if not math.isfinite(v):
                raise EvalError("non-finite value")
        return tuple(float(v) for v in out)

    def unchecked(self, rows):
        """Fast path for integrators: ``rows`` is an (N+1, m) float array
        already known to have the right shape. Returns an ndarray; invalid
        points give nan or inf."""
        with np.errstate(all="ignore"):
            return np.array(self._vector(rows), dtype=float)

    def batch(self, points) -> np.ndarray:
        """Evaluate at K points of shape (K, N+1, m); returns (len(exprs), K).

        Invalid points give nan or inf rather than raising."""
        arr = np.asarray(points, dtype=float)
        self._check_shape(arr.shape[1], arr.shape[2])
        yt = np.moveaxis(arr, 0, -1)  # (N+1, m, K)
        with np.errstate(all="ignore"):
            out = self._vector(yt)
        k = arr.shape[0]
        return np.array([np.broadcast_to(np.asarray(v, dtype=float), (k,)) for v in out])


def _scalar_sqrt(x):
    if x < 0:
        raise EvalError(f"negative base {x!r} under fractional power 1/2")
    return math.sqrt(x)


def _num(v: Fraction) -> str:
    return repr(float(v))


def _generate(exprs) -> str:
    lines = ["def _f(Y):"]
    names = {}
    for k, node in enumerate(topo_order(exprs)):
        name = f"t{k}"
        names[id(node)] = name
        if isinstance(node, Const):
            rhs = _num(node.value)
        elif isinstance(node, Var):
            rhs = f"Y[{node.r}][{node.i - 1}]"
        elif isinstance(node, Pow):
            b = names[id(node.base)]
            p = node.exp
            if p.denominator == 1:
                q = int(p)
                rhs = f"{b} ** {q}" if q > 0 else f"1.0 / ({b} ** {-q})"
            elif p == Fraction(1, 2):
                rhs = f"_sqrt({b})"
            else:
                rhs = f"_fpow({b}, {_num(p)})"
        else:
            op = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[type(node)]
            rhs = f"{names[id(node.a)]} {op} {names[id(node.b)]}"
        lines.append(f"    {name} = {rhs}")
    lines.append("    return (" + "".join(names[id(e)] + ", " for e in exprs) + ")")
    return "\n".join(lines) + "\n"


def compile_exprs(exprs) -> Compiled:
    exprs = tuple(exprs)
    c = _COMPILED.get(exprs)
    if c is None:
        c = Compiled(exprs)
        _COMPILED[exprs] = c
    return c


def evaluate(e: Expr, point) -> float:
    """Strict double-precision value of ``e`` at a jet point.

    Raises :class:`EvalError` on division by zero or a negative base under
    a fractional power."""
    return compile_exprs((e,)).scalar(point)[0]


def evaluate_batch(exprs, points) -> np.ndarray:
    return compile_exprs(tuple(exprs)).batch(points)

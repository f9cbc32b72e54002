"""Exact symbolic scalars over jet coordinates y^i_r."""
from .core import (
    Add,
    Const,
    Div,
    Expr,
    Mul,
    ONE,
    Pow,
    Sub,
    Var,
    ZERO,
    as_expr,
    balanced_sum,
    diff,
    power,
    size,
    sqrt,
    subst,
    to_string,
)
from .evaluate import EvalError, compile_exprs, evaluate, evaluate_batch
from .parser import ExprSyntaxError, IndexRangeError, parse
from .sampling import (
    EqualityResult,
    SampleConfig,
    equal_prob,
    equal_prob_many,
    is_zero_prob,
    rel_residual,
    sample_points,
    valid_samples,
)

# ``eval`` is the operation name used throughout the docs
eval = evaluate  # noqa: A001


def dot(u, v) -> Expr:
    """Euclidean pairing of two equal-length sequences of expressions."""
    return balanced_sum(a * b for a, b in zip(u, v))


def row(r: int, m: int) -> list:
    """The level-r coordinates [y1_r, ..., ym_r]."""
    return [Var(i, r) for i in range(1, m + 1)]

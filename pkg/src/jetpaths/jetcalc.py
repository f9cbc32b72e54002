"""Calculus on the jet bundles T^N R^m in the global coordinates y^i_r.

Vector fields and 1-forms are sparse maps from a coordinate index
``(i, r)`` to an :class:`~jetpaths.symexpr.Expr` coefficient.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

import numpy as np

from .jetgroup import JetElement, bell
from .symexpr import (
    ONE,
    ZERO,
    Expr,
    SampleConfig,
    Var,
    as_expr,
    balanced_sum,
    diff,
    equal_prob_many,
    evaluate_batch,
    subst,
)


@dataclass(frozen=True)
class JetPoint:
    """A point of T^N R^m stored as an (N+1, m) array; row r holds
    ``(y^1_r, ..., y^m_r)``."""

    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords)
        if c.dtype != object:
            c = c.astype(float)
        if c.ndim != 2:
            raise ValueError("jet point coordinates must be a 2-d array")
        object.__setattr__(self, "coords", c)

    @property
    def order(self) -> int:
        return self.coords.shape[0] - 1

    @property
    def m(self) -> int:
        return self.coords.shape[1]

    @property
    def slit(self) -> bool:
        return self.order >= 1 and bool(np.linalg.norm(self.coords[1].astype(float)) > 0)

    def row(self, r: int) -> np.ndarray:
        return self.coords[r]

    def truncate(self, n: int) -> "JetPoint":
        return JetPoint(self.coords[: n + 1])

    @classmethod
    def from_flat(cls, values, m: int) -> "JetPoint":
        """Build from row-major values ``y1_0, y2_0, ..., ym_0, y1_1, ...``."""
        v = np.asarray(values, dtype=float)
        if v.size % m:
            raise ValueError(f"{v.size} values do not fill rows of length {m}")
        return cls(v.reshape(-1, m))


def symbolic_point(n: int, m: int) -> np.ndarray:
    """(n+1, m) object array of the coordinate symbols."""
    out = np.empty((n + 1, m), dtype=object)
    for r in range(n + 1):
        for i in range(m):
            out[r, i] = Var(i + 1, r)
    return out


def _coords(p):
    return p.coords if isinstance(p, JetPoint) else np.asarray(p)


def act(eta, p):
    """Right action of L^n on T^n: the jet of ``gamma o phi``.

    Level 0 is fixed and ``(R_eta y)_r = sum_{q<=r} y_q B_r^q(eta)``.
    Works on numeric or symbolic coordinates; returns the same kind as ``p``.
    """
    eta = eta if isinstance(eta, JetElement) else JetElement(tuple(eta))
    y = _coords(p)
    n = y.shape[0] - 1
    if eta.order != n:
        raise ValueError(f"order mismatch: group order {eta.order}, jet order {n}")
    out = np.empty_like(y)
    out[0] = y[0]
    for r in range(1, n + 1):
        acc = None
        for q in range(1, r + 1):
            t = y[q] * bell(r, q, eta.coords)
            acc = t if acc is None else acc + t
        out[r] = acc
    return JetPoint(out) if isinstance(p, JetPoint) else out


def solve_action(p, q) -> JetElement:
    """The unique eta with ``act(eta, p) = q`` for slit p on the same orbit.

    Level by level, ``eta_r`` enters only through ``y_1 B_r^1 = y_1 eta_r``;
    the equation is solved in the least-squares sense along ``y_1``.
    """
    y, z = np.asarray(_coords(p), float), np.asarray(_coords(q), float)
    n = y.shape[0] - 1
    y1 = y[1]
    nn = float(y1 @ y1)
    if nn == 0:
        raise ValueError("point is not in the slit bundle")
    eta = [float(z[1] @ y1) / nn]
    for r in range(2, n + 1):
        trial = eta + [0.0] * (n - len(eta))
        rest = sum(y[k] * bell(r, k, trial) for k in range(2, r + 1))
        eta.append(float((z[r] - rest) @ y1) / nn)
    return JetElement(tuple(eta))


class VectorField:
    """Vector field on T^N R^m with Expr components keyed by ``(i, r)``."""

    def __init__(self, comps: dict, m: int, order: int):
        self.comps = {k: as_expr(v) for k, v in comps.items() if not as_expr(v).is_zero()}
        self.m = m
        self.order = order

    def __call__(self, f: Expr) -> Expr:
        return apply_vf(self, f)

    def __getitem__(self, key) -> Expr:
        return self.comps.get(key, ZERO)

    def __add__(self, other):
        keys = set(self.comps) | set(other.comps)
        return VectorField({k: self[k] + other[k] for k in keys}, self.m, max(self.order, other.order))

    def __sub__(self, other):
        keys = set(self.comps) | set(other.comps)
        return VectorField({k: self[k] - other[k] for k in keys}, self.m, max(self.order, other.order))

    def scale(self, f) -> "VectorField":
        f = as_expr(f)
        return VectorField({k: f * v for k, v in self.comps.items()}, self.m, self.order)

    def keys(self):
        return [(i, r) for r in range(self.order + 1) for i in range(1, self.m + 1)]

    def at(self, point) -> np.ndarray:
        """Numeric components at a point, as an (order+1, m) array."""
        keys = self.keys()
        c = np.asarray(_coords(point), float)
        vals = evaluate_batch([self[k] for k in keys], c[None])[:, 0]
        return vals.reshape(self.order + 1, self.m)


def apply_vf(v: VectorField, f: Expr) -> Expr:
    """Derivative of ``f`` along ``v``: ``sum V^i_r df/dy^i_r``."""
    f = as_expr(f)
    terms = [v.comps[k] * diff(f, *k) for k in sorted(f.vars) if k in v.comps]
    return balanced_sum(terms)


def vf_bracket(v: VectorField, w: VectorField) -> VectorField:
    keys = set(v.comps) | set(w.comps)
    m = max(v.m, w.m)
    order = max(v.order, w.order)
    return VectorField({k: apply_vf(v, w[k]) - apply_vf(w, v[k]) for k in keys}, m, order)


def delta_field(n: int, r: int, m: int) -> VectorField:
    """Fundamental field of delta^r on T^n R^m:
    ``sum_{s=r}^n s!/(s-r)! y^i_{s+1-r} d/dy^i_s``."""
    if not 1 <= r <= n:
        raise IndexError(f"need 1 <= r <= n, got r={r}, n={n}")
    comps = {}
    for s in range(r, n + 1):
        c = Fraction(factorial(s), factorial(s - r))
        for i in range(1, m + 1):
            comps[(i, s)] = c * Var(i, s + 1 - r)
    return VectorField(comps, m, n)


def vf_equal(v: VectorField, w: VectorField, cfg: SampleConfig = SampleConfig()):
    keys = sorted(set(v.comps) | set(w.comps))
    if not keys:
        return equal_prob_many([(ZERO, ZERO)], cfg)
    m = max(v.m, w.m)
    order = max(v.order, w.order, max(max(v[k].order, w[k].order) for k in keys), 1)
    return equal_prob_many([(v[k], w[k]) for k in keys], cfg, order=order, m=m)


def invariant_field(r: int, n: int) -> VectorField:
    """Left-invariant field delta^r on L^n, with the group coordinate y_s
    written as ``Var(1, s)``."""
    comps = {}
    for s in range(r, n + 1):
        comps[(1, s)] = Fraction(factorial(s), factorial(s - r)) * Var(1, s + 1 - r)
    return VectorField(comps, 1, n)


def invariant_field_from_group(r: int, n: int) -> VectorField:
    """delta^r obtained directly from the group law: the image of
    ``r! d/dy_r`` at the identity under left translation.

    The point y uses ``Var(1, s)``; the right factor eta uses ``Var(2, s)``
    and is set to the identity after differentiating.
    """
    y = [Var(1, s) for s in range(1, n + 1)]
    eta = [Var(2, s) for s in range(1, n + 1)]
    ident = {(2, 1): ONE, **{(2, s): ZERO for s in range(2, n + 1)}}
    comps = {}
    for s in range(1, n + 1):
        prod = balanced_sum(y[p - 1] * bell(s, p, eta) for p in range(1, s + 1))
        comps[(1, s)] = factorial(r) * subst(diff(prod, 2, r), ident)
    return VectorField(comps, 1, n)


# -- total derivative and forms --------------------------------------------

def total_derivative(f: Expr) -> Expr:
    """``d_T f = sum y^i_{r+1} df/dy^i_r``; raises the order by one."""
    f = as_expr(f)
    return balanced_sum(Var(i, r + 1) * diff(f, i, r) for i, r in sorted(f.vars))


def total_field(n: int, m: int) -> VectorField:
    """d_T truncated to a vector field on T^n (components on levels 0..n-1)."""
    return VectorField({(i, r): Var(i, r + 1) for r in range(n) for i in range(1, m + 1)}, m, n)


class OneForm:
    """``sum a_{i,r} dy^i_r`` with Expr coefficients."""

    def __init__(self, comps: dict):
        self.comps = {k: as_expr(v) for k, v in comps.items() if not as_expr(v).is_zero()}

    def __getitem__(self, key) -> Expr:
        return self.comps.get(key, ZERO)

    def __add__(self, other):
        keys = set(self.comps) | set(other.comps)
        return OneForm({k: self[k] + other[k] for k in keys})

    def __sub__(self, other):
        keys = set(self.comps) | set(other.comps)
        return OneForm({k: self[k] - other[k] for k in keys})

    def __rmul__(self, c):
        c = as_expr(c)
        return OneForm({k: c * v for k, v in self.comps.items()})

    def __neg__(self):
        return OneForm({k: -v for k, v in self.comps.items()})

    @property
    def order(self) -> int:
        """Highest level among indices and coefficient variables."""
        lv = [r for _, r in self.comps] + [v.order for v in self.comps.values()]
        return max(lv, default=0)

    @property
    def m(self) -> int:
        return max([i for i, _ in self.comps] + [v.dim for v in self.comps.values()], default=1)

    def __repr__(self):
        body = " + ".join(f"({v}) dy{i}_{r}" for (i, r), v in sorted(self.comps.items(), key=lambda t: (t[0][1], t[0][0])))
        return f"OneForm({body or '0'})"


def d(f: Expr) -> OneForm:
    """Exterior derivative of a function."""
    f = as_expr(f)
    return OneForm({k: diff(f, *k) for k in f.vars})


def s_oneform(alpha: OneForm) -> OneForm:
    """Vertical endomorphism: ``a dy^i_r`` becomes ``r a dy^i_{r-1}``."""
    out: dict = {}
    for (i, r), a in alpha.comps.items():
        if r >= 1:
            out[(i, r - 1)] = out.get((i, r - 1), ZERO) + r * a
    return OneForm(out)


def s_power(alpha: OneForm, k: int) -> OneForm:
    for _ in range(k):
        alpha = s_oneform(alpha)
    return alpha


def dT_oneform(alpha: OneForm) -> OneForm:
    """Leibniz extension of d_T: ``a dy^i_r`` becomes
    ``(d_T a) dy^i_r + a dy^i_{r+1}``."""
    out: dict = {}
    for (i, r), a in alpha.comps.items():
        out[(i, r)] = out.get((i, r), ZERO) + total_derivative(a)
        out[(i, r + 1)] = out.get((i, r + 1), ZERO) + a
    return OneForm(out)


def dT_power(alpha: OneForm, k: int) -> OneForm:
    for _ in range(k):
        alpha = dT_oneform(alpha)
    return alpha


def i_total(alpha: OneForm) -> Expr:
    """Contraction with the total derivative, a function one order up."""
    return balanced_sum(a * Var(i, r + 1) for (i, r), a in sorted(alpha.comps.items()))


def contract(alpha: OneForm, v: VectorField) -> Expr:
    return balanced_sum(a * v[k] for k, a in sorted(alpha.comps.items()))


def contract_total(alpha: OneForm, p) -> float:
    """Numeric ``i_T alpha`` at a point of one order above alpha."""
    c = np.asarray(_coords(p), float)
    return float(evaluate_batch([i_total(alpha)], c[None])[0, 0])


def form_equal(a: OneForm, b: OneForm, cfg: SampleConfig = SampleConfig(), order=None, m=None):
    keys = sorted(set(a.comps) | set(b.comps))
    if not keys:
        return equal_prob_many([(ZERO, ZERO)], cfg)
    if order is None:
        order = max(a.order, b.order, 1)
    if m is None:
        m = max(a.m, b.m)
    return equal_prob_many([(a[k], b[k]) for k in keys], cfg, order=order, m=m)

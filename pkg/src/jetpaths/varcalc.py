"""Parametric Lagrangians: Zermelo conditions, Hilbert form, Euler-Lagrange
form, regularity of d(theta) and Euler-Lagrange fields.

For a Lagrangian L of order n on T^n R^m:

    theta = sum_{p=0}^{n-1} (-1)^p/(p+1)! d_T^p S^{p+1} dL     (on T^{2n-1})
    eps   = sum_{p=0}^{n}   (-1)^p/p!     d_T^p S^p     dL     (on T^{2n})
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import factorial

import numpy as np

from .homog import DEField
from .jetcalc import (
    OneForm,
    d,
    dT_oneform,
    dT_power,
    delta_field,
    form_equal,
    i_total,
    s_oneform,
    s_power,
    total_derivative,
)
from .symexpr import (
    Expr,
    SampleConfig,
    Var,
    ZERO,
    as_expr,
    balanced_sum,
    compile_exprs,
    diff,
    equal_prob,
    equal_prob_many,
    rel_residual,
    sample_points,
    subst,
    valid_samples,
)


class Lagrangian:
    """Lagrangian of order n on the slit bundle of T^n R^m.

    Derived objects (Hilbert form, Euler-Lagrange form) are built lazily
    and cached on the instance."""

    def __init__(self, m: int, n: int, L):
        self.m = m
        self.n = n
        self.L = as_expr(L)
        if self.L.order > n or self.L.dim > m:
            raise ValueError(f"L does not live on T^{n} R^{m}")

    def __repr__(self):
        return f"Lagrangian(m={self.m}, n={self.n}, L={self.L})"

    @cached_property
    def dL(self) -> OneForm:
        return d(self.L)

    @cached_property
    def hilbert(self) -> OneForm:
        return hilbert_form(self)

    @cached_property
    def el(self) -> OneForm:
        return el_form(self)

    @cached_property
    def el_classical(self) -> list:
        return el_classical(self)

    @cached_property
    def theta_partials(self) -> dict:
        """``d theta_b / d y_a`` for all coordinates a, b of T^{2n-1}."""
        th = self.hilbert
        keys = coords(2 * self.n - 1, self.m)
        return {(a, b): diff(th[b], *a) for a in keys for b in keys}


def coords(order: int, m: int) -> list:
    """Coordinate keys of T^order R^m in row-major jet order."""
    return [(i, r) for r in range(order + 1) for i in range(1, m + 1)]


def zermelo_check(lag: Lagrangian, cfg: SampleConfig = SampleConfig()) -> dict:
    """Residuals of ``Delta^1 L = L`` (key 1) and ``Delta^r L = 0`` (key r)."""
    out = {}
    for r in range(1, lag.n + 1):
        dr = delta_field(lag.n, r, lag.m)(lag.L)
        target = lag.L if r == 1 else ZERO
        out[r] = equal_prob(dr, target, cfg, order=lag.n, m=lag.m).max_residual
    return out


def hilbert_form(lag: Lagrangian) -> OneForm:
    n = lag.n
    total = OneForm({})
    for p in range(n):
        term = dT_power(s_power(lag.dL, p + 1), p)
        total = total + Fraction((-1) ** p, factorial(p + 1)) * term
    return total


def el_form(lag: Lagrangian) -> OneForm:
    """Euler-Lagrange form as the full sum of forms; all components are
    kept so horizontality can be checked."""
    n = lag.n
    total = OneForm({})
    for p in range(n + 1):
        term = dT_power(s_power(lag.dL, p), p)
        total = total + Fraction((-1) ** p, factorial(p)) * term
    return total


def el_from_hilbert(lag: Lagrangian) -> OneForm:
    """``dL - d_T theta``, the defining expression."""
    return lag.dL - dT_oneform(lag.hilbert)


def el_classical(lag: Lagrangian) -> list:
    """``eps_i = sum_p (-1)^p d_T^p (dL/dy^i_p)``, computed without forms."""
    out = []
    for i in range(1, lag.m + 1):
        terms = []
        for p in range(lag.n + 1):
            t = diff(lag.L, i, p)
            for _ in range(p):
                t = total_derivative(t)
            terms.append(t if p % 2 == 0 else -t)
        out.append(balanced_sum(terms))
    return out


@dataclass
class ELReport:
    eps: list
    horizontality: float
    s_eps: float
    classical_vs_form: float
    i_t_theta: float
    i_t_dtheta: float


def horizontality_residual(lag: Lagrangian, cfg: SampleConfig = SampleConfig()) -> float:
    """Largest sampled non-(i,0) component of eps."""
    eps = lag.el
    extra = [v for (i, r), v in eps.comps.items() if r > 0]
    if not extra:
        return 0.0
    return equal_prob_many([(v, 0) for v in extra], cfg, order=2 * lag.n, m=lag.m).max_residual


def s_eps_residual(lag: Lagrangian, cfg: SampleConfig = SampleConfig()) -> float:
    return form_equal(s_oneform(lag.el), OneForm({}), cfg, order=2 * lag.n, m=lag.m).max_residual


def classical_vs_form(lag: Lagrangian, cfg: SampleConfig = SampleConfig()) -> float:
    pairs = [(lag.el[(i, 0)], e) for i, e in enumerate(lag.el_classical, 1)]
    return equal_prob_many(pairs, cfg, order=2 * lag.n, m=lag.m).max_residual


def i_t_theta_residual(lag: Lagrangian, cfg: SampleConfig = SampleConfig()) -> float:
    return equal_prob(i_total(lag.hilbert), lag.L, cfg, order=2 * lag.n, m=lag.m).max_residual


def dtheta_matrix(lag: Lagrangian, point) -> np.ndarray:
    """Skew matrix ``W[a, b] = d theta_b/d y_a - d theta_a/d y_b`` at a point
    of T^{2n-1} (extra rows of ``point`` are ignored)."""
    n, m = lag.n, lag.m
    keys = coords(2 * n - 1, m)
    parts = lag.theta_partials
    exprs = [parts[(a, b)] for a in keys for b in keys]
    y = np.asarray(getattr(point, "coords", point), float)[: 2 * n]
    vals = compile_exprs(tuple(exprs)).batch(y[None])[:, 0]
    P = vals.reshape(len(keys), len(keys))
    return P - P.T


def dtheta_matrices(lag: Lagrangian, points) -> np.ndarray:
    """Batched :func:`dtheta_matrix` for points of shape (K, >=2n, m)."""
    n, m = lag.n, lag.m
    keys = coords(2 * n - 1, m)
    parts = lag.theta_partials
    exprs = [parts[(a, b)] for a in keys for b in keys]
    pts = np.asarray(points, float)[:, : 2 * n]
    vals = compile_exprs(tuple(exprs)).batch(pts)  # (D*D, K)
    D = len(keys)
    P = vals.T.reshape(-1, D, D)
    return P - np.transpose(P, (0, 2, 1))


def check_iT_dtheta(lag: Lagrangian, cfg: SampleConfig = SampleConfig()) -> float:
    """Max relative residual of ``i_T d(theta) + eps = 0`` over samples of
    T^{2n}, comparing every component."""
    n, m = lag.n, lag.m
    keys = coords(2 * n - 1, m)
    eps = lag.el
    eps_exprs = [eps[k] for k in keys]
    pts, eps_vals = valid_samples(eps_exprs, cfg, order=2 * n, m=m)
    W = dtheta_matrices(lag, pts)
    T = pts[:, 1:, :].reshape(len(pts), -1)  # d_T direction: y_{r+1} for each (i, r)
    contracted = np.einsum("kab,ka->kb", W, T)
    res = rel_residual(contracted, -eps_vals.T)
    return float(res.max())


def el_identity_report(lag: Lagrangian, cfg: SampleConfig = SampleConfig()) -> ELReport:
    return ELReport(
        eps=lag.el_classical,
        horizontality=horizontality_residual(lag, cfg),
        s_eps=s_eps_residual(lag, cfg),
        classical_vs_form=classical_vs_form(lag, cfg),
        i_t_theta=i_t_theta_residual(lag, cfg),
        i_t_dtheta=check_iT_dtheta(lag, cfg),
    )


def _top_bindings(field_: DEField) -> dict:
    return {(i, field_.n + 1): g for i, g in enumerate(field_.gamma, 1)}


def verify_el_field(lag: Lagrangian, field_: DEField, cfg: SampleConfig = SampleConfig()) -> float:
    """Max relative residual of eps after substituting ``y_{2n} = Gamma``."""
    if field_.n != 2 * lag.n - 1 or field_.m != lag.m:
        raise ValueError(
            f"order mismatch: Lagrangian of order {lag.n} needs a field on T^{2 * lag.n - 1}, got T^{field_.n}")
    b = _top_bindings(field_)
    on_shell = [subst(e, b) for e in lag.el_classical]
    return equal_prob_many([(e, 0) for e in on_shell], cfg, order=field_.n, m=lag.m).max_residual


@dataclass
class RankReport:
    dim: int
    rank: int
    kernel_dim: int
    singular_values: np.ndarray
    kernel_residuals: dict

    @property
    def gap(self) -> float:
        """Ratio of the smallest kept singular value to the largest dropped one."""
        s = self.singular_values
        if self.rank == 0 or self.rank == len(s):
            return float("inf")
        return float(s[self.rank - 1] / max(s[self.rank], 1e-300))


def _vf_vector(comps: dict, order: int, m: int) -> np.ndarray:
    return np.array([comps.get(k, 0.0) for k in coords(order, m)])


def regularity_rank(lag: Lagrangian, point, field_: DEField | None = None, rel_threshold=1e-8) -> RankReport:
    """Numeric rank of d(theta) at a point of T^{2n-1} and the residuals of
    Delta^1..Delta^{2n-1} (and Gamma, if given) as kernel vectors."""
    n, m = lag.n, lag.m
    N = 2 * n - 1
    y = np.asarray(getattr(point, "coords", point), float)[: N + 1]
    if np.linalg.norm(y[1]) == 0:
        raise ValueError("point is outside the slit bundle")
    W = dtheta_matrix(lag, y)
    s = np.linalg.svd(W, compute_uv=False)
    smax = float(s[0]) if s.size else 0.0
    rank = int((s > rel_threshold * smax).sum()) if smax > 0 else 0
    residuals = {}
    scale = max(smax, 1e-300)
    for r in range(1, N + 1):
        v = delta_field(N, r, m).at(y).reshape(-1)
        residuals[f"Delta{r}"] = float(np.linalg.norm(v @ W) / (scale * np.linalg.norm(v)))
    if field_ is not None:
        v = field_.vector_field().at(y).reshape(-1)
        residuals["Gamma"] = float(np.linalg.norm(v @ W) / (scale * np.linalg.norm(v)))
    dim = W.shape[0]
    return RankReport(dim, rank, dim - rank, s, residuals)


@dataclass
class ELExtraction:
    particular: np.ndarray
    kernel: np.ndarray  # rows span the solution directions
    residual: float

    def contains(self, y_top, tol=1e-6) -> float:
        """Distance of ``y_top - particular`` from the kernel span, relative."""
        d = np.asarray(y_top, float) - self.particular
        if self.kernel.size:
            d = d - self.kernel.T @ (self.kernel @ d)
        return float(np.linalg.norm(d) / (1 + np.linalg.norm(y_top)))


def extract_el_field_at(lag: Lagrangian, point, tol: float = 1e-8) -> ELExtraction:
    """Solve ``eps(p, y_{2n}) = 0`` for the top jet at a point of T^{2n-1}.

    eps is affine in y_{2n}; the affine map is recovered from m+1
    evaluations, then solved in the minimum-norm sense."""
    n, m = lag.n, lag.m
    N = 2 * n - 1
    y = np.asarray(getattr(point, "coords", point), float)[: N + 1]
    if np.linalg.norm(y[1]) == 0:
        raise ValueError("point is outside the slit bundle")
    comp = compile_exprs(tuple(lag.el_classical))
    pts = np.repeat(np.vstack([y, np.zeros((1, m))])[None], m + 1, axis=0)
    for j in range(m):
        pts[j + 1, N + 1, j] = 1.0
    vals = comp.batch(pts)  # (m, m+1)
    b = vals[:, 0]
    A = vals[:, 1:] - b[:, None]
    sol, *_ = np.linalg.lstsq(A, -b, rcond=None)
    u, s, vt = np.linalg.svd(A)
    smax = s[0] if s.size else 0.0
    rank = int((s > tol * smax).sum()) if smax > 0 else 0
    kernel = vt[rank:]
    resid = float(np.linalg.norm(A @ sol + b) / (1 + np.linalg.norm(b)))
    if resid > 1e-6:
        raise ValueError(f"inconsistent Euler-Lagrange system at this point (residual {resid:.3g})")
    return ELExtraction(sol, kernel, resid)

"""Homogeneity of differential equation fields and projective equivalence.

A field of order n+1 on T^n R^m is ``y^i_{n+1} = Gamma^i(y_0, ..., y_n)``.
It is homogeneous when there are functions lambda^r with

    Delta^1(Gamma^i) = (n+1) Gamma^i + n! lambda^1 y^i_1
    Delta^r(Gamma^i) = (n+1)!/(n+1-r)! y^i_{n+2-r} + n! lambda^r y^i_1.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import exp, factorial, log

import numpy as np
from scipy import integrate

from .jetcalc import (
    JetPoint,
    VectorField,
    act,
    delta_field,
    symbolic_point,
    vf_bracket,
    vf_equal,
)
from .jetgroup import AlgebraElement, JetElement, exp_k, inv, project
from .symexpr import (
    Expr,
    SampleConfig,
    Var,
    as_expr,
    compile_exprs,
    equal_prob,
    equal_prob_many,
    is_zero_prob,
    subst,
    valid_samples,
)


@dataclass(frozen=True)
class DEField:
    """Differential equation field of order n+1 on T^n R^m."""

    m: int
    n: int
    gamma: tuple

    def __post_init__(self):
        g = tuple(as_expr(e) for e in self.gamma)
        if len(g) != self.m:
            raise ValueError(f"need {self.m} components, got {len(g)}")
        for e in g:
            if e.order > self.n or e.dim > self.m:
                raise ValueError(f"component {e} does not live on T^{self.n} R^{self.m}")
        object.__setattr__(self, "gamma", g)

    def vector_field(self) -> VectorField:
        """``sum_{r<n} y^i_{r+1} d/dy^i_r + Gamma^i d/dy^i_n``."""
        comps = {(i, r): Var(i, r + 1) for r in range(self.n) for i in range(1, self.m + 1)}
        for i, g in enumerate(self.gamma, 1):
            comps[(i, self.n)] = g
        return VectorField(comps, self.m, self.n)

    def evaluator(self):
        """Strict scalar evaluator ``p -> ndarray(m)`` for an (n+1, m) point."""
        comp = compile_exprs(self.gamma)
        return lambda p: np.array(comp.scalar(p))

    def __call__(self, p) -> np.ndarray:
        return np.array(compile_exprs(self.gamma).scalar(p))


def _forced(n: int, r: int, i: int):
    """The lambda-free term of Delta^r(Gamma^i) for r >= 2."""
    return Fraction(factorial(n + 1), factorial(n + 1 - r)) * Var(i, n + 2 - r)


def delta_gamma(field_: DEField, r: int) -> list:
    dr = delta_field(field_.n, r, field_.m)
    return [dr(g) for g in field_.gamma]


@dataclass
class HomogeneityReport:
    homogeneous: bool
    lambdas: list
    lambda_zero: list
    cross_residual: float
    consistency: dict = field(default_factory=dict)

    @property
    def consistency_residual(self) -> float:
        return max(self.consistency.values(), default=0.0)


def lambda_extract(field_: DEField, cfg: SampleConfig = SampleConfig()) -> HomogeneityReport:
    """Build lambda^1..lambda^n symbolically from component 1 and check the
    remaining components (and the consistency conditions) by sampling."""
    n, m = field_.n, field_.m
    if n < 1:
        raise ValueError("field order must be at least 2")
    nf = factorial(n)
    y11 = Var(1, 1)
    lambdas = []
    pairs = []
    for r in range(1, n + 1):
        dg = delta_gamma(field_, r)
        if r == 1:
            free = [(n + 1) * g for g in field_.gamma]
        else:
            free = [_forced(n, r, i) for i in range(1, m + 1)]
        lam = (dg[0] - free[0]) / (nf * y11)
        lambdas.append(lam)
        for i in range(2, m + 1):
            pairs.append((dg[i - 1], free[i - 1] + nf * lam * Var(i, 1)))
    if pairs:
        cross = equal_prob_many(pairs, cfg, order=n, m=m).max_residual
    else:
        cross = 0.0
    zero = [bool(is_zero_prob(lam, cfg, order=n, m=m)) for lam in lambdas]
    cons = consistency_check(lambdas, n, m, cfg)
    homogeneous = cross <= cfg.tol and all(v <= cfg.tol for v in cons.values())
    return HomogeneityReport(homogeneous, lambdas, zero, cross, cons)


def consistency_check(lambdas, n: int, m: int, cfg: SampleConfig = SampleConfig()) -> dict:
    """Residuals of the Jacobi consistency conditions on lambda^r.

    Keys are ``(1, r)`` for ``Delta^1(l^r) - Delta^r(l^1) = (n+1-r) l^r``
    and ``(r, s)`` with 1 < r < s for the remaining families.
    """
    lam = [None] + list(lambdas)
    D = {r: delta_field(n, r, m) for r in range(1, n + 1)}
    out = {}
    for r in range(2, n + 1):
        lhs = D[1](lam[r]) - D[r](lam[1])
        out[(1, r)] = equal_prob(lhs, (n + 1 - r) * lam[r], cfg, order=n, m=m).max_residual
    for r in range(2, n + 1):
        for s in range(r + 1, n + 1):
            lhs = D[r](lam[s]) - D[s](lam[r])
            if r + s <= n + 1:
                rhs = (r - s) * lam[r + s - 1]
            elif r + s == n + 2:
                rhs = as_expr(-(n + 1) * (r - s))
            else:
                rhs = as_expr(0)
            out[(r, s)] = equal_prob(lhs, rhs, cfg, order=n, m=m).max_residual
    return out


def bracket_residuals(field_: DEField, lambdas, cfg: SampleConfig = SampleConfig()) -> dict:
    """Residuals of ``[Delta^1, G] = G + l^1 Delta^n`` and
    ``[Delta^r, G] = r Delta^{r-1} + l^r Delta^n`` as vector-field identities."""
    n, m = field_.n, field_.m
    G = field_.vector_field()
    Dn = delta_field(n, n, m)
    out = {}
    for r in range(1, n + 1):
        Dr = delta_field(n, r, m)
        lhs = vf_bracket(Dr, G)
        base = G if r == 1 else delta_field(n, r - 1, m).scale(r)
        rhs = base + Dn.scale(lambdas[r - 1])
        out[r] = vf_equal(lhs, rhs, cfg).max_residual
    return out


def projective_shift(field_: DEField, mu) -> DEField:
    """``Gamma + mu Delta^n``, i.e. ``Gamma^i + n! mu y^i_1``."""
    mu = as_expr(mu)
    nf = factorial(field_.n)
    return DEField(field_.m, field_.n, tuple(g + nf * mu * Var(i, 1) for i, g in enumerate(field_.gamma, 1)))


@dataclass
class ProjectiveResult:
    equivalent: bool
    residual: float
    mu_samples: np.ndarray

    def __bool__(self):
        return self.equivalent


def are_proj_equivalent(a: DEField, b: DEField, cfg: SampleConfig = SampleConfig()) -> ProjectiveResult:
    """Whether both fields are homogeneous and differ by ``mu Delta^n``."""
    if (a.m, a.n) != (b.m, b.n):
        raise ValueError(f"order mismatch: (m, n) = {(a.m, a.n)} vs {(b.m, b.n)}")
    n, m = a.n, a.m
    ha, hb = lambda_extract(a, cfg), lambda_extract(b, cfg)
    diffs = [gb - ga for ga, gb in zip(a.gamma, b.gamma)]
    # cross-multiplied so no division by a vanishing y^i_1
    pairs = [(diffs[i - 1] * Var(1, 1), diffs[0] * Var(i, 1)) for i in range(2, m + 1)]
    res = equal_prob_many(pairs, cfg, order=n, m=m).max_residual if pairs else 0.0
    mu = diffs[0] / (factorial(n) * Var(1, 1))
    _, vals = valid_samples([mu], cfg, order=n, m=m)
    ok = ha.homogeneous and hb.homogeneous and res <= cfg.tol
    return ProjectiveResult(ok, max(res, ha.cross_residual, hb.cross_residual), vals[0])


def group_transform(field_: DEField, phi) -> DEField:
    """The field ``Gamma_phi`` whose section is ``phi_{n+1}^{-1} o Gamma o phi_n``
    for phi in L^{(n+1)+}."""
    phi = phi if isinstance(phi, JetElement) else JetElement(tuple(phi))
    n, m = field_.n, field_.m
    if phi.order != n + 1:
        raise ValueError(f"need an element of L^{n + 1}, got order {phi.order}")
    if not float(phi.coords[0]) > 0:
        raise ValueError("phi must preserve orientation (phi_1 > 0)")
    Y = symbolic_point(n, m)
    Z = act(project(phi, n), Y)
    bindings = {(i + 1, r): Z[r, i] for r in range(n + 1) for i in range(m)}
    top = [subst(g, bindings) for g in field_.gamma]
    W = np.empty((n + 2, m), dtype=object)
    W[: n + 1] = Z
    W[n + 1] = top
    out = act(inv(phi), W)
    return DEField(m, n, tuple(as_expr(x) for x in out[n + 1]))


# -- flows of the fundamental fields ----------------------------------------

def dilation_flow(p, t: float) -> np.ndarray:
    """Flow of Delta^1: ``y_r -> e^{r t} y_r``."""
    y = np.asarray(getattr(p, "coords", p), float)
    scale = np.exp(t * np.arange(y.shape[0]))
    return y * scale[:, None]


def delta_flow(p, r: int, t: float) -> np.ndarray:
    """Flow of Delta^r (r >= 2): right action by ``exp(t delta^r)``."""
    y = np.asarray(getattr(p, "coords", p), float)
    n = y.shape[0] - 1
    c = [0.0] * n
    c[r - 1] = float(t)
    return act(exp_k(AlgebraElement(tuple(c))), y)


def lambda_by_flow(gamma_fn, p, r: int, h: float = 1e-4) -> float:
    """lambda^r of a (numerically given) field at p from a central difference
    along the explicit Delta^r flow, projected on y_1."""
    y = np.asarray(getattr(p, "coords", p), float)
    n = y.shape[0] - 1
    flow = dilation_flow if r == 1 else (lambda q, t: delta_flow(q, r, t))
    dg = (gamma_fn(flow(y, h)) - gamma_fn(flow(y, -h))) / (2 * h)
    free = (n + 1) * gamma_fn(y) if r == 1 else Fraction(factorial(n + 1), factorial(n + 1 - r)) * y[n + 2 - r]
    y1 = y[1]
    return float((dg - np.asarray(free, float)) @ y1) / (factorial(n) * float(y1 @ y1))


class SprayNormalizer:
    """Pointwise solution mu of the transport equations that make
    ``Gamma_hat + mu Delta^n`` satisfy lambda^1 = lambda^2 = 0.

    With the Euclidean metric, Sigma = {|y_1| = 1} and
    Sigma' = {|y_1| = 1, y_1.y_2 = 0}. mu vanishes on Sigma', solves
    ``Delta^2(mu) = -lambda^2`` on Sigma and
    ``Delta^1(mu) - n mu = -lambda^1`` off it; both are integrated by
    adaptive quadrature along the explicit flows.
    """

    def __init__(self, field_: DEField, cfg: SampleConfig = SampleConfig(), epsabs=1e-13, epsrel=1e-12):
        self.field = field_
        self.report = lambda_extract(field_, cfg)
        if not self.report.homogeneous:
            raise ValueError("field is not homogeneous")
        n = field_.n
        self._lam1 = compile_exprs((self.report.lambdas[0],))
        self._lam2 = compile_exprs((self.report.lambdas[1],)) if n >= 2 else None
        self._gamma = compile_exprs(field_.gamma)
        self.epsabs = epsabs
        self.epsrel = epsrel

    def _quad(self, f, a, b):
        if a == b:
            return 0.0
        val, _ = integrate.quad(f, a, b, epsabs=self.epsabs, epsrel=self.epsrel, limit=200)
        return val

    def mu(self, p) -> float:
        y = np.asarray(getattr(p, "coords", p), float)
        n = y.shape[0] - 1
        norm = float(np.linalg.norm(y[1]))
        if norm == 0:
            raise ValueError("point is outside the slit bundle")
        big_t = log(norm)
        q = dilation_flow(y, -big_t)  # on Sigma
        mu_q = 0.0
        if n >= 2:
            s_q = float(q[1] @ q[2]) / 2.0
            z = delta_flow(q, 2, -s_q)  # on Sigma'
            mu_q = -self._quad(lambda s: self._lam2.scalar(delta_flow(z, 2, s))[0], 0.0, s_q)
        src = self._quad(lambda t: exp(-n * t) * self._lam1.scalar(dilation_flow(q, t))[0], 0.0, big_t)
        return exp(n * big_t) * (mu_q - src)

    def gamma(self, p) -> np.ndarray:
        """Normalized field components at p."""
        y = np.asarray(getattr(p, "coords", p), float)
        n = y.shape[0] - 1
        return np.array(self._gamma.scalar(y)) + factorial(n) * self.mu(y) * y[1]


def spray_normalize(field_: DEField, p, cfg: SampleConfig = SampleConfig()):
    """mu at p and the pointwise normalizer object."""
    s = SprayNormalizer(field_, cfg)
    return s.mu(p), s

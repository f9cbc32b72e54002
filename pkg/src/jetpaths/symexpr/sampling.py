"""Probabilistic identity checking on the slit jet bundle."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Expr, as_expr
from .evaluate import compile_exprs


@dataclass(frozen=True)
class SampleConfig:
    """How to draw random jet points.

    Every coordinate is uniform in ``low..high`` (or ``ranges[level]`` when
    given); the level-1 row is then rescaled to a norm uniform in
    ``level1_norm``. Points whose level-1 norm is below ``guard`` are
    rejected.
    """

    count: int = 100
    seed: int = 0
    low: float = -2.0
    high: float = 2.0
    ranges: dict = field(default_factory=dict)
    level1_norm: tuple = (0.5, 2.0)
    guard: float = 0.1
    tol: float = 1e-9
    max_retries: int = 20

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be >= 1")
        if self.guard <= 0:
            raise ValueError("guard must be positive")

    def replace(self, **kw) -> "SampleConfig":
        d = dict(self.__dict__)
        d.update(kw)
        return SampleConfig(**d)


def sample_points(cfg: SampleConfig, order: int, m: int, rng=None, count=None) -> np.ndarray:
    """Random points of shape (count, order+1, m) on the slit bundle."""
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    count = cfg.count if count is None else count
    out = np.empty((count, order + 1, m))
    for r in range(order + 1):
        lo, hi = cfg.ranges.get(r, (cfg.low, cfg.high))
        out[:, r, :] = rng.uniform(lo, hi, size=(count, m))
    if order >= 1:
        row = out[:, 1, :]
        norms = np.linalg.norm(row, axis=1)
        # a zero row has probability zero; replace defensively
        bad = norms < 1e-12
        row[bad] = 1.0
        norms[bad] = np.linalg.norm(row[bad], axis=1)
        target = rng.uniform(*cfg.level1_norm, size=count)
        out[:, 1, :] = row * (target / norms)[:, None]
        ok = np.linalg.norm(out[:, 1, :], axis=1) >= cfg.guard
        if not ok.all():
            out = out[ok]
    return out


def valid_samples(exprs, cfg: SampleConfig, order=None, m=None):
    """Sample points and evaluate ``exprs``; points where any value is
    non-finite are redrawn up to ``cfg.max_retries`` times.

    Returns ``(points, values)`` with values of shape (len(exprs), K).
    """
    exprs = tuple(as_expr(e) for e in exprs)
    comp = compile_exprs(exprs)
    order = max(comp.order, 1) if order is None else order
    m = max(comp.dim, 1) if m is None else m
    rng = np.random.default_rng(cfg.seed)
    pts = sample_points(cfg, order, m, rng)
    vals = comp.batch(pts)
    for _ in range(cfg.max_retries):
        good = np.all(np.isfinite(vals), axis=0)
        if good.all():
            break
        nbad = int((~good).sum())
        fresh = sample_points(cfg, order, m, rng, count=nbad)
        pts = np.concatenate([pts[good], fresh])
        vals = np.concatenate([vals[:, good], comp.batch(fresh)], axis=1)
    good = np.all(np.isfinite(vals), axis=0)
    if not good.any():
        raise ValueError("no sample point gave finite values")
    return pts[good], vals[:, good]


@dataclass(frozen=True)
class EqualityResult:
    equal: bool
    max_residual: float
    samples: int

    def __bool__(self):
        return self.equal


def rel_residual(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.abs(a - b) / (1.0 + np.abs(a) + np.abs(b))


def equal_prob(a, b, cfg: SampleConfig = SampleConfig(), order=None, m=None) -> EqualityResult:
    """Compare two expressions at random slit points.

    The residual at each point is ``|a-b| / (1+|a|+|b|)``; the result is
    true iff its maximum is at most ``cfg.tol``.
    """
    return equal_prob_many([(a, b)], cfg, order=order, m=m)


def equal_prob_many(pairs, cfg: SampleConfig = SampleConfig(), order=None, m=None) -> EqualityResult:
    """Like :func:`equal_prob` for several pairs sharing the sample points."""
    pairs = [(as_expr(a), as_expr(b)) for a, b in pairs]
    flat = [e for p in pairs for e in p]
    _, vals = valid_samples(flat, cfg, order=order, m=m)
    res = rel_residual(vals[0::2], vals[1::2])
    worst = float(res.max()) if res.size else 0.0
    return EqualityResult(worst <= cfg.tol, worst, vals.shape[1])


def is_zero_prob(e: Expr, cfg: SampleConfig = SampleConfig(), order=None, m=None) -> EqualityResult:
    return equal_prob(e, 0, cfg, order=order, m=m)

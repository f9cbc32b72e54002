"""Geodesics of differential equation fields and path-level comparisons.

A field of order n+1 is integrated as the first-order system
``y_r' = y_{r+1}`` (r < n), ``y_n' = Gamma(y)`` with classical fixed-step
RK4. Paths are compared after resampling by Euclidean arc length.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from math import floor

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicHermiteSpline
from scipy.spatial import cKDTree

from .homog import DEField
from .symexpr import compile_exprs

SLIT_GUARD = 0.05


class IntegrationError(RuntimeError):
    """Integration stopped early. ``trajectory`` holds the accepted steps."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class SlitViolation(IntegrationError):
    pass


class NonFiniteState(IntegrationError):
    pass


@dataclass
class Trajectory:
    """Samples ``t[k]`` with full jet states ``y[k]`` of shape (n+1, m)."""

    t: np.ndarray
    y: np.ndarray
    h: float
    error_estimate: float = float("nan")
    status: str = "complete"
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.t)

    @property
    def n(self) -> int:
        return self.y.shape[1] - 1

    @property
    def m(self) -> int:
        return self.y.shape[2]

    @property
    def positions(self) -> np.ndarray:
        return self.y[:, 0, :]

    def speed(self) -> np.ndarray:
        return np.linalg.norm(self.y[:, 1, :], axis=1)

    def arclength(self) -> np.ndarray:
        """Cumulative arc length at each sample (Simpson on the speed)."""
        if len(self.t) < 3:
            sp = self.speed()
            return np.concatenate([[0.0], np.cumsum(0.5 * (sp[1:] + sp[:-1]) * np.diff(self.t))])
        return cumulative_simpson(self.speed(), x=self.t, initial=0.0)

    def header(self) -> list:
        return ["t"] + [f"y{i}_{r}" for r in range(self.n + 1) for i in range(1, self.m + 1)]

    def to_csv(self, path_or_file):
        """Write ``t, y1_0, y2_0, ..., y1_1, ...`` rows in row-major jet order."""
        own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
        fh = open(path_or_file, "w", newline="") if own else path_or_file
        try:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.header())
            flat = self.y.reshape(len(self.t), -1)
            for tk, row in zip(self.t, flat):
                w.writerow([repr(float(tk))] + [repr(float(v)) for v in row])
        finally:
            if own:
                fh.close()


def std_init(m: int, n: int) -> np.ndarray:
    """Documented initial jet: origin, unit velocity e1, acceleration e2 and
    (order >= 3) third derivative ``-e1`` (+ ``0.5 e3`` when m >= 3).

    The data lie on {|y1| = 1, y1.y2 = 0, y1.y3 + |y2|^2 = 0}."""
    y = np.zeros((n + 1, m))
    y[1, 0] = 1.0
    if n >= 2:
        y[2, 1 % m] = 1.0 if m > 1 else 0.0
    if n >= 3:
        y[3, 0] = -float(y[2] @ y[2])
        if m >= 3:
            y[3, 2] = 0.5
    return y


def _rhs_factory(field_: DEField):
    comp = compile_exprs(field_.gamma)
    n = field_.n

    def rhs(y):
        out = np.empty_like(y)
        out[:n] = y[1:]
        out[n] = comp.unchecked(y)
        return out

    return rhs


def _run(field_, y0, t_end, h, max_arclength, rate_limit, slit_tol, max_speed=None):
    rhs = _rhs_factory(field_)
    n = field_.n
    full = int(floor(t_end / h + 1e-9))
    sizes = [h] * full
    if t_end - full * h > 1e-12 * h:
        sizes.append(t_end - full * h)  # last step lands on t_end
    ts = [0.0]
    ys = [y0.copy()]
    y = y0.copy()
    s = 0.0
    sp_prev = float(np.linalg.norm(y[1]))
    status = "complete"

    def partial(reason):
        return Trajectory(np.array(ts), np.array(ys), h, status=reason)

    tk = 0.0
    for k, step in enumerate(sizes, 1):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * step * k1)
        k3 = rhs(y + 0.5 * step * k2)
        k4 = rhs(y + step * k3)
        y = y + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        tk = k * h if k <= full else t_end
        if not np.all(np.isfinite(y)):
            raise NonFiniteState(f"non-finite state at t={tk:.6g}", partial("non-finite"))
        sp = float(np.linalg.norm(y[1]))
        if sp < slit_tol:
            raise SlitViolation(f"|y1| = {sp:.3g} < {slit_tol} at t={tk:.6g}", partial("slit"))
        if rate_limit is not None and float(np.abs(k4[n]).max()) > rate_limit:
            raise IntegrationError(f"top derivative exceeds {rate_limit:g} at t={tk:.6g}", partial("rate-limit"))
        ts.append(tk)
        ys.append(y)
        s += 0.5 * step * (sp + sp_prev)
        sp_prev = sp
        if max_arclength is not None and s >= max_arclength:
            status = "arc-length"
            break
        if max_speed is not None and sp > max_speed:
            status = "speed-limit"
            break
    return Trajectory(np.array(ts), np.array(ys), h, status=status)


def integrate(field_: DEField, init, t_end: float, h: float, *, max_arclength: float | None = None,
              rate_limit: float | None = None, max_speed: float | None = None, richardson: bool = True,
              slit_tol: float = SLIT_GUARD) -> Trajectory:
    """Fixed-step RK4 integration from ``init`` over ``[0, t_end]``.

    Parameters
    ----------
    field_ : DEField
    init : array_like, shape (n+1, m)
        Initial jet; must be slit.
    t_end, h : float
        Final parameter value and step size.
    max_arclength : float, optional
        Stop once the path is at least this long (one step past it).
    rate_limit : float, optional
        Abort when the top derivative exceeds this size.
    max_speed : float, optional
        Stop (without error) once ``|y1|`` exceeds this; useful ahead of a
        finite-time blow-up.
    richardson : bool
        Repeat with ``h/2`` and attach ``max|y_h - y_{h/2}|/15``.

    Raises
    ------
    SlitViolation, NonFiniteState, IntegrationError
        With the partial trajectory attached.
    """
    y0 = np.asarray(getattr(init, "coords", init), float)
    if y0.shape != (field_.n + 1, field_.m):
        raise ValueError(f"initial jet must have shape {(field_.n + 1, field_.m)}, got {y0.shape}")
    if h <= 0:
        raise ValueError("step size must be positive")
    if np.linalg.norm(y0[1]) < slit_tol:
        raise SlitViolation("initial jet is not slit")
    tr = _run(field_, y0, t_end, h, max_arclength, rate_limit, slit_tol, max_speed)
    if richardson:
        try:
            half = _run(field_, y0, tr.t[-1], h / 2, None, rate_limit, slit_tol)
            # compare on the shared uniform grid plus the common end point
            common = min(len(tr.t), (len(half.t) + 1) // 2)
            diff = tr.y[:common] - half.y[: 2 * common - 1 : 2]
            keep = np.isclose(tr.t[:common], half.t[: 2 * common - 1 : 2], rtol=0, atol=1e-12)
            worst = np.abs(diff[keep]).max() if keep.any() else 0.0
            worst = max(worst, np.abs(tr.y[-1] - half.y[-1]).max())
            tr.error_estimate = float(worst / 15.0)
        except IntegrationError:
            tr.error_estimate = float("nan")
    return tr


# -- paths -------------------------------------------------------------------

@dataclass
class Path:
    """Points of R^m at (nearly) uniform arc-length spacing ``ds``."""

    points: np.ndarray
    ds: float
    length: float

    def __len__(self):
        return len(self.points)


def arclength_resample(tr: Trajectory, ds: float, length: float | None = None) -> Path:
    """Resample a trajectory at arc-length spacing close to ``ds``.

    Arc length is integrated from the speed and inverted with Hermite
    interpolation (dt/ds = 1/|y1|); positions use the Hermite cubic through
    ``y0`` and ``y1``. ``length`` truncates the path."""
    if len(tr.t) < 2:
        raise ValueError("degenerate path: fewer than two samples")
    s = tr.arclength()
    total = float(s[-1])
    if total <= 0:
        raise ValueError("degenerate path: zero length")
    if length is not None:
        if length > total * (1 + 1e-12):
            raise ValueError(f"path has length {total:.6g} < requested {length:.6g}")
        total = min(length, total)
    speed = tr.speed()
    t_of_s = CubicHermiteSpline(s, tr.t, 1.0 / speed)
    pos = CubicHermiteSpline(tr.t, tr.positions, tr.y[:, 1, :], axis=0)
    count = max(1, int(round(total / ds)))
    grid = np.linspace(0.0, total, count + 1)
    return Path(pos(t_of_s(grid)), total / count, total)


def _directed(a: np.ndarray, b: np.ndarray, tree: cKDTree) -> float:
    """max over points of a of the distance to the polyline b."""
    _, idx = tree.query(a)
    best = np.full(len(a), np.inf)
    for lo in (idx - 1, idx):
        lo = np.clip(lo, 0, len(b) - 2)
        p, q = b[lo], b[lo + 1]
        d = q - p
        dd = np.einsum("ij,ij->i", d, d)
        u = np.where(dd > 0, np.einsum("ij,ij->i", a - p, d) / np.where(dd > 0, dd, 1), 0.0)
        u = np.clip(u, 0.0, 1.0)
        dist = np.linalg.norm(a - (p + u[:, None] * d), axis=1)
        best = np.minimum(best, dist)
    return float(best.max())


def hausdorff(a: Path, b: Path) -> float:
    """Symmetric Hausdorff distance between the two polylines (vertices of
    one against segments of the other)."""
    pa = a.points if isinstance(a, Path) else np.asarray(a, float)
    pb = b.points if isinstance(b, Path) else np.asarray(b, float)
    if len(pa) < 2 or len(pb) < 2:
        raise ValueError("degenerate path")
    return max(_directed(pa, pb, cKDTree(pb)), _directed(pb, pa, cKDTree(pa)))


# -- shape diagnostics ---------------------------------------------------------

@dataclass
class CircleFit:
    center: np.ndarray | None
    radius: float
    residual: float
    is_line: bool = False


def circle_fit(points, line_tol: float = 1e-9) -> CircleFit:
    """Algebraic least-squares circle through planar points.

    Collinear input (within ``line_tol`` relative to the extent) is
    reported as a line with infinite radius."""
    pts = points.points if isinstance(points, Path) else np.asarray(points, float)
    if pts.shape[1] != 2:
        raise ValueError("circle_fit needs planar points (m = 2)")
    centered = pts - pts.mean(axis=0)
    extent = float(np.linalg.norm(centered, axis=1).max())
    if extent == 0:
        raise ValueError("degenerate point set")
    _, sv, vt = np.linalg.svd(centered, full_matrices=False)
    line_res = float(np.abs(centered @ vt[1]).max())
    if line_res <= line_tol * extent:
        return CircleFit(None, float("inf"), line_res, True)
    A = np.column_stack([2 * pts, np.ones(len(pts))])
    rhs = (pts ** 2).sum(axis=1)
    sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    c = sol[:2]
    r = float(np.sqrt(sol[2] + c @ c))
    res = float(np.abs(np.linalg.norm(pts - c, axis=1) - r).max())
    return CircleFit(c, r, res, False)


def curvature_series(tr: Trajectory) -> np.ndarray:
    """First curvature ``sqrt(|y1|^2 |y2|^2 - (y1.y2)^2) / |y1|^3`` at each
    sample; equals |y2| on unit-speed data."""
    y1, y2 = tr.y[:, 1, :], tr.y[:, 2, :]
    A = np.einsum("ij,ij->i", y1, y1)
    B = np.einsum("ij,ij->i", y2, y2)
    a = np.einsum("ij,ij->i", y1, y2)
    return np.sqrt(np.maximum(A * B - a * a, 0.0)) / A ** 1.5


def conserved_vector(tr: Trajectory) -> float:
    """Max drift of ``y3 + (3/2)|y2|^2 y1`` from its initial value."""
    if tr.n < 3:
        raise ValueError("conserved_vector needs states up to y3")
    y1, y2, y3 = tr.y[:, 1, :], tr.y[:, 2, :], tr.y[:, 3, :]
    v = y3 + 1.5 * np.einsum("ij,ij->i", y2, y2)[:, None] * y1
    return float(np.linalg.norm(v - v[0], axis=1).max())


def tangency_drift(tr: Trajectory) -> dict:
    """Drift of the constraints ``|y1| = 1``, ``y1.y2 = 0`` and (when the
    state has y3) ``y1.y3 + |y2|^2 = 0``."""
    y1 = tr.y[:, 1, :]
    out = {"speed": float(np.abs(np.linalg.norm(y1, axis=1) - 1).max())}
    if tr.n >= 2:
        y2 = tr.y[:, 2, :]
        out["y1.y2"] = float(np.abs(np.einsum("ij,ij->i", y1, y2)).max())
    if tr.n >= 3:
        y3 = tr.y[:, 3, :]
        c = np.einsum("ij,ij->i", y1, y3) + np.einsum("ij,ij->i", y2, y2)
        out["y1.y3+|y2|^2"] = float(np.abs(c).max())
    return out


def curvature_drift(tr: Trajectory) -> float:
    """Max change of ``|y2|^2`` along the trajectory."""
    y2 = tr.y[:, 2, :]
    b = np.einsum("ij,ij->i", y2, y2)
    return float(np.abs(b - b[0]).max())

import io

import numpy as np
import pytest

from jetpaths import fixtures as fx
from jetpaths.geod import (
    IntegrationError,
    NonFiniteState,
    Path,
    SlitViolation,
    arclength_resample,
    circle_fit,
    conserved_vector,
    curvature_drift,
    curvature_series,
    hausdorff,
    integrate,
    std_init,
    tangency_drift,
)
from jetpaths.homog import DEField
from jetpaths.jetcalc import act
from jetpaths.symexpr import Var


@pytest.fixture(scope="module")
def unit_circle():
    return integrate(fx.circle_system(2), std_init(2, 2), 2 * np.pi, 1e-3)


def closed_form_error(tr):
    s = tr.t
    exact = np.stack([np.sin(s), 1 - np.cos(s)], axis=1)
    return np.abs(tr.positions - exact).max()


def test_unit_circle_closed_form(unit_circle):
    assert unit_circle.t[-1] == pytest.approx(2 * np.pi, abs=1e-15)
    assert closed_form_error(unit_circle) < 1e-6
    assert unit_circle.error_estimate < 1e-10
    assert np.all(np.diff(unit_circle.t) > 0)


def test_fourth_order_convergence():
    f, y0 = fx.circle_system(2), std_init(2, 2)
    e1 = closed_form_error(integrate(f, y0, 2 * np.pi, 0.02, richardson=False))
    e2 = closed_form_error(integrate(f, y0, 2 * np.pi, 0.01, richardson=False))
    assert 12 < e1 / e2 < 20


def test_zero_field_gives_straight_line():
    f = DEField(2, 2, (0, 0))
    y0 = np.array([[1.0, 2.0], [0.5, -1.0], [0.0, 0.0]])
    tr = integrate(f, y0, 2.0, 0.01)
    assert np.allclose(tr.positions, y0[0] + tr.t[:, None] * y0[1])


def test_fourth_order_line_data_stays_straight():
    y0 = np.zeros((4, 3))
    y0[1] = [0.6, 0.8, 0.0]
    tr = integrate(fx.curvature_field(3), y0, 3.0, 1e-2)
    assert np.allclose(tr.positions, tr.t[:, None] * y0[1], atol=1e-12)
    assert np.allclose(curvature_series(tr), 0)


def test_same_circle_from_related_jets(unit_circle, rng):
    """Reparametrized initial data for the same field trace the same path."""
    f = fx.circle_system(2)
    for _ in range(3):
        eta = (rng.uniform(0.5, 2.0), rng.uniform(0.0, 0.3))  # eta_2 < 0 slows to a stop
        tr = integrate(f, act(eta, std_init(2, 2)), 20.0, 1e-3, max_arclength=2 * np.pi, richardson=False)
        a = arclength_resample(tr, 1e-3, length=2 * np.pi)
        b = arclength_resample(unit_circle, 1e-3, length=2 * np.pi)
        assert hausdorff(a, b) < 1e-5


def test_slit_violation_returns_partial():
    f = DEField(1, 1, (-Var(1, 1),))  # speed decays like exp(-t)
    with pytest.raises(SlitViolation) as exc:
        integrate(f, [[0.0], [1.0]], 10.0, 1e-2)
    tr = exc.value.trajectory
    assert tr is not None and tr.status == "slit"
    assert 2.5 < tr.t[-1] < 3.1


def test_initial_jet_must_be_slit():
    with pytest.raises(SlitViolation):
        integrate(fx.circle_system(2), np.zeros((3, 2)), 1.0, 0.1)
    with pytest.raises(ValueError):
        integrate(fx.circle_system(2), np.zeros((2, 2)), 1.0, 0.1)
    with pytest.raises(ValueError):
        integrate(fx.circle_system(2), std_init(2, 2), 1.0, -0.1)


def test_nonfinite_state_is_reported():
    f = DEField(1, 1, (Var(1, 1) ** 3,))  # y'' = y'^3 blows up at t = 1/2
    with pytest.raises(NonFiniteState) as exc:
        integrate(f, [[0.0], [1.0]], 2.0, 1e-2, richardson=False)
    assert exc.value.trajectory.t[-1] < 2.0


def test_rate_limit_and_speed_limit():
    f = fx.circle_simple(2)
    with pytest.raises(IntegrationError) as exc:
        integrate(f, std_init(2, 2), 2.0, 1e-3, rate_limit=1e3)
    assert exc.value.trajectory.status == "rate-limit"
    tr = integrate(f, std_init(2, 2), 2.0, 1e-3, max_speed=10.0, richardson=False)
    assert tr.status == "speed-limit" and tr.t[-1] < 1.0


def test_simpler_circle_speed_blows_up():
    """From the standard jet the simpler system runs at speed 1/cos(s):
    t = sin(s), so the path stops short of arc length pi/2 as t -> 1."""
    tr = integrate(fx.circle_simple(2), std_init(2, 2), 0.9, 1e-4, richardson=False)
    s = tr.arclength()
    assert np.allclose(tr.speed(), 1 / np.cos(s), rtol=1e-8)
    assert s[-1] == pytest.approx(np.arcsin(0.9), abs=1e-9)


def test_csv_export(unit_circle, tmp_path):
    out = tmp_path / "traj.csv"
    unit_circle.to_csv(out)
    lines = out.read_text().splitlines()
    assert lines[0] == "t,y1_0,y2_0,y1_1,y2_1,y1_2,y2_2"
    assert len(lines) == len(unit_circle) + 1
    data = np.loadtxt(out, delimiter=",", skiprows=1)
    assert np.array_equal(data[:, 1:], unit_circle.y.reshape(len(unit_circle), -1))
    buf = io.StringIO()
    unit_circle.to_csv(buf)
    assert buf.getvalue() == out.read_text()


def test_resample_spacing_and_self_distance(unit_circle):
    a = arclength_resample(unit_circle, 1e-2)
    gaps = np.linalg.norm(np.diff(a.points, axis=0), axis=1)
    assert np.all(np.abs(gaps - a.ds) < 0.1 * a.ds)
    assert a.length == pytest.approx(2 * np.pi, abs=1e-9)
    b = arclength_resample(unit_circle, 3e-3)
    assert hausdorff(a, b) < 3e-3


def test_resample_degenerate():
    from jetpaths.geod import Trajectory
    tr = Trajectory(np.array([0.0]), np.zeros((1, 2, 2)), 0.1)
    with pytest.raises(ValueError):
        arclength_resample(tr, 0.1)


def test_resample_length_beyond_path(unit_circle):
    with pytest.raises(ValueError):
        arclength_resample(unit_circle, 1e-2, length=7.0)


def test_hausdorff_concentric_circles():
    th = np.linspace(0, 2 * np.pi, 4000)
    a = np.stack([np.cos(th), np.sin(th)], 1)
    assert hausdorff(Path(a, 0, 0), Path(1.01 * a, 0, 0)) == pytest.approx(0.01, rel=1e-3)


def test_circle_fit_on_geodesic():
    y0 = std_init(2, 2)
    y0[2] = [0.0, 2.0]
    tr = integrate(fx.circle_system(2), y0, np.pi, 1e-3)
    fit = circle_fit(arclength_resample(tr, 1e-2))
    assert not fit.is_line
    assert fit.radius == pytest.approx(0.5, abs=1e-9)
    assert fit.residual < 1e-7
    assert np.allclose(curvature_series(tr), 2.0)


def test_circle_fit_signals_line():
    pts = np.stack([np.linspace(0, 1, 50), 2 * np.linspace(0, 1, 50) + 1], 1)
    fit = circle_fit(pts)
    assert fit.is_line and fit.radius == np.inf
    with pytest.raises(ValueError):
        circle_fit(np.zeros((5, 3)))


def test_unit_speed_invariants(unit_circle):
    drift = tangency_drift(unit_circle)
    assert drift["speed"] < 1e-6 and drift["y1.y2"] < 1e-6
    assert curvature_drift(unit_circle) < 1e-6


@pytest.mark.parametrize("m", [2, 3])
def test_fourth_order_conserved_vector(m):
    tr = integrate(fx.curvature_field(m), std_init(m, 3), 3.0, 1e-3)
    assert conserved_vector(tr) < 1e-5
    assert max(tangency_drift(tr).values()) < 1e-5


def test_conserved_vector_needs_third_level(unit_circle):
    with pytest.raises(ValueError):
        conserved_vector(unit_circle)


def test_std_init_lies_on_unit_speed_sets():
    y = std_init(3, 3)
    assert np.linalg.norm(y[1]) == 1 and y[1] @ y[2] == 0
    assert y[1] @ y[3] + y[2] @ y[2] == 0

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcflab.analysis import (
    NotStabilized,
    ball_average,
    ball_volume_bounds,
    curvature_monitor,
    detect_oscillation,
    estimate_limit_constant,
    flatness,
    monotonicity_defect,
)
from mcflab.grid import PeriodicGrid, ScalarField
from mcflab.initial_data import build_spiked_u0
from mcflab.series import TimeSeries
from mcflab.solvers import FlowParams, run


# ---------------------------------------------------------------- ball averages

def test_ball_average_of_constant():
    g = PeriodicGrid((1.0, 1.0), (32, 32))
    for r in (0.2, 3.0, 11.5):
        assert ball_average(ScalarField.constant(g, 2.5), (0.1, -0.3), r) == pytest.approx(2.5)


def test_ball_average_leaves_window():
    g = PeriodicGrid((4.0, 1.0), (64, 16))
    f = ScalarField.constant(g, 1.0)
    with pytest.raises(ValueError):
        ball_average(f, (0.0, 0.0), 3.0, tiled_axes=(1,))
    assert ball_average(f, (0.0, 0.0), 1.5, tiled_axes=(1,)) == 1.0


def test_ball_average_counts_exact_nodes():
    # untiled brute force on a window equals the tiled computation
    g = PeriodicGrid((1.0, 1.0), (16, 16))
    rng = np.random.default_rng(0)
    f = ScalarField(g, rng.random(g.shape))
    big = PeriodicGrid((5.0, 5.0), (80, 80))
    fb = ScalarField(big, np.tile(f.values, (5, 5)))
    x, y = big.mesh()
    c = (0.13, -0.21)
    m = np.hypot(x - c[0], y - c[1]) <= 1.7
    assert ball_average(f, c, 1.7) == pytest.approx(fb.values[m].mean(), rel=1e-13)


@pytest.fixture(scope="module")
def spiked(torus_t1):
    return build_spiked_u0(PeriodicGrid((1.0, 1.0), (256, 256)), torus_t1)[0]


@pytest.mark.parametrize("r", [5.0, 10.0, 20.0])
def test_ball_sandwich_for_spikes(spiked, r):
    lo, hi = ball_volume_bounds(r)
    for c in ((0.0, 0.0), (0.37, -0.21), (0.5, 0.5)):
        assert lo <= ball_average(spiked, c, r) <= hi


def test_ball_band_tightens(spiked):
    widths = [np.subtract(*ball_volume_bounds(r)[::-1]) for r in (5.0, 10.0, 20.0)]
    assert widths[0] > widths[1] > widths[2]
    assert ball_volume_bounds(10.0) == pytest.approx((0.7372, 1.3028), abs=1e-4)


# ---------------------------------------------------------------- flatness, curvature

def test_flatness_examples():
    g = PeriodicGrid((1.0,), (512,), (0.0,))
    assert flatness(ScalarField.constant(g, 4.0)) == (0.0, 0.0)
    spread, grad = flatness(ScalarField.from_function(g, lambda x: np.sin(2 * np.pi * x)))
    assert spread == pytest.approx(2.0, abs=1e-4)
    assert grad == pytest.approx(2 * np.pi, rel=1e-4)


def test_curvature_of_flat_graphs_is_zero():
    g = PeriodicGrid((1.0, 1.0), (16, 16))
    assert curvature_monitor(ScalarField.constant(g, 1.0)) == 0.0


def test_curvature_of_sphere_cap():
    R = 1.0
    g = PeriodicGrid((2.0, 2.0), (400, 400))
    x, y = g.mesh()
    rho2 = x * x + y * y
    f = ScalarField(g, np.sqrt(np.maximum(R * R - rho2, 0.0)))
    A = curvature_monitor(f, mask=rho2 < (0.6 * R) ** 2)
    assert A == pytest.approx(math.sqrt(2) / R, rel=1e-3)


# ---------------------------------------------------------------- oscillation

def test_constant_signal_has_no_extrema():
    assert detect_oscillation(np.ones(50), 0.1).extrema == []


def test_cosine_extrema():
    t = np.linspace(0, 6 * np.pi, 6001)
    rep = detect_oscillation(np.cos(t), 0.1, t)
    assert rep.alternates()
    kinds = [k for k, _, _ in rep.extrema]
    assert kinds[:2] == ["max", "min"]
    for j, (k, tk, v) in enumerate(rep.extrema):
        assert tk == pytest.approx(j * np.pi, abs=2e-3)
        assert v == pytest.approx(1.0 if k == "max" else -1.0, abs=1e-6)
    assert rep.min_then_max(-0.9, 0.9)
    assert not rep.min_then_max(-1.1, 0.9)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=3, max_size=200),
       st.floats(0.01, 5.0))
def test_extrema_alternate_with_prominence(values, band):
    rep = detect_oscillation(values, band)
    assert rep.alternates()
    vals = [v for _, _, v in rep.extrema]
    for a, b in zip(vals, vals[1:]):
        assert abs(a - b) >= band - 1e-12


def test_oscillation_csv(tmp_path):
    t = np.linspace(0, 4 * np.pi, 400)
    detect_oscillation(np.sin(t), 0.2, t).to_csv(tmp_path / "x.csv")
    lines = (tmp_path / "x.csv").read_text().splitlines()
    assert lines[0] == "kind,t,value" and len(lines) >= 4


# ---------------------------------------------------------------- limits

def test_limit_of_constant_run():
    g = PeriodicGrid((1.0, 1.0), (16, 16))
    _, ts = run(ScalarField.constant(g, 7.0), FlowParams("mcf", 0.05, record_every=0.005))
    assert estimate_limit_constant(ts["sup"], ts["inf"]) == (7.0, 0.0)


def test_limit_of_heat_run_is_mean():
    g = PeriodicGrid((1.0, 1.0), (32, 32))
    f = ScalarField.from_function(g, lambda x, y: 1 + 0.5 * np.sin(2 * np.pi * x) * np.cos(2 * np.pi * y))
    _, ts = run(f, FlowParams("heat", 0.5, record_every=0.01))
    c, band = estimate_limit_constant(ts["sup"], ts["inf"], tol=1e-6)
    assert c == pytest.approx(1.0, abs=1e-9) and band < 1e-6


def test_not_stabilized():
    t = np.linspace(0, 1, 50)
    with pytest.raises(NotStabilized):
        estimate_limit_constant(1 + t, -t)
    with pytest.raises(NotStabilized):
        estimate_limit_constant(np.ones(50), np.zeros(50), tol=0.5)


def test_monotonicity_defect():
    ts = TimeSeries()
    for t, s, i in [(0, 3.0, 0.0), (1, 2.0, 0.5), (2, 2.5, 0.25)]:
        ts.append(t, sup=s, inf=i, mean=1.0)
    assert monotonicity_defect(ts) == (0.5, 0.25)

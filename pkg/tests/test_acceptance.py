"""End-to-end acceptance criteria, one reported line each.

The periodic-spike experiment runs at its default 512² resolution and the
slab experiment with the ``coarse`` preset (resolution 0.05, every margin
doubled), so the whole file takes a few minutes.
"""

import math

import numpy as np
import pytest

from mcflab.analysis import ball_average, ball_volume_bounds, detect_oscillation, monotonicity_defect
from mcflab.config import PRESETS, ExperimentConfig
from mcflab.experiments import run_theorem1, run_theorem2, run_validate
from mcflab.grid import PeriodicGrid, ScalarField
from mcflab.initial_data import build_spiked_u0
from mcflab.shrinker import AxisCollision, NoReturn, ProfileState, integrate_profile
from mcflab.solvers import FlowParams, iter_flow, run, stable_dt

COARSE_TOL = 2.0  # the coarse preset doubles every margin


# ---------------------------------------------------------------- 1. shrinker oracles

def test_1_shrinker_oracles(report):
    with pytest.raises(NoReturn) as exc:
        integrate_profile(ProfileState(math.sqrt(2), 0.0, math.pi / 2), 2, max_arclength=5.0)
    cyl = exc.value.trajectory
    cyl_dev = float(np.abs(cyl.r - math.sqrt(2)).max())
    with pytest.raises(AxisCollision) as exc:
        integrate_profile(ProfileState(2.0, 0.0, math.pi / 2), 2)
    sph = exc.value.trajectory
    sph_dev = float(np.abs(np.hypot(sph.r, sph.z) - 2.0).max())
    ok = cyl_dev < 1e-8 and cyl.s[-1] >= 5.0 - 1e-9 and sph_dev < 1e-8
    assert report("1 shrinker oracles", ok,
                  f"cylinder |r-sqrt2| {cyl_dev:.1e} over s={cyl.s[-1]:.2f}; sphere ||X|-2| {sph_dev:.1e}")


# ---------------------------------------------------------------- 2. torus shooting

def test_2_torus_shooting(torus, report):
    resid = float(np.abs(torus.residual()).max())
    ok = abs(torus.miss) < 1e-10 and torus.is_convex() and 0 < torus.ell < torus.r_out and resid < 1e-6
    assert report("2 torus shooting", ok,
                  f"miss {torus.miss:.1e}, convex {torus.is_convex()}, ell={torus.ell:.10f} "
                  f"r_out={torus.r_out:.10f} delta={torus.delta:.10f}, residual {resid:.1e}")


# ---------------------------------------------------------------- 3. solver validation

def test_3_solver_validation(report):
    v = run_validate().values
    ok = (abs(v["grim_speed_csf"] - 1) < 0.01 and abs(v["grim_speed_mcf2d"] - 1) < 0.01
          and abs(v["heat_amp_ratio"] - 1) < 0.01
          and all(3.5 <= v[k] <= 4.5 for k in ("grim_ratio_csf", "grim_ratio_mcf2d", "heat_ratio")))
    assert report("3 solver validation", ok,
                  f"grim speed {v['grim_speed_mcf2d']:.6f} (ratio {v['grim_ratio_mcf2d']:.3f}); "
                  f"heat amplitude {v['heat_amp_ratio']:.6f} (ratio {v['heat_ratio']:.3f})")


# ---------------------------------------------------------------- 4. periodic spikes

@pytest.fixture(scope="module")
def t1(torus, tmp_path_factory):
    cfg = ExperimentConfig(experiment="theorem1")
    return run_theorem1(cfg, tmp_path_factory.mktemp("theorem1"), torus=torus)


@pytest.mark.slow
def test_4a_torus_clearance(t1, report):
    s = t1.series["mcf"]
    before = s["t"] < t1.values["t_star"]
    clr = s["clr_torus_0"][before]
    assert report("4(a) torus clearance > 0 for t < t*", bool(np.all(clr > 0)),
                  f"min {clr.min():.3e} over {clr.size} records")


@pytest.mark.slow
def test_4b_region_bounds(t1, report):
    s = t1.series["mcf"]
    bound = t1.values["delta0"] + 2 * t1.values["h"]
    before = s["t"] < t1.values["t_star"]
    pre = np.all(s["bound_max"][before] < bound)
    post = np.all(s["bound_max"][~before] <= bound)
    assert report("4(b) height bound on Omega_t before t*, everywhere after", bool(pre and post),
                  f"max before {s['bound_max'][before].max():.4g}, after {s['bound_max'][~before].max():.4g}, "
                  f"bound {bound:.4g}")


@pytest.mark.slow
def test_4c_mcf_limit(t1, report):
    c0, band, d0 = t1.values["c0"], t1.values["c0_band"], t1.values["delta0"]
    assert report("4(c) MCF stabilizes below delta0", c0 <= d0 + 1e-3 and band < 1e-3,
                  f"c0={c0:.6g} <= {d0 + 1e-3:.6g}, band {band:.2e}")


@pytest.mark.slow
def test_4d_heat_limit(t1, report):
    drift, dev, sep = t1.values["heat_mean_drift"], t1.values["heat_tail_dev"], t1.values["separation"]
    ok = drift <= 1e-9 and dev <= 0.01 and sep >= 1 - t1.values["delta0"] - 0.011
    assert report("4(d) heat conserves mean and tends to 1", ok,
                  f"mean drift {drift:.1e}, tail within {dev:.2e} of 1, separation {sep:.4f}")


# ---------------------------------------------------------------- 5. slab oscillation (coarse preset)

@pytest.fixture(scope="module")
def t2(torus, tmp_path_factory):
    cfg = ExperimentConfig(experiment="theorem2", **PRESETS["coarse"])
    assert cfg.tolerance_scale == COARSE_TOL
    return run_theorem2(cfg, tmp_path_factory.mktemp("theorem2"), torus=torus)


@pytest.mark.slow
def test_5a_bounds_at_tstar(t2, report):
    v = t2.values
    margin = 2 * COARSE_TOL * v["h_fine"]
    odd_cap = max(v["rho0"], v["delta0"]) + margin
    even_cap = 1 + v["rho0"] + margin
    ok = (v["odd_slab_max"] < odd_cap and v["even_slab_max"] < even_cap
          and v["min_sphere_clearance"] > 0 and v["edge_max"] < v["rho0"])
    assert report("5(a) slab bounds at t*", ok,
                  f"odd {v['odd_slab_max']:.4g} < {odd_cap:.4g}; even {v['even_slab_max']:.4g} < {even_cap:.4g}; "
                  f"sphere clearance {v['min_sphere_clearance']:.2e}")


@pytest.mark.slow
def test_5b_companion_ordering(t2, report):
    v = t2.values
    slack = 1e-8 * COARSE_TOL
    ok = v["phi_plus_excess"] <= slack and v["psi_gap_min"] >= -slack
    assert report("5(b) psi <= w <= phi_plus after t*", ok,
                  f"max(w-phi_plus) {v['phi_plus_excess']:.2e}, min(w-psi) {v['psi_gap_min']:.2e}")


@pytest.mark.slow
def test_5c_oscillation(t2, report):
    s = t2.series["mcf"]
    rep = detect_oscillation(s["probe0"], 0.02, s["t"])
    low, high = 0.2 * COARSE_TOL, 1 - 0.1 * COARSE_TOL
    extrema = [(k, round(t, 3), round(x, 4)) for k, t, x in rep.extrema]
    assert report("5(c) probe min then max", rep.min_then_max(low, high),
                  f"need min <= {low:.2f} then max >= {high:.2f}; extrema {extrema}")


@pytest.mark.slow
def test_5d_heat_probe_and_averages(t2, report):
    v = t2.values
    vp = t2.series["heat"]["probe0"]
    band = 0.2 * COARSE_TOL
    in_band = bool(np.all(np.abs(vp - 1) <= band))
    radii = (5, 10, 20)
    sandwich = all(ball_volume_bounds(r)[0] <= v[f"ball_avg_r{r}"] <= ball_volume_bounds(r)[1] for r in radii)
    assert report("5(d) heat probe near 1, ball averages in sandwich", in_band and sandwich,
                  f"v(0,t) in [{vp.min():.4f}, {vp.max():.4f}] vs [{1 - band:.2f}, {1 + band:.2f}]; "
                  + ", ".join(f"r={r}: {v[f'ball_avg_r{r}']:.4f}" for r in radii))


@pytest.mark.slow
def test_5_runtime(t2, report):
    assert report("5 coarse preset runtime < 30 min", t2.elapsed < 1800, f"{t2.elapsed:.0f} s")


# ---------------------------------------------------------------- 6. property suites

def _random_smooth(grid, rng):
    xs = grid.mesh()
    out = np.zeros(grid.shape)
    for _ in range(3):
        k = rng.integers(1, 3, size=grid.dim)
        out += rng.normal() * 0.3 * np.cos(sum(2 * np.pi * kk * x for kk, x in zip(k, xs)) + rng.uniform(0, 6.3))
    return out


def test_6_property_suites(torus_t1, report):
    rng = np.random.default_rng(2024)
    worst_order, worst_mono, n_pairs = np.inf, 0.0, 20
    for j in range(n_pairs):
        flow = ("mcf", "heat", "csf")[j % 3]
        dim = 1 if flow == "csf" else 2
        g = PeriodicGrid((1.0,) * dim, (32,) * dim, (0.0,) * dim)
        u = _random_smooth(g, rng)
        w = u + rng.uniform(0.0, 0.1) + 0.05 * (1 + np.tanh(_random_smooth(g, rng)))
        p = FlowParams(flow, 0.02, record_every=0.002)
        fu, fw = ScalarField(g, u), ScalarField(g, w)
        dt = stable_dt(fu, p)
        steps = math.ceil(0.02 / dt)
        gap = min(float((b.values - a.values).min())
                  for (_, a), (_, b) in zip(iter_flow(fu, p, dt=dt), iter_flow(fw, p, dt=dt)))
        worst_order = min(worst_order, gap + 1e-10 * steps)
        for f0 in (fu, fw):
            _, ts = run(f0, p, dt=dt)
            worst_mono = max(worst_mono, *monotonicity_defect(ts))
    comparison = worst_order >= 0.0
    monotone = worst_mono <= 1e-12

    spiked, _ = build_spiked_u0(PeriodicGrid((1.0, 1.0), (256, 256)), torus_t1)
    avgs = {r: ball_average(spiked, (0.0, 0.0), r) for r in (5.0, 10.0, 20.0)}
    sandwich = all(ball_volume_bounds(r)[0] <= a <= ball_volume_bounds(r)[1] for r, a in avgs.items())

    t = np.linspace(0, 20, 4001)
    signals = [np.cos(t), np.sin(3 * t) * np.exp(-0.05 * t), np.sign(np.sin(t)) * (1 - np.exp(-t)),
               rng.normal(size=500).cumsum()]
    alternation = all(detect_oscillation(s, 0.1).alternates() for s in signals)

    ok = comparison and monotone and sandwich and alternation
    assert report("6 property suites", ok,
                  f"ordering {n_pairs} pairs (min slack-adjusted gap {worst_order:.2e}); "
                  f"sup/inf defect {worst_mono:.1e}; ball averages "
                  + ", ".join(f"{a:.4f}" for a in avgs.values())
                  + f"; alternation {alternation}")

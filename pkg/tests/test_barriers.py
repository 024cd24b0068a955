import math

import numpy as np
import pytest

from mcflab.barriers import (
    BarrierExtinct,
    RegionOmega,
    SphereBarrier,
    TorusBarrier,
    check_region_bound,
    clearance_graph_sphere,
    clearance_graph_torus,
    torus_at_time,
)
from mcflab.grid import PeriodicGrid, ScalarField
from mcflab.initial_data import build_spiked_u0
from mcflab.solvers import FlowParams, run

CELL = PeriodicGrid((1.0, 1.0), (256, 256))


def test_torus_radii_at_time(torus_t1):
    b = TorusBarrier(torus_t1)
    ell, r, _ = torus_at_time(b, 0.0)
    assert (ell, r) == (torus_t1.ell, torus_t1.r_out)
    ell, r, section = torus_at_time(b, 0.75 * b.t_star)
    assert ell == pytest.approx(0.5 * torus_t1.ell) and r == pytest.approx(0.5 * torus_t1.r_out)
    zm, zp = section(ell)
    assert zm == pytest.approx(b.height) and zp == pytest.approx(b.height)


def test_torus_shrinks_to_centre(torus_t1):
    b = TorusBarrier(torus_t1, (0.0, 0.0))
    ell, r, section = torus_at_time(b, b.t_star * (1 - 1e-10))
    assert r < 2e-5 * torus_t1.r_out
    zm, zp = section(0.5 * (ell + r))
    assert zm == pytest.approx(b.height, abs=1e-5) and zp == pytest.approx(b.height, abs=1e-5)
    with pytest.raises(BarrierExtinct):
        torus_at_time(b, b.t_star)


def test_flat_graph_clears_torus(torus_t1):
    b = TorusBarrier(torus_t1)
    # the torus rests on the plane: tangent at one radius, clear elsewhere
    assert clearance_graph_torus(ScalarField.constant(CELL, 0.0), b, 0.0) >= 0.0
    assert clearance_graph_torus(ScalarField.constant(CELL, 0.0), b, 0.1 * b.t_star) > 0.0


def test_centre_height_pierces_torus(torus_t1):
    b = TorusBarrier(torus_t1)
    assert clearance_graph_torus(ScalarField.constant(CELL, b.height), b, 0.0) < 0.0


def test_sphere_radius_law():
    s = SphereBarrier((0.0, 0.0), 0.2, 0.2)
    assert s.t_star == pytest.approx(0.01)
    assert s.radius(0.005) == pytest.approx(math.sqrt(0.04 - 0.02))
    with pytest.raises(BarrierExtinct):
        s.radius(s.t_star)
    assert SphereBarrier.with_extinction(0.01, (0, 0)).rho0 == pytest.approx(0.2)


def test_sphere_clearance_on_flat_graph():
    rho0 = 0.2
    s = SphereBarrier((0.0, 0.0), rho0, rho0)
    flat = ScalarField.constant(CELL, 0.0)
    assert clearance_graph_sphere(flat, s, 0.0) == pytest.approx(0.0, abs=1e-15)
    for t in (0.001, 0.005, 0.009):
        assert clearance_graph_sphere(flat, s, t) == pytest.approx(rho0 - math.sqrt(rho0 ** 2 - 4 * t))


def test_region_masks(torus_t1):
    om = RegionOmega.from_torus(torus_t1, 0.0)
    m, holes = om.mask(CELL), om.hole_mask(CELL)
    x, y = CELL.mesh()
    rho = np.hypot(x, y)
    assert not m[rho < torus_t1.r_out - 1e-9].any()
    assert m[rho > torus_t1.r_out + 1e-9].all()
    assert holes[rho < torus_t1.ell - 1e-9].all() and not holes[rho > torus_t1.ell + 1e-9].any()
    late = RegionOmega.from_torus(torus_t1, 0.99 * torus_t1.t_star)
    assert late.mask(CELL).mean() > 0.99
    assert RegionOmega.everywhere(1.0).mask(CELL).all()


def test_region_bands_and_centres():
    g = PeriodicGrid((10.0, 1.0), (200, 20))
    om = RegionOmega(0.0, 0.1, 0.3, centres=[(3.0, 0.0)], x1_bands=((2.0, 4.0),))
    m = om.mask(g)
    a = np.abs(g.axis(0))
    assert not m[(a < 2.0) | (a > 4.0)].any()
    assert not m[g.nearest_index((3.0, 0.0))]
    assert m[g.nearest_index((-3.0, 0.0))]


def test_bound_on_initial_spikes(torus_t1):
    f, p = build_spiked_u0(CELL, torus_t1)
    om = RegionOmega.from_torus(torus_t1, 0.0)
    ok, chk = check_region_bound(f, om, torus_t1.delta)
    assert ok and chk.max_value == 0.0
    ok, chk = check_region_bound(f, RegionOmega.everywhere(0.0), torus_t1.delta)
    assert not ok and chk.max_value == p.h0
    line = chk.log_line()
    assert line.startswith("t=0, region=all,") and "pass=False" in line


def test_empty_region_passes():
    om = RegionOmega(0.0, 0.0, 0.0, x1_bands=((100.0, 101.0),))
    ok, chk = check_region_bound(ScalarField.constant(CELL, 5.0), om, 0.0)
    assert ok and chk.max_value == -math.inf


def test_evolved_spikes_avoid_torus(torus_t1):
    """Clearance stays positive before extinction; the bound then holds everywhere."""
    f, _ = build_spiked_u0(CELL, torus_t1)
    b = TorusBarrier(torus_t1)
    h = CELL.h_min
    clear, inside = [], []

    def rec(t, g):
        if t < b.t_star:
            clear.append(clearance_graph_torus(g, b, t))
            inside.append(check_region_bound(g, RegionOmega.from_torus(torus_t1, t), b.height + 2 * h)[0])
        return {}

    fin, _ = run(f, FlowParams("mcf", 1.05 * b.t_star, record_every=b.t_star / 20), [rec])
    assert min(clear[1:]) > 0.0 and all(inside)
    assert check_region_bound(fin, RegionOmega.everywhere(1.05 * b.t_star), b.height + 2 * h)[0]

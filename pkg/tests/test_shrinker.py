import math

import numpy as np
import pytest

from mcflab.shrinker import (
    AxisCollision,
    BracketFailure,
    DegenerateProfile,
    NoReturn,
    ProfileState,
    ShrinkerError,
    integrate_profile,
    read_profile,
    scale_torus,
    shoot_torus,
    shrinker_ode_rhs,
    torus_cross_section,
    write_profile,
)


def test_rhs_cylinder_is_fixed_line():
    for z in (-3.0, 0.0, 2.5):
        dr, dz, dth = shrinker_ode_rhs(ProfileState(math.sqrt(2), z, math.pi / 2), 2)
        assert abs(dth) < 1e-15
        assert dr == pytest.approx(0.0, abs=1e-16) and dz == pytest.approx(1.0)


def test_rhs_sphere_curvature():
    _, _, dth = shrinker_ode_rhs(ProfileState(2.0, 0.0, math.pi / 2), 2)
    assert dth == pytest.approx(0.5, abs=1e-15)


def test_rhs_direct_formula():
    assert shrinker_ode_rhs(ProfileState(1.0, 1.0, 0.0), 2) == pytest.approx((1.0, 0.0, -0.5))


def test_rhs_rejects_axis():
    with pytest.raises(ValueError):
        shrinker_ode_rhs(ProfileState(0.0, 0.0, 0.0), 2)


def test_cylinder_never_returns():
    with pytest.raises(NoReturn) as exc:
        integrate_profile(ProfileState(math.sqrt(2), 0.0, math.pi / 2), 2, max_arclength=5.0)
    traj = exc.value.trajectory
    assert traj.s[-1] == pytest.approx(5.0, abs=1e-3)
    assert np.max(np.abs(traj.r - math.sqrt(2))) < 1e-8


def test_sphere_is_circle_of_radius_two():
    # the sphere profile is a quarter circle into the axis
    with pytest.raises(AxisCollision) as exc:
        integrate_profile(ProfileState(2.0, 0.0, math.pi / 2), 2)
    traj = exc.value.trajectory
    assert traj.s.size > 100
    assert np.max(np.abs(np.hypot(traj.r, traj.z) - 2.0)) < 1e-8


def test_bending_arc_is_fourth_order():
    start = ProfileState(1.0, 0.0, math.pi / 2)

    def end(h):
        try:
            traj = integrate_profile(start, 2, step=h)
        except ShrinkerError as e:
            traj = e.trajectory
        return np.array([traj.end.r, traj.end.theta, traj.s[-1]])

    a, b, c = end(4e-3), end(2e-3), end(1e-3)
    ratio = np.linalg.norm(a - b) / np.linalg.norm(b - c)
    assert 12.0 < ratio < 20.0


def test_shoot_torus_reference_values(torus):
    assert abs(torus.miss) < 1e-10
    assert torus.is_convex()
    assert 0 < torus.ell < torus.r_out
    assert np.max(np.abs(torus.residual())) < 1e-6
    # recorded reference radii of the computed profile
    assert torus.ell == pytest.approx(0.4371239671, abs=1e-8)
    assert torus.r_out == pytest.approx(3.3147082666, abs=1e-8)
    assert torus.delta == pytest.approx(0.9217140023, abs=1e-8)


def test_sphere_bracket_rejected():
    with pytest.raises(DegenerateProfile):
        shoot_torus(2, bracket=(1.9, 2.1))


def test_constant_sign_bracket_fails():
    with pytest.raises(BracketFailure):
        shoot_torus(2, bracket=(0.3, 0.35))


def test_scale_identity(torus):
    same = scale_torus(torus, torus.r_out, torus.delta)
    assert same.t_star == torus.t_star
    np.testing.assert_array_equal(same.r, torus.r)


def test_scale_targets(torus_t1):
    assert torus_t1.r_out <= 0.45 < 0.5
    assert torus_t1.delta <= 0.1 + 1e-15
    assert torus_t1.t_star == pytest.approx(torus_t1.scale ** 2)


def test_scale_round_trip(torus):
    lam = 0.123
    back = torus.scaled(lam).scaled(1 / lam)
    np.testing.assert_allclose(back.r, torus.r, rtol=1e-14)
    np.testing.assert_allclose(back.z, torus.z, rtol=1e-14, atol=1e-15)
    assert back.t_star == pytest.approx(torus.t_star, rel=1e-14)


def test_cross_section_endpoints(torus):
    lo, hi = torus_cross_section(torus, torus.ell)
    assert abs(lo) < 1e-9 and abs(hi) < 1e-9
    lo, hi = torus_cross_section(torus, torus.rho_peak)
    assert hi == pytest.approx(torus.delta, abs=1e-9)
    with pytest.raises(ValueError):
        torus_cross_section(torus, torus.r_out + 0.1)


def test_cross_section_matches_fine_profile(torus):
    fine = shoot_torus(2, step=1e-5)
    rho = 0.5 * (torus.ell + torus.r_out)
    np.testing.assert_allclose(torus_cross_section(torus, rho), torus_cross_section(fine, rho), atol=1e-8)


def test_profile_file_round_trip(torus, tmp_path):
    write_profile(torus, tmp_path / "profile.csv")
    meta = (tmp_path / "profile.meta").read_text()
    for key in ("n", "ell", "r_out", "delta", "t_star", "step", "tol"):
        assert f"{key}=" in meta
    assert (tmp_path / "profile.csv").read_text().startswith("s,r,z,theta\n")
    back = read_profile(tmp_path / "profile.csv")
    assert back.ell == torus.ell and back.delta == torus.delta
    np.testing.assert_array_equal(back.theta, torus.theta)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcflab.grid import PeriodicGrid, ScalarField, read_snapshot, restrict, write_snapshot
from mcflab.series import TimeSeries


def test_grid_defaults_centre_box():
    g = PeriodicGrid((1.0, 2.0), (16, 32))
    assert g.origin == (-0.5, -1.0)
    assert g.spacing == (1 / 16, 1 / 16)
    assert g.axis(0)[0] == -0.5 and g.axis(0)[-1] == pytest.approx(0.5 - 1 / 16)


@pytest.mark.parametrize("extents, counts", [((1.0,), (4,)), ((1.0, 1.0), (16,)), ((0.0,), (16,)),
                                             ((1.0, 1.0, 1.0), (8, 8, 8))])
def test_grid_rejects_bad_shapes(extents, counts):
    with pytest.raises(ValueError):
        PeriodicGrid(extents, counts)


def test_nearest_index_wraps():
    g = PeriodicGrid((1.0,), (10,), (0.0,))
    assert g.nearest_index(0.0) == (0,)
    assert g.nearest_index(1.0) == (0,)
    assert g.nearest_index(-0.1) == (9,)


def test_wrap_delta_is_minimum_image():
    g = PeriodicGrid((2.0,), (8,))
    np.testing.assert_allclose(g.wrap_delta(np.array([1.5, -1.5, 0.3]), 0), [-0.5, 0.5, 0.3])


def test_field_shape_checked():
    g = PeriodicGrid((1.0,), (8,))
    with pytest.raises(ValueError):
        ScalarField(g, np.zeros(9))


@pytest.mark.parametrize("factor", [2, 3, 4])
def test_restrict_keeps_integral_and_constants(factor):
    g = PeriodicGrid((1.0, 1.0), (48, 48))
    rng = np.random.default_rng(factor)
    f = ScalarField(g, rng.random(g.shape))
    c = restrict(f, factor)
    assert c.grid.shape == (48 // factor,) * 2
    assert c.mean() == pytest.approx(f.mean(), rel=1e-13)
    assert np.allclose(restrict(ScalarField.constant(g, 3.0), factor).values, 3.0)


def test_restrict_preserves_order():
    g = PeriodicGrid((1.0,), (64,))
    rng = np.random.default_rng(1)
    lo = rng.random(64)
    hi = lo + rng.random(64) * 0.1
    assert np.all(restrict(ScalarField(g, hi), 4).values >= restrict(ScalarField(g, lo), 4).values)


@pytest.mark.parametrize("dim", [1, 2])
def test_snapshot_round_trip(tmp_path, dim):
    g = PeriodicGrid((2.0,) * dim, (8,) * dim, (-1.0,) * dim)
    f = ScalarField.from_function(g, lambda *xs: np.sin(3 * xs[0]) + 1e-17 * math.pi)
    write_snapshot(tmp_path / "s.txt", f, 0.125)
    head = (tmp_path / "s.txt").read_text().splitlines()[:5]
    assert [line.split("=")[0] for line in head] == ["dim", "extents", "counts", "origin", "t"]
    back, t = read_snapshot(tmp_path / "s.txt")
    assert t == 0.125 and back.grid == g
    np.testing.assert_array_equal(back.values, f.values)


def test_series_columns_and_csv(tmp_path):
    g = PeriodicGrid((1.0,), (8,), (0.0,))
    ts = TimeSeries([(0.0,), (0.5,)])
    ts.append(0.0, ScalarField.from_function(g, lambda x: x))
    ts.append(0.1, ScalarField.constant(g, 2.0), {"clr": 0.5})
    assert ts.columns == ["t", "sup", "inf", "mean", "probe0", "probe1", "clr"]
    assert math.isnan(ts["clr"][0]) and ts["clr"][1] == 0.5
    assert ts.last()["probe1"] == 2.0
    ts.to_csv(tmp_path / "s.csv")
    back = TimeSeries.read_csv(tmp_path / "s.csv")
    assert back.columns == ts.columns
    np.testing.assert_array_equal(back["sup"], ts["sup"])


def test_series_requires_increasing_time():
    ts = TimeSeries()
    ts.append(1.0, sup=1, inf=0, mean=0.5)
    with pytest.raises(ValueError):
        ts.append(1.0, sup=1, inf=0, mean=0.5)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.floats(-5, 5))
def test_restrict_of_constant_is_constant(k, c):
    factor = 2 ** k
    g = PeriodicGrid((1.0,), (8 * factor,))
    np.testing.assert_allclose(restrict(ScalarField.constant(g, c), factor).values, c, atol=1e-14)

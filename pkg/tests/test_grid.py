import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from reprolab.errors import GridError, GridMismatchError, OffGridShiftError
from reprolab.grid import (GridSpec, SampledFunction, fourier_transform, l2_inner, phase_space_shift, reflect,
                           translate)
from reprolab.wavelets import gaussian, hermite

GRID = GridSpec.symmetric(8, 256)


def _gauss_packet(grid, x0, xi0, width):
    x = grid.mesh()[..., 0]
    return SampledFunction(grid, np.exp(-np.pi * ((x - x0) / width) ** 2 + 2j * np.pi * xi0 * x))


@pytest.mark.parametrize("kw", [dict(lo=(0,), hi=(1,), n=(12,)), dict(lo=(1,), hi=(0,), n=(16,)),
                                dict(lo=(0,), hi=(1,), n=(4,)), dict(lo=(0, 0), hi=(1,), n=(16, 16))])
def test_grid_rejects_bad_specs(kw):
    with pytest.raises(GridError):
        GridSpec(**kw)


def test_grid_geometry():
    g = GridSpec.symmetric(2, 16, cell_centered=True)
    assert g.step == (0.25,)
    assert np.allclose(g.axis(0), -g.axis(0)[::-1])
    assert g.reciprocal().step == pytest.approx((1 / 4,))
    assert g.reciprocal().is_reciprocal_of(g)


def test_values_shape_checked():
    with pytest.raises(GridError):
        SampledFunction(GRID, np.zeros(10))
    with pytest.raises(GridError):
        SampledFunction(GRID, np.full(256, np.nan))


def test_values_are_immutable():
    f = gaussian(GRID)
    with pytest.raises(ValueError):
        f.values[0] = 1.0


@given(x0=st.floats(-2, 2), xi0=st.floats(-3, 3), w=st.floats(0.5, 1.5),
       y0=st.floats(-2, 2), eta0=st.floats(-3, 3), v=st.floats(0.5, 1.5))
def test_parseval(x0, xi0, w, y0, eta0, v):
    f = _gauss_packet(GRID, x0, xi0, w)
    g = _gauss_packet(GRID, y0, eta0, v)
    lhs = l2_inner(f, g)
    rhs = l2_inner(fourier_transform(f), fourier_transform(g))
    assert abs(lhs - rhs) <= 1e-9 * f.l2_norm() * g.l2_norm()


@given(st.lists(st.floats(-1, 1), min_size=32, max_size=32), st.lists(st.floats(-1, 1), min_size=32, max_size=32))
def test_fourier_round_trip(re, im):
    grid = GridSpec.symmetric(3, 32, cell_centered=True)
    f = SampledFunction(grid, np.array(re) + 1j * np.array(im))
    back = fourier_transform(fourier_transform(f), inverse=True, out_grid=grid)
    scale = max(1e-300, np.max(np.abs(f.values)))
    assert np.max(np.abs(back.values - f.values)) <= 1e-12 * max(1.0, scale)


def test_gaussian_is_its_own_transform():
    f = gaussian(GRID)
    fh = fourier_transform(f)
    xi = fh.grid.mesh()[..., 0]
    assert np.max(np.abs(fh.values - np.exp(-np.pi * xi ** 2) * 2 ** 0.25)) < 1e-12


def test_fourier_2d_separable():
    grid = GridSpec.symmetric(6, 64, 2)
    f = gaussian(grid, dim=2)
    fh = fourier_transform(f)
    assert fh.l2_norm() == pytest.approx(1.0, abs=1e-12)


@given(k=st.integers(-40, 40), xi=st.floats(-4, 4))
def test_phase_space_shift_is_isometric(k, xi):
    f = hermite(1, GRID)
    g = phase_space_shift(f, [k * GRID.step[0]], [xi])
    assert g.l2_norm() == pytest.approx(f.l2_norm(), rel=1e-10)


def test_shift_must_be_on_grid():
    with pytest.raises(OffGridShiftError):
        phase_space_shift(gaussian(GRID), [0.01], [0.0])


def test_translate_zero_fills():
    out = translate(np.arange(1.0, 5.0), [2])
    assert out.tolist() == [0, 0, 1, 2]
    assert translate(np.arange(1.0, 5.0), [9]).tolist() == [0, 0, 0, 0]


@given(st.lists(st.floats(-1, 1), min_size=16, max_size=16))
def test_reflect_is_an_involution(vals):
    grid = GridSpec.symmetric(2, 16, cell_centered=True)
    f = SampledFunction(grid, np.array(vals))
    assert np.array_equal(reflect(reflect(f)).values, f.values)
    assert np.array_equal(reflect(f).values, f.values[::-1])


def test_reflect_off_lattice_uses_interpolation():
    grid = GridSpec.uniform(-7.9, 8.1, 256)
    f = SampledFunction.from_callable(grid, lambda p: np.exp(-np.pi * (p[..., 0] - 0.4) ** 2))
    expected = np.exp(-np.pi * (grid.mesh()[..., 0] + 0.4) ** 2)
    assert np.max(np.abs(reflect(f).values - expected)) < 1e-10


def test_inner_product_grid_mismatch():
    with pytest.raises(GridMismatchError):
        l2_inner(gaussian(GRID), gaussian(GridSpec.symmetric(8, 128)))


@pytest.mark.parametrize("method", ["fourier", "cubic", "linear"])
def test_evaluate_between_samples(method):
    f = gaussian(GridSpec.symmetric(8, 512))
    pts = np.array([[0.013], [0.5123], [-1.777]])
    exact = 2 ** 0.25 * np.exp(-np.pi * pts[:, 0] ** 2)
    tol = {"fourier": 1e-10, "cubic": 1e-5, "linear": 1e-3}[method]
    assert np.max(np.abs(f.evaluate(pts, method=method) - exact)) < tol


@given(st.floats(-3, 3), st.floats(-3, 3))
def test_cached_interpolator_matches_evaluate(x, y):
    f = gaussian(GridSpec.symmetric(4, 64, 2), dim=2)
    pts = np.array([[x, y]])
    assert f.interpolator("cubic")(pts) == pytest.approx(f.evaluate(pts, method="cubic"), abs=1e-13)


def test_csv_round_trip(tmp_path):
    f = hermite(2, GridSpec.symmetric(2, 16, 2))
    path = tmp_path / "f.csv"
    f.to_csv(path)
    assert path.read_text().splitlines()[0] == "axis0,axis1,re,im"
    g = SampledFunction.from_csv(path)
    assert g.grid.same_as(f.grid)
    assert np.allclose(g.values, f.values, rtol=0, atol=1e-15)

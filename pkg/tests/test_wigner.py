import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from reprolab.grid import GridSpec, SampledFunction, fourier_transform, l2_inner, phase_space_shift
from reprolab.wavelets import box, gaussian, hermite
from reprolab.wigner import (abs_mass_in_window, box_wigner_oracle, cross_wigner, half_sample, marginals,
                             moyal_pairing, wigner)

GRID = GridSpec.symmetric(8, 128)


def _packet(x0, xi0, w=1.0, grid=GRID):
    x = grid.mesh()[..., 0]
    return SampledFunction(grid, np.exp(-np.pi * ((x - x0) / w) ** 2 + 2j * np.pi * xi0 * x))


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0.6, 1.6))
def test_real_and_bounded(x0, xi0, w):
    f = _packet(x0, xi0, w)
    wf = wigner(f)
    norm2 = f.l2_norm() ** 2
    assert wf.max_imag() <= 1e-9 * wf.sup_norm()
    assert wf.sup_norm() <= 2 * norm2 * (1 + 1e-6)


def test_gaussian_wigner_closed_form():
    # W of 2^{1/4} e^{-pi x^2} is 2 e^{-2 pi (x^2 + xi^2)}
    wf = wigner(gaussian(GRID))
    x, xi = np.meshgrid(wf.space_grid.axis(0), wf.freq_grid.axis(0), indexing="ij")
    assert np.max(np.abs(wf.values - 2 * np.exp(-2 * np.pi * (x ** 2 + xi ** 2)))) < 1e-12


@pytest.mark.parametrize("m,n", [(0, 0), (0, 1), (1, 1), (1, 2), (2, 2), (0, 3)])
def test_moyal_hermite_pairs(m, n):
    f, g = hermite(m, GRID), hermite(n, GRID)
    assert abs(moyal_pairing(f, g) - abs(l2_inner(f, g)) ** 2) <= 1e-5


def test_marginals_of_gaussian():
    f = gaussian(GRID)
    m = marginals(wigner(f))
    assert np.max(np.abs(m.space.values - np.abs(f.values) ** 2)) < 1e-6
    fh = fourier_transform(f)
    assert np.max(np.abs(m.frequency.values - np.abs(fh.values) ** 2)) < 1e-6
    assert m.total == pytest.approx(1.0, abs=1e-6)


@given(k=st.integers(-16, 16), p=st.sampled_from([-1.5, -0.25, 0.0, 0.5, 1.0]))
def test_covariance_under_shifts(k, p):
    f = gaussian(GRID)
    q = k * GRID.step[0]
    wf = wigner(f)
    wg = wigner(phase_space_shift(f, [q], [p]))
    x, xi = np.meshgrid(wf.space_grid.axis(0), wf.freq_grid.axis(0), indexing="ij")
    expected = 2 * np.exp(-2 * np.pi * ((x - q) ** 2 + (xi - p) ** 2))
    assert np.max(np.abs(wg.values - expected)) < 1e-8


def test_cross_wigner_is_hermitian():
    f, g = hermite(1, GRID), _packet(0.5, 0.25)
    w1, w2 = cross_wigner(f, g), cross_wigner(g, f)
    assert np.max(np.abs(w1.values - np.conj(w2.values))) < 1e-12


def test_half_sample_keeps_even_samples():
    f = hermite(2, GRID)
    for method in ("fourier", "linear"):
        assert np.allclose(half_sample(f, method)[::2], f.values, atol=1e-12)


def test_wigner_2d_structure():
    grid = GridSpec.symmetric(4, 16, 2)
    f = gaussian(grid, dim=2)
    wf = wigner(f)
    assert wf.grid.dim == 4
    assert wf.max_imag() < 1e-12
    assert wf.total_integral() == pytest.approx(f.l2_norm() ** 2, abs=1e-12)


def _box_wigner_by_quadrature(x, xi):
    width = 1 - 2 * abs(x)
    if width <= 0:
        return 0.0
    return integrate.quad(lambda y: np.cos(2 * np.pi * y * xi), -width, width)[0]


@pytest.mark.parametrize("x,xi", [(0.0, 0.3), (0.1, 1.7), (-0.3, 0.0), (0.45, 5.2), (0.7, 1.0)])
def test_box_oracle_matches_definition(x, xi):
    assert box_wigner_oracle(x, xi) == pytest.approx(_box_wigner_by_quadrature(x, xi), abs=1e-10)


def test_box_wigner_against_oracle():
    grid = GridSpec.symmetric(2, 1024, cell_centered=True)
    wf = wigner(box(grid), half_sample_method="linear")
    x, xi = np.meshgrid(wf.space_grid.axis(0), wf.freq_grid.axis(0), indexing="ij")
    h = grid.step[0]
    keep = (np.abs(xi) <= 32) & (np.abs(xi) > 2 / (1024 * h)) & (np.abs(np.abs(x) - 0.5) > 2 * h)
    err = np.abs(wf.values.real - box_wigner_oracle(x, xi))[keep]
    assert err.max() < 2e-3


def test_box_abs_mass_grows():
    grid = GridSpec.symmetric(2, 512, cell_centered=True)
    wf = wigner(box(grid), half_sample_method="linear")
    masses = [abs_mass_in_window(wf, L) for L in (4, 16, 64)]
    assert masses[0] < masses[1] < masses[2]


def test_csv_slices(tmp_path):
    wf = wigner(gaussian(GridSpec.symmetric(4, 16)))
    text = wf.slice_csv(freq_index=8)
    assert len(text.strip().splitlines()) == 17
    wf.to_csv(tmp_path / "w.csv")
    assert (tmp_path / "w.csv").exists()

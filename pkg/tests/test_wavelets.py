import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from reprolab import admissibility as adm
from reprolab import wavelets as wv
from reprolab.errors import ConstructionError
from reprolab.groups import builtin_catalog
from reprolab.grid import GridSpec, SampledFunction
from reprolab.phimap import builtin_map


def test_hermite_orthonormal():
    grid = GridSpec.symmetric(8, 256)
    hs = [wv.hermite(n, grid) for n in range(5)]
    gram = np.array([[np.vdot(b.values, a.values) * grid.step[0] for b in hs] for a in hs])
    assert np.allclose(gram, np.eye(5), atol=1e-10)


def test_h1_norm():
    oracle = integrate.quad(lambda x: x ** 2, 1, 2)[0] * 2 / 2  # |phi_1|^2 = x^2 / 2 on both halves
    assert oracle == pytest.approx(7 / 3)
    assert wv.h1_wavelet().l2_norm() ** 2 == pytest.approx(7 / 3, abs=1e-6)


def test_tensor_symmetry():
    psi = wv.tdw_tensor_wavelet(GridSpec.symmetric(4, 64, 2, cell_centered=True))
    assert np.allclose(psi.values, psi.values.T, rtol=0, atol=1e-15)
    assert np.allclose(np.abs(psi.values), np.abs(psi.values[::-1, ::-1]))


def test_tdh_orbit_coordinates_round_trip():
    s, t = np.array([0.3, -0.5]), np.array([0.2, 1.1])
    x = wv.tdh_orbit_point(s, t)
    s2, t2, inside = wv.tdh_orbit_coords(x)
    assert inside.all()
    assert np.allclose(s2, s) and np.allclose(t2, t)


@given(st.floats(-1, 1), st.floats(-1, 1))
def test_tdh_orbit_is_the_d_action(s, t):
    group = builtin_catalog("TDH")
    a = group.d_matrix(np.array([-s, t]))
    assert np.allclose(a @ np.array([-1.0, 0.0]), wv.tdh_orbit_point(s, -t), atol=1e-12)


def test_bump_normalized_and_compact():
    grid = GridSpec.symmetric(4, 64, 2, cell_centered=True)
    f = wv.bump(grid, (1.0, 1.0), 0.5)
    assert f.l2_norm() == pytest.approx(1.0)
    far = np.linalg.norm(grid.mesh() - 1.0, axis=-1) >= 0.5
    assert np.all(f.values[far] == 0)
    with pytest.raises(ConstructionError):
        wv.bump(GridSpec.symmetric(4, 8), [0.1], 0.01)


@pytest.fixture(scope="module")
def tdh_setup():
    group, m = builtin_catalog("TDH"), builtin_map("TDH")
    sheet = m.regions.sheet("Y1")
    plus = wv.orbit_normalize(group, m, sheet, wv.tdh_orbit_bump())
    return group, m, sheet, plus


def test_orbit_ratio_is_d_invariant(tdh_setup):
    group, m, sheet, plus = tdh_setup
    pts = sheet.sampler(np.random.default_rng(7), 6)
    c = wv.orbit_ratio_pullback(group, m, plus, sheet, pts)
    assert np.ptp(c) <= 1e-3 * np.mean(c)
    assert np.mean(c) == pytest.approx(1.0, abs=1e-3)


def test_orbit_normalize_is_idempotent(tdh_setup):
    group, m, sheet, plus = tdh_setup
    again = wv.orbit_normalize(group, m, sheet, plus)
    assert np.max(np.abs(again.values - plus.values)) <= 1e-3 * np.max(np.abs(plus.values))


def test_orbit_normalize_rejects_bumps_outside_sheet():
    group, m = builtin_catalog("TDH"), builtin_map("TDH")
    grid = GridSpec.symmetric(4, 64, 2, cell_centered=True)
    with pytest.raises(ConstructionError):
        wv.orbit_normalize(group, m, m.regions.sheet("Y1"), wv.bump(grid, (2.0, 0.0), 0.5))


def test_tdh_wavelet_satisfies_conditions():
    psi, beta = wv.tdh_wavelet()
    assert 0 < beta < 20
    res = adm.specialized_conditions("TDH", psi)
    assert max(res.residuals) <= 1e-2


def test_zero_oscillation_cross_equals_diagonal(tdh_setup):
    _, m, sheet, plus = tdh_setup
    psi, beta = wv.two_sided_extend(plus, m, sheet, beta=0.0)
    res = adm.specialized_conditions("TDH", psi)
    assert beta == 0.0
    assert abs(res.values[2]) == pytest.approx(res.values[0], rel=1e-9)


def _h1_plus():
    full = wv.h1_wavelet()
    x = full.grid.mesh()[..., 0]
    return full.with_values(np.where(x > 0, full.values, 0))


def test_h1_oscillation_search():
    m = builtin_map("H1")
    sheet = m.regions.sheet("Y1")
    lam = lambda p: p[..., 0] - 1.0
    g = wv.cross_profile(_h1_plus(), m, sheet, lam)
    # Re g vanishes at beta = 1/2 with |g| = 1/pi, so the first accepted root is beta = 1
    assert abs(g(0.5)) == pytest.approx(1 / np.pi, rel=1e-3)
    psi, beta = wv.two_sided_extend(_h1_plus(), m, sheet, lam=lam)
    assert beta == pytest.approx(1.0, abs=1e-3)
    # the closed form carries the conjugate phase on -Y1; both are reproducing
    assert np.max(np.abs(psi.values - np.conj(wv.h1_wavelet().values))) < 1e-2
    assert max(adm.specialized_conditions("H1", psi).residuals) <= 1e-3


def test_find_oscillation_failure():
    with pytest.raises(ConstructionError):
        wv.find_oscillation(lambda b: 1.0 + 0j, beta_max=2.0, scan=11)
    with pytest.raises(ConstructionError):
        wv.find_oscillation(lambda b: 0j)


def test_csv_export_round_trip(tmp_path):
    psi = wv.tdw_tensor_wavelet(GridSpec.symmetric(4, 32, 2, cell_centered=True))
    psi.to_csv(tmp_path / "psi.csv")
    back = SampledFunction.from_csv(tmp_path / "psi.csv")
    assert np.allclose(back.values, psi.values, atol=1e-15)

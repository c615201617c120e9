import numpy as np
import pytest
from scipy import integrate

from reprolab import admissibility as adm
from reprolab import wavelets as wv
from reprolab.errors import SupportError
from reprolab.groups import builtin_catalog
from reprolab.grid import GridSpec
from reprolab.phimap import builtin_map
from reprolab.quadrature import DQuadrature

WAVELET = builtin_catalog("WAVELET")
GABOR = builtin_catalog("GABOR")
FREQS = (0.3, 0.7, 1.0, 1.5, 2.5)


def _mexican_hat_hat_sq(xi):
    return (2 * np.sqrt(2) * np.pi * xi ** 2 * np.exp(-np.pi * xi ** 2)) ** 2


def _calderon_oracle(xi):
    return integrate.quad(lambda s: _mexican_hat_hat_sq(np.exp(s) * xi), -12, 8, limit=200)[0]


@pytest.fixture(scope="module")
def mexican():
    return wv.mexican_hat(GridSpec.symmetric(16, 2048))


@pytest.fixture(scope="module")
def quad():
    return DQuadrature.tensor(WAVELET, [(-6.0, 4.0)], 64, panels=2)


@pytest.mark.parametrize("xi", FREQS)
def test_calderon_against_scipy(mexican, quad, xi):
    oracle = _calderon_oracle(xi)
    assert oracle == pytest.approx(1.0, abs=1e-6)
    assert adm.calderon_integral(mexican, WAVELET, quad, [xi]) == pytest.approx(oracle, abs=1e-4)


def test_calderon_accepts_a_density(quad):
    val = adm.calderon_integral(lambda p: _mexican_hat_hat_sq(p[..., 0]), WAVELET, quad, np.array([[0.5], [2.0]]))
    assert np.allclose(val, 1.0, atol=1e-4)


@pytest.mark.parametrize("xi", FREQS)
def test_wigner_and_calderon_agree(mexican, quad, xi):
    cal = adm.calderon_integral(mexican, WAVELET, quad, [xi])
    wig = adm.wigner_admissibility(mexican, WAVELET, quad, [0.0, xi])
    assert abs(wig - cal) <= 1e-2


def test_gabor_wigner_admissibility_is_the_norm():
    phi = wv.hermite(1, GridSpec.symmetric(6, 128))
    assert adm.wigner_admissibility(phi, GABOR, None, [0.3, -0.2]) == pytest.approx(1.0, abs=1e-6)


def test_box_second_marginal():
    from reprolab.wigner import marginals, wigner
    w = wigner(wv.box(GridSpec.symmetric(2, 512, cell_centered=True)), half_sample_method="linear")
    assert marginals(w).total.real == pytest.approx(1.0, abs=2e-3)


@pytest.mark.parametrize("c", [1.0, 2j, -0.5 + 1j])
def test_weak_functional_is_conjugate_linear(c):
    grid = GridSpec.symmetric(6, 128)
    phi, f = wv.gaussian(grid), wv.hermite(2, grid)
    val = adm.weak_functional(phi, GABOR, [(c, f)])
    assert val == pytest.approx(np.conj(c) * f.l2_norm() ** 2, abs=1e-9)
    assert adm.weak_functional(phi, GABOR, []) == 0


def test_l1_orbit_mass_is_a_diagnostic():
    grid = GridSpec.symmetric(6, 128)
    assert adm.l1_orbit_mass(wv.gaussian(grid), GABOR) == pytest.approx(1.0, abs=1e-6)
    assert adm.l1_orbit_mass(wv.hermite(1, grid), GABOR) > 1.0


def test_specialized_closed_forms():
    res = adm.specialized_conditions("H1", wv.h1_wavelet())
    assert max(res.residuals) <= 1e-6
    res = adm.specialized_conditions("TDW", wv.tdw_tensor_wavelet())
    assert max(res.residuals) <= 1e-3
    scaled = adm.specialized_conditions("TDW", wv.tdw_tensor_wavelet().scaled(2.0))
    assert scaled.values[0] == pytest.approx(4.0, rel=1e-9)


def test_specialized_rejects_mass_on_singular_set():
    with pytest.raises(SupportError):
        adm.specialized_conditions("TDW", wv.gaussian(GridSpec.symmetric(4, 32, 2), dim=2))
    with pytest.raises(KeyError):
        adm.specialized_conditions("TDS", wv.gaussian(GridSpec.symmetric(4, 32, 2), dim=2))


@pytest.mark.parametrize("name,psi_fn", [("H1", wv.h1_wavelet), ("TDW", wv.tdw_tensor_wavelet)])
def test_repthm_by_pullback(name, psi_fn, rng):
    group, m = builtin_catalog(name), builtin_map(name)
    psi = psi_fn()
    sheet = m.regions.sheet("Y1")
    probes = sheet.sampler(rng, 4)
    res = adm.repthm_conditions(group, m, psi, sheet, adm.pullback_quadrature(group, psi, sheet), probes)
    assert not res.rejected
    assert np.allclose(res.diag_plus, 1.0, atol=1e-3)
    assert np.allclose(res.diag_minus, 1.0, atol=1e-3)
    assert np.max(np.abs(res.cross)) <= 1e-3
    assert len(res.reports(name)) == 12


def test_repthm_rejects_singular_and_outside_probes():
    group, m = builtin_catalog("TDW"), builtin_map("TDW")
    psi = wv.tdw_tensor_wavelet()
    sheet = m.regions.sheet("Y1")
    res = adm.repthm_conditions(group, m, psi, sheet, adm.pullback_quadrature(group, psi, sheet),
                                [[0.0, 1.0], [-1.0, 1.0], [1.0, 1.0]])
    assert res.rejected == [0, 1]
    assert np.isnan(res.diag_plus[0])


def test_condition_report_fields():
    rep = adm.condition_report("x", "G", [1.0], 0.5 + 0j, 1.0, 1e-3)
    assert set(rep) == {"check", "group", "probe", "value", "target", "residual", "truncation_estimate"}
    assert rep["residual"] == 0.5

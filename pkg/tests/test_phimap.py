import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from reprolab.errors import RegionSpecError, SupportError
from reprolab.grid import GridSpec
from reprolab.phimap import (QuadraticMap, builtin_map, equivariance_residual, fd_jacobian, nonlinear_plancherel,
                             phi_eval, phi_jacobian, sheet_census, sheet_census_detail, sheet_membership_csv)
from reprolab.groups import CLASS_E_NAMES, builtin_catalog
from reprolab.wavelets import bump

MAPS = CLASS_E_NAMES + ("PSI_P(1)", "PSI_P(0.5)")
pts2 = st.tuples(st.floats(-3, 3), st.floats(-3, 3))


@pytest.mark.parametrize("name", MAPS)
def test_jacobian_matches_finite_differences(name, rng):
    m = builtin_map(name)
    x = rng.uniform(-2, 2, size=(100, m.dim))
    an, fd = phi_jacobian(m, x), fd_jacobian(m, x)
    assert np.max(np.abs(an - fd) / np.maximum(1.0, np.abs(an))) <= 1e-6


@pytest.mark.parametrize("name", MAPS)
@given(x=pts2)
def test_phi_is_even(name, x):
    m = builtin_map(name)
    x = np.array(x[:m.dim])
    assert np.array_equal(phi_eval(m, x), phi_eval(m, -x))


@pytest.mark.parametrize("name", CLASS_E_NAMES)
def test_equivariance(name, rng):
    assert equivariance_residual(builtin_catalog(name), builtin_map(name), 100, rng) <= 1e-10


def test_tdh_jacobian_closed_form():
    m = builtin_map("TDH")
    x = np.array([[1.3, 0.4], [-0.2, 2.0]])
    assert np.allclose(phi_jacobian(m, x), x[:, 0] ** 2 - x[:, 1] ** 2, atol=1e-14)


def test_psi_p_closed_form():
    m = builtin_map("PSI_P(0.7)")
    x = np.array([0.9, -1.4])
    expected = [x[1] * x[0] - 0.5 * x[1] ** 2 * 0.7, 0.5 * x[1] ** 2]
    assert np.allclose(phi_eval(m, x), expected, atol=1e-14)


@pytest.mark.parametrize("name,k", [("TDS", 2), ("SIM2", 2), ("TDH", 4), ("TDW", 4), ("H1", 2), ("PSI_P(1)", 2)])
def test_sheet_census(name, k):
    res = sheet_census_detail(builtin_map(name), probes=30, rng=np.random.default_rng(3))
    assert res.k == k
    assert len(set(res.counts)) == 1
    assert res.k % 2 == 0 and res.k <= 2 ** builtin_map(name).dim


@pytest.mark.parametrize("name", MAPS)
def test_sheets_are_disjoint_and_nonsingular(name, rng):
    m = builtin_map(name)
    for s in m.regions.sheets:
        pts = s.sampler(rng, 200)
        assert np.all(s.contains(pts))
        assert np.all(np.abs(phi_jacobian(m, pts)) > m.regions.singular_tol)
        others = [o for o in m.regions.sheets if o is not s]
        assert not any(np.any(o.contains(pts)) for o in others)
    assert len(m.regions.sheets) % 2 == 0


def test_census_needs_regions():
    m = QuadraticMap(2, builtin_catalog("TDW").sigma_basis)
    with pytest.raises(RegionSpecError):
        sheet_census(m)


def test_membership_csv(tmp_path):
    text = sheet_membership_csv(builtin_map("TDW"), tmp_path / "s.csv", n=16)
    rows = text.strip().splitlines()
    assert rows[0] == "axis0,axis1,sheet"
    assert len(rows) == 257
    assert {r.rsplit(",", 1)[1] for r in rows[1:]} == {"0", "1", "2", "3"}


@pytest.mark.parametrize("name,center", [("TDH", (-2.0, 0.3)), ("TDW", (1.5, 1.5))])
def test_nonlinear_plancherel(name, center):
    m = builtin_map(name)
    c = np.array(center)
    h = bump(GridSpec(tuple(c - 0.75), tuple(c + 0.75), (128, 128)), c, 0.6)
    lhs, rhs = nonlinear_plancherel(m, m.regions.sheet("Y1"), h, GridSpec.symmetric(8, 64, 2))
    assert lhs / rhs == pytest.approx(1.0, abs=1e-2)


def test_plancherel_rejects_support_outside_sheet():
    m = builtin_map("TDW")
    h = bump(GridSpec.symmetric(2, 32, 2), (0.0, 0.0), 0.5)
    with pytest.raises(SupportError):
        nonlinear_plancherel(m, m.regions.sheet("Y1"), h, GridSpec.symmetric(4, 16, 2))

import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from reprolab.errors import SingularMatrixError
from reprolab.groups import GroupElement, builtin_catalog, compose, embed_symplectic
from reprolab.grid import GridSpec, l2_inner
from reprolab.metaplectic import (MetaplecticOp, SymplecticMatrix, apply_metaplectic, class_e_action,
                                  schrodinger_action, standard_j, symplectic_residual, wavelet_action)
from reprolab.wavelets import gaussian, hermite
from reprolab.wigner import wigner

GRID = GridSpec.symmetric(8, 256, cell_centered=True)


def _gauss_wigner(z, d):
    return 2 ** d * np.exp(-2 * np.pi * np.sum(z ** 2, axis=-1))


@given(st.lists(st.floats(-2, 2), min_size=3, max_size=3))
def test_generators_are_symplectic(c):
    a = np.array([[np.exp(c[0]), 0.0], [c[1], np.exp(-c[0])]])
    ops = [MetaplecticOp.dilation(a), MetaplecticOp.chirp([[c[2], c[1]], [c[1], 1.0]]), MetaplecticOp.fourier(2)]
    for op in ops + [MetaplecticOp.composite(*ops)]:
        assert symplectic_residual(op.phase_space_matrix()) <= 1e-10 * max(1, np.abs(op.phase_space_matrix()).max() ** 2)


def test_symplectic_matrix_validation():
    j = standard_j(1)
    assert np.allclose(SymplecticMatrix(j).inverse().entries, -j)
    with pytest.raises(ValueError):
        SymplecticMatrix(np.diag([2.0, 2.0]))
    with pytest.raises(SingularMatrixError):
        MetaplecticOp.dilation([[1.0, 2.0], [2.0, 4.0]])
    with pytest.raises(ValueError):
        MetaplecticOp.chirp([[0.0, 1.0], [0.0, 0.0]])


@given(st.floats(-1, 1), st.floats(-1, 1))
def test_operators_are_unitary(r, c):
    f = hermite(1, GRID)
    for op in (MetaplecticOp.dilation([[np.exp(r)]]), MetaplecticOp.chirp([[c]]), MetaplecticOp.fourier(1)):
        assert apply_metaplectic(op, f).l2_norm() == pytest.approx(f.l2_norm(), rel=1e-9)


def test_fourier_operator_fixes_hermite_up_to_phase():
    grid = GridSpec.symmetric(8, 256)  # n h^2 = 1: the reciprocal grid is the grid itself
    for n in range(4):
        f = hermite(n, grid)
        g = apply_metaplectic(MetaplecticOp.fourier(1), f)
        assert abs(l2_inner(g, f)) == pytest.approx(1.0, abs=1e-10)


def test_chirp_aliasing_warns():
    with pytest.warns(RuntimeWarning):
        apply_metaplectic(MetaplecticOp.chirp([[5.0]]), gaussian(GRID))


def test_schrodinger_action_covariance():
    f = gaussian(GRID)
    q, p = 8 * GRID.step[0], 0.75
    wg = wigner(schrodinger_action(q, p, f))
    x, xi = np.meshgrid(wg.space_grid.axis(0), wg.freq_grid.axis(0), indexing="ij")
    z = np.stack([x - q, xi - p], -1)
    assert np.max(np.abs(wg.values - _gauss_wigner(z, 1))) < 1e-8


@pytest.mark.parametrize("q,r", [(0.0, 0.4), (0.5, 0.0), (-0.7, -0.3), (0.3, 0.5)])
def test_h1_affine_covariance(q, r):
    group = builtin_catalog("H1")
    h = GroupElement([q], [r])
    wg = wigner(class_e_action(group, h, gaussian(GRID)))
    x, xi = np.meshgrid(wg.space_grid.axis(0), wg.freq_grid.axis(0), indexing="ij")
    ginv = np.linalg.inv(embed_symplectic(group, h).entries)
    z = np.stack([x, xi], -1) @ ginv.T
    assert np.max(np.abs(wg.values - _gauss_wigner(z, 1))) < 1e-5


def test_tdw_affine_covariance():
    group = builtin_catalog("TDW")
    grid = GridSpec.symmetric(3, 32, 2)
    h = GroupElement([0.2, -0.1], [0.15, -0.2])
    wg = wigner(class_e_action(group, h, gaussian(grid, dim=2)))
    axes = [wg.grid.axis(i) for i in range(4)]
    z = np.stack(np.meshgrid(*axes, indexing="ij"), -1)
    ginv = np.linalg.inv(embed_symplectic(group, h).entries)
    assert np.max(np.abs(wg.values - _gauss_wigner(z @ ginv.T, 2))) < 1e-5


def test_tdh_homomorphism_up_to_phase(rng):
    group = builtin_catalog("TDH")
    grid = GridSpec.symmetric(5, 64, 2, cell_centered=True)
    f, g = gaussian(grid, dim=2), hermite(1, grid)
    for _ in range(3):
        h = GroupElement(rng.uniform(-0.3, 0.3, 2), rng.uniform(-0.3, 0.3, 2))
        hp = GroupElement(rng.uniform(-0.3, 0.3, 2), rng.uniform(-0.3, 0.3, 2))
        lhs = abs(l2_inner(g, class_e_action(group, h, class_e_action(group, hp, f))))
        rhs = abs(l2_inner(g, class_e_action(group, compose(group, h, hp), f)))
        assert abs(lhs - rhs) <= 1e-5


def test_wavelet_action_both_sides_agree():
    f = gaussian(GridSpec.symmetric(16, 1024))
    g = wavelet_action(0.5, 0.7, f)
    assert g.l2_norm() == pytest.approx(1.0, rel=1e-9)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert g.values[512] == pytest.approx(0.7 ** -0.5 * 2 ** 0.25 * np.exp(-np.pi * (0.5 / 0.7) ** 2), abs=1e-9)

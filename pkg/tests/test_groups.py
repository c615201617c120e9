import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from reprolab.errors import GroupSpecError
from reprolab.groups import (BUILTIN_NAMES, CLASS_E_NAMES, GroupElement, builtin_catalog, compatibility_check,
                             compose, embed_symplectic, haar_invariance_residual, homomorphism_residual, inverse,
                             load_group_spec, parse_group_spec, symplectic_residual_max)
from reprolab.metaplectic import symplectic_residual

coords = st.floats(-2, 2)


@pytest.mark.parametrize("name", CLASS_E_NAMES)
def test_builtin_invariants(name):
    g = builtin_catalog(name)
    assert compatibility_check(g, 100) <= 1e-10
    assert symplectic_residual_max(g, 100) <= 1e-10
    assert homomorphism_residual(g, 50) <= 1e-10


@pytest.mark.parametrize("name", CLASS_E_NAMES)
def test_haar_left_invariance(name):
    assert haar_invariance_residual(builtin_catalog(name), 10) <= 1e-6


@pytest.mark.parametrize("name", CLASS_E_NAMES)
@given(a=st.tuples(coords, coords), b=st.tuples(coords, coords))
def test_theta_is_a_homomorphism(name, a, b):
    g = builtin_catalog(name)
    m = g.d_param_dim
    ca, cb = np.array(a[:m]), np.array(b[:m])
    prod = g.d_matrix(ca) @ g.d_matrix(cb)
    lhs = g.theta_matrix(ca) @ g.theta_matrix(cb)
    # theta depends on a only, so pull back the product through the chart by least squares on coords
    found = _chart_inverse(g, prod)
    rhs = g.theta_matrix(found)
    assert np.max(np.abs(lhs - rhs)) <= 1e-8 * max(1.0, np.abs(lhs).max())


def _chart_inverse(g, a):
    from scipy.optimize import least_squares
    res = least_squares(lambda c: (g.d_matrix(c) - a).ravel(), np.zeros(g.d_param_dim), xtol=1e-15, ftol=1e-15,
                        gtol=1e-15)
    return res.x


@pytest.mark.parametrize("name", CLASS_E_NAMES)
def test_compose_and_inverse(name, rng):
    g = builtin_catalog(name)
    h, hp = g.sample(rng, 2, coord_box=1.0, q_box=1.0)
    lhs = embed_symplectic(g, compose(g, h, hp)).entries
    rhs = embed_symplectic(g, h).entries @ embed_symplectic(g, hp).entries
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * max(1, np.abs(rhs).max())
    e = compose(g, h, inverse(g, h))
    assert np.allclose(e.q, 0, atol=1e-10)
    assert np.allclose(g.d_matrix(e.a_coords), np.eye(g.dim), atol=1e-10)


@given(q=st.tuples(st.floats(-4, 4), st.floats(-4, 4)), s=coords, t=coords)
def test_tdh_embedding_is_symplectic(q, s, t):
    g = builtin_catalog("TDH")
    e = embed_symplectic(g, GroupElement(q, [s, t])).entries
    assert symplectic_residual(e) <= 1e-10 * max(1, np.abs(e).max() ** 2)


def test_tdh_haar_weight_closed_form():
    g = builtin_catalog("TDH")
    c = np.array([[0.3, -0.4], [-1.0, 1.5]])
    assert np.allclose(g.haar_weight(c), np.exp(-4 * c[:, 0]), rtol=1e-12)


def test_catalog_names():
    for name in BUILTIN_NAMES:
        assert builtin_catalog(name) is not None
    assert builtin_catalog("gabor(2)").dim == 2
    with pytest.raises(KeyError):
        builtin_catalog("NOPE")


TDW_YAML = """\
name: MYTDW
dim: 2
sigma_basis:
  - [[1, 0], [0, 0]]
  - [[0, 0], [0, 1]]
d_param_dim: 2
d_matrix: [["exp(s)", 0], [0, "exp(t)"]]
theta_matrix: [["exp(-2*s)", 0], [0, "exp(-2*t)"]]
d_haar_density: "1"
"""


def test_spec_file_matches_builtin(tmp_path):
    path = tmp_path / "g.yaml"
    path.write_text(TDW_YAML)
    g = load_group_spec(path)
    ref = builtin_catalog("TDW")
    c = np.array([[0.3, -0.7]])
    assert np.allclose(g.d_matrix(c), ref.d_matrix(c))
    assert np.allclose(g.haar_weight(c), ref.haar_weight(c))
    assert compatibility_check(g) <= 1e-10


@pytest.mark.parametrize("text,line", [
    (TDW_YAML.replace('"exp(-2*t)"', '"exp(-2*t"'), 8),
    (TDW_YAML.replace("d_haar_density", "haar"), 9),
    (TDW_YAML.replace('"exp(-2*t)"', '"exp(-3*t)"'), 1),
    (TDW_YAML.replace("dim: 2\n", "dim: two\n"), 2),
    ("name: [unclosed", 1),
])
def test_spec_errors_carry_location(text, line):
    with pytest.raises(GroupSpecError) as info:
        parse_group_spec(text)
    assert info.value.line == line
    assert info.value.column is not None

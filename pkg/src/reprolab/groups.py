"""Group descriptors: class-E groups H = Sigma x| D, Gabor and wavelet groups.

A class-E group is stored through explicit coordinate charts.  Elements are
h(q, a) with q in R^d and ``a = d_matrix(coords)``; as a symplectic matrix

    h(q, a) = [[a, 0], [sigma_q a, a^{-T}]],   sigma_q = sum_i q_i sigma^i,

and the product law is h(q, a) h(q', a') = h(theta(a) q' + q, a a').  Every
builtin uses coordinates in which D is additive, so a a' corresponds to
coordinate addition (modulo the period of angular coordinates).

Haar measure: dh = dq da / |det theta(a)|, with da the coordinate Lebesgue
measure times ``d_haar_density``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import GroupSpecError
from .expr import Expression, ExpressionError
from .metaplectic import SymplecticMatrix

MatrixFn = Callable[[np.ndarray], np.ndarray]

DEFAULT_COORD_BOX = 2.0
DEFAULT_Q_BOX = 4.0


@dataclass(frozen=True)
class GroupElement:
    q: np.ndarray
    a_coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "q", np.atleast_1d(np.asarray(self.q, dtype=float)))
        object.__setattr__(self, "a_coords", np.atleast_1d(np.asarray(self.a_coords, dtype=float)))

    def __eq__(self, other):
        return (isinstance(other, GroupElement) and np.array_equal(self.q, other.q)
                and np.array_equal(self.a_coords, other.a_coords))

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.q, self.a_coords])


@dataclass(frozen=True, eq=False)
class ClassEGroup:
    """Descriptor of a class-E group.

    ``d_matrix``, ``theta_matrix`` and ``d_haar_density`` accept coordinate
    arrays of shape (..., m) and broadcast over the leading axes.
    ``periods`` gives the period of each coordinate (None if unbounded).
    """

    name: str
    dim: int
    sigma_basis: np.ndarray
    d_param_dim: int
    d_matrix: MatrixFn
    theta_matrix: MatrixFn
    d_haar_density: Callable[[np.ndarray], np.ndarray]
    coord_names: tuple[str, ...] = ()
    periods: tuple[float | None, ...] = ()
    validate: bool = True

    kind = "class_e"

    def __post_init__(self):
        basis = np.asarray(self.sigma_basis, dtype=float)
        if basis.shape != (self.dim, self.dim, self.dim):
            raise GroupSpecError(f"sigma_basis must hold {self.dim} matrices of size {self.dim}x{self.dim}")
        basis.setflags(write=False)
        object.__setattr__(self, "sigma_basis", basis)
        if not self.coord_names:
            object.__setattr__(self, "coord_names", default_coord_names(self.d_param_dim))
        if not self.periods:
            object.__setattr__(self, "periods", (None,) * self.d_param_dim)
        if self.validate:
            validate_group(self)

    def sigma(self, q) -> np.ndarray:
        """sigma_q = sum_i q_i sigma^i, broadcasting over leading axes of q."""
        q = np.asarray(q, dtype=float)
        return np.tensordot(q, self.sigma_basis, axes=([-1], [0]))

    def identity(self) -> GroupElement:
        return GroupElement(np.zeros(self.dim), np.zeros(self.d_param_dim))

    def validate_element(self, h: GroupElement) -> None:
        if h.q.shape != (self.dim,) or h.a_coords.shape != (self.d_param_dim,):
            raise ValueError(f"element shape does not match {self.name}")
        if not (np.all(np.isfinite(h.q)) and np.all(np.isfinite(h.a_coords))):
            raise ValueError("element coordinates must be finite")
        if abs(np.linalg.det(self.d_matrix(h.a_coords))) <= 1e-12:
            raise ValueError("a-coordinates give a singular matrix")

    def wrap(self, coords: np.ndarray) -> np.ndarray:
        coords = np.array(coords, dtype=float)
        for i, p in enumerate(self.periods):
            if p is not None:
                coords[..., i] = np.mod(coords[..., i], p)
        return coords

    def haar_weight(self, a_coords) -> np.ndarray:
        a_coords = np.asarray(a_coords, dtype=float)
        det = np.abs(np.linalg.det(self.theta_matrix(a_coords)))
        return self.d_haar_density(a_coords) / det

    def sample(self, rng: np.random.Generator, n: int, coord_box: float = DEFAULT_COORD_BOX,
               q_box: float = DEFAULT_Q_BOX) -> list[GroupElement]:
        a = rng.uniform(-coord_box, coord_box, size=(n, self.d_param_dim))
        q = rng.uniform(-q_box, q_box, size=(n, self.dim))
        return [GroupElement(qq, aa) for qq, aa in zip(q, a)]


@dataclass(frozen=True, eq=False)
class GaborGroup:
    """Phase-space shifts (q, p) in R^{2d}; D = {I}, Haar measure dq dp."""

    dim: int = 1
    name: str = "GABOR"
    kind = "gabor"
    d_param_dim = 0

    def haar_weight(self, a_coords=None) -> float:
        return 1.0

    def phase_space_inverse(self, q, p, z: np.ndarray) -> np.ndarray:
        """h^{-1} . (x, xi) = (x - q, xi - p); q and p may carry leading batch axes."""
        q, p = np.asarray(q, dtype=float), np.asarray(p, dtype=float)
        q, p = np.broadcast_arrays(q.reshape(q.shape or (1,)), p.reshape(p.shape or (1,)))
        return np.asarray(z, dtype=float) - np.concatenate([q, p], axis=-1)


@dataclass(frozen=True, eq=False)
class WaveletGroup:
    """R^d x| D with nu(q, a) = T_q D_a; Haar measure dq da / |det a|."""

    name: str
    dim: int
    d_param_dim: int
    d_matrix: MatrixFn
    d_haar_density: Callable[[np.ndarray], np.ndarray]
    coord_names: tuple[str, ...] = ()
    periods: tuple[float | None, ...] = ()
    kind = "wavelet"

    def haar_weight(self, a_coords) -> np.ndarray:
        a_coords = np.asarray(a_coords, dtype=float)
        return self.d_haar_density(a_coords) / np.abs(np.linalg.det(self.d_matrix(a_coords)))

    def phase_space_inverse(self, q, a_coords, z: np.ndarray) -> np.ndarray:
        """h^{-1} . (x, xi) = (a^{-1}(x - q), a^T xi)."""
        a = self.d_matrix(np.asarray(a_coords, dtype=float))
        d = self.dim
        z = np.asarray(z, dtype=float)
        x, xi = z[..., :d], z[..., d:]
        xs = (x - np.atleast_1d(q)) @ np.linalg.inv(a).T
        xis = np.broadcast_to(xi @ a, xs.shape)
        return np.concatenate([xs, xis], axis=-1)


def default_coord_names(m: int) -> tuple[str, ...]:
    if m == 1:
        return ("s",)
    if m == 2:
        return ("s", "t")
    return tuple(f"a{i + 1}" for i in range(m))


# --- invariants --------------------------------------------------------------

def validate_group(group: ClassEGroup, samples: int = 20, seed: int = 0) -> None:
    basis = group.sigma_basis
    asym = np.max(np.abs(basis - np.swapaxes(basis, 1, 2)))
    if asym > 1e-12:
        raise GroupSpecError(f"{group.name}: sigma basis matrices are not symmetric ({asym:.2e})")
    flat = basis.reshape(group.dim, -1)
    gram = np.linalg.det(flat @ flat.T)
    if gram <= 1e-10:
        raise GroupSpecError(f"{group.name}: sigma basis is linearly dependent (Gram {gram:.2e})")
    rng = np.random.default_rng(seed)
    a1 = rng.uniform(-1, 1, size=(samples, group.d_param_dim))
    a2 = rng.uniform(-1, 1, size=(samples, group.d_param_dim))
    t1, t2 = group.theta_matrix(a1), group.theta_matrix(a2)
    t12 = group.theta_matrix(group.wrap(a1 + a2))
    hom = np.max(np.abs(t1 @ t2 - t12) / np.maximum(1.0, np.abs(t12)))
    if hom > 1e-10:
        raise GroupSpecError(f"{group.name}: theta is not a homomorphism (residual {hom:.2e})")
    m1, m2 = group.d_matrix(a1), group.d_matrix(a2)
    m12 = group.d_matrix(group.wrap(a1 + a2))
    add = np.max(np.abs(m1 @ m2 - m12) / np.maximum(1.0, np.abs(m12)))
    if add > 1e-10:
        raise GroupSpecError(f"{group.name}: D chart is not coordinate-additive (residual {add:.2e})")
    if np.any(group.d_haar_density(a1) <= 0):
        raise GroupSpecError(f"{group.name}: Haar density must be positive")
    res = compatibility_check(group, samples, rng, coord_box=1.0, q_box=1.0)
    if res > 1e-10:
        raise GroupSpecError(f"{group.name}: compatibility residual {res:.2e} exceeds 1e-10")


def compatibility_check(group: ClassEGroup, samples: int = 100, rng: np.random.Generator | None = None,
                        coord_box: float = DEFAULT_COORD_BOX, q_box: float = DEFAULT_Q_BOX) -> float:
    """max |sigma_{theta(a) q} - a^{-T} sigma_q a^{-1}| over random (a, q).

    Samples a-coords uniformly in [-coord_box, coord_box]^m and q in
    [-q_box, q_box]^d.  The residual is relative to max(1, |rhs|) so the
    e^{4s}-sized entries of the box corners do not swamp the tolerance.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    a_coords = rng.uniform(-coord_box, coord_box, size=(samples, group.d_param_dim))
    q = rng.uniform(-q_box, q_box, size=(samples, group.dim))
    a = group.d_matrix(a_coords)
    theta = group.theta_matrix(a_coords)
    lhs = group.sigma(np.einsum("nij,nj->ni", theta, q))
    ainv = np.linalg.inv(a)
    rhs = np.swapaxes(ainv, 1, 2) @ group.sigma(q) @ ainv
    scale = np.maximum(1.0, np.max(np.abs(rhs), axis=(1, 2)))
    return float(np.max(np.max(np.abs(lhs - rhs), axis=(1, 2)) / scale))


def compose(group: ClassEGroup, h: GroupElement, hp: GroupElement) -> GroupElement:
    """h(q, a) h(q', a') = h(theta(a) q' + q, a a')."""
    group.validate_element(h)
    group.validate_element(hp)
    theta = group.theta_matrix(h.a_coords)
    return GroupElement(theta @ hp.q + h.q, group.wrap(h.a_coords + hp.a_coords))


def inverse(group: ClassEGroup, h: GroupElement) -> GroupElement:
    a_inv = group.wrap(-h.a_coords)
    return GroupElement(-group.theta_matrix(a_inv) @ h.q, a_inv)


def embed_symplectic(group: ClassEGroup, h: GroupElement) -> SymplecticMatrix:
    """[[a, 0], [sigma_q a, a^{-T}]]."""
    group.validate_element(h)
    a = group.d_matrix(h.a_coords)
    zero = np.zeros_like(a)
    g = np.block([[a, zero], [group.sigma(h.q) @ a, np.linalg.inv(a).T]])
    return SymplecticMatrix(g)


def haar_weight(group, a_coords) -> float:
    return float(group.haar_weight(a_coords))


def haar_invariance_residual(group: ClassEGroup, samples: int = 20, rng: np.random.Generator | None = None,
                             step: float = 1e-5) -> float:
    """max |w(h0 h) |det D L_{h0}(h)| / w(h) - 1| with the Jacobian of left
    translation computed by central differences in (q, a) coordinates."""
    rng = np.random.default_rng(1) if rng is None else rng
    d, m = group.dim, group.d_param_dim
    worst = 0.0
    for _ in range(samples):
        h0 = group.sample(rng, 1, coord_box=1.0, q_box=2.0)[0]
        h = group.sample(rng, 1, coord_box=1.0, q_box=2.0)[0]
        v = h.as_vector()

        def left(vec):
            out = compose(group, h0, GroupElement(vec[:d], vec[d:]))
            # undo wrapping so differences stay continuous
            return np.concatenate([out.q, h0.a_coords + vec[d:]])

        jac = np.empty((d + m, d + m))
        for k in range(d + m):
            e = np.zeros(d + m)
            e[k] = step
            jac[:, k] = (left(v + e) - left(v - e)) / (2 * step)
        w0 = group.haar_weight(h.a_coords)
        w1 = group.haar_weight(group.wrap(h0.a_coords + h.a_coords))
        worst = max(worst, abs(w1 * abs(np.linalg.det(jac)) / w0 - 1.0))
    return float(worst)


def symplectic_residual_max(group: ClassEGroup, samples: int = 100, seed: int = 2) -> float:
    from .metaplectic import symplectic_residual
    rng = np.random.default_rng(seed)
    worst = 0.0
    for h in group.sample(rng, samples):
        g = embed_symplectic(group, h).entries
        worst = max(worst, symplectic_residual(g) / max(1.0, np.max(np.abs(g)) ** 2))
    return worst


def homomorphism_residual(group: ClassEGroup, samples: int = 50, seed: int = 3) -> float:
    rng = np.random.default_rng(seed)
    worst = 0.0
    hs = group.sample(rng, 2 * samples)
    for h, hp in zip(hs[::2], hs[1::2]):
        lhs = embed_symplectic(group, compose(group, h, hp)).entries
        rhs = embed_symplectic(group, h).entries @ embed_symplectic(group, hp).entries
        worst = max(worst, float(np.max(np.abs(lhs - rhs)) / max(1.0, np.max(np.abs(rhs)))))
    return worst


# --- builtin charts ----------------------------------------------------------

def _stack2(a00, a01, a10, a11):
    return np.stack([np.stack([a00, a01], -1), np.stack([a10, a11], -1)], -2)


def _coords(c, m):
    c = np.asarray(c, dtype=float)
    if c.shape[-1] != m:
        raise ValueError(f"expected {m} coordinates, got shape {c.shape}")
    return [c[..., i] for i in range(m)]


def hyperbolic(t) -> np.ndarray:
    """H(t) = [[cosh t, sinh t], [sinh t, cosh t]]."""
    t = np.asarray(t, dtype=float)
    return _stack2(np.cosh(t), np.sinh(t), np.sinh(t), np.cosh(t))


def _tds() -> ClassEGroup:
    def d_matrix(c):
        s, l = _coords(c, 2)
        e = np.exp(s)
        return _stack2(e, e * l, 0 * s, e)

    def theta(c):
        # (a^T)^{-2} with a = e^s S_l
        s, l = _coords(c, 2)
        e = np.exp(-2 * s)
        return _stack2(e, 0 * s, -2 * l * e, e)

    basis = [[[0, 1], [1, 0]], [[0, 0], [0, 1]]]
    return ClassEGroup("TDS", 2, np.array(basis, float), 2, d_matrix, theta,
                       lambda c: np.ones(np.shape(c)[:-1]), ("s", "l"))


def _sim2() -> ClassEGroup:
    def d_matrix(c):
        s, p = _coords(c, 2)
        e = np.exp(s)
        return _stack2(e * np.cos(p), e * np.sin(p), -e * np.sin(p), e * np.cos(p))

    def theta(c):
        # (a^T)^{-2} = e^{-2s} R_{2 phi}
        s, p = _coords(c, 2)
        e = np.exp(-2 * s)
        return _stack2(e * np.cos(2 * p), e * np.sin(2 * p), -e * np.sin(2 * p), e * np.cos(2 * p))

    basis = [[[1, 0], [0, -1]], [[0, 1], [1, 0]]]
    return ClassEGroup("SIM2", 2, np.array(basis, float), 2, d_matrix, theta,
                       lambda c: np.ones(np.shape(c)[:-1]), ("s", "phi"), (None, 2 * np.pi))


def _tdh() -> ClassEGroup:
    def d_matrix(c):
        s, t = _coords(c, 2)
        return np.exp(-s)[..., None, None] * hyperbolic(t)

    def theta(c):
        s, t = _coords(c, 2)
        return np.exp(2 * s)[..., None, None] * hyperbolic(-2 * t)

    basis = [[[1, 0], [0, 1]], [[0, 1], [1, 0]]]
    return ClassEGroup("TDH", 2, np.array(basis, float), 2, d_matrix, theta,
                       lambda c: np.ones(np.shape(c)[:-1]), ("s", "t"))


def _tdw() -> ClassEGroup:
    def d_matrix(c):
        s, t = _coords(c, 2)
        return _stack2(np.exp(s), 0 * s, 0 * s, np.exp(t))

    def theta(c):
        s, t = _coords(c, 2)
        return _stack2(np.exp(-2 * s), 0 * s, 0 * s, np.exp(-2 * t))

    basis = [[[1, 0], [0, 0]], [[0, 0], [0, 1]]]
    return ClassEGroup("TDW", 2, np.array(basis, float), 2, d_matrix, theta,
                       lambda c: np.ones(np.shape(c)[:-1]), ("s", "t"))


def _h1() -> ClassEGroup:
    # chart [[1, 0], [b, 1]] diag(a^{-1/2}, a^{1/2}) with a = e^r
    def d_matrix(c):
        (r,) = _coords(c, 1)
        return np.exp(-r / 2)[..., None, None]

    def theta(c):
        (r,) = _coords(c, 1)
        return np.exp(r)[..., None, None]

    return ClassEGroup("H1", 1, np.ones((1, 1, 1)), 1, d_matrix, theta,
                       lambda c: np.ones(np.shape(c)[:-1]), ("r",))


def _wavelet_dilation() -> WaveletGroup:
    def d_matrix(c):
        (s,) = _coords(c, 1)
        return np.exp(s)[..., None, None]

    return WaveletGroup("WAVELET(dilation)", 1, 1, d_matrix, lambda c: np.ones(np.shape(c)[:-1]), ("s",))


def _wavelet_similitude() -> WaveletGroup:
    def d_matrix(c):
        s, p = _coords(c, 2)
        e = np.exp(s)
        return _stack2(e * np.cos(p), e * np.sin(p), -e * np.sin(p), e * np.cos(p))

    return WaveletGroup("WAVELET(similitude)", 2, 2, d_matrix, lambda c: np.ones(np.shape(c)[:-1]),
                        ("s", "phi"), (None, 2 * np.pi))


_CLASS_E = {"TDS": _tds, "SIM2": _sim2, "TDH": _tdh, "TDW": _tdw, "H1": _h1}
CLASS_E_NAMES = tuple(_CLASS_E)
BUILTIN_NAMES = CLASS_E_NAMES + ("GABOR", "WAVELET")


def builtin_catalog(name: str):
    """Builtin descriptor by name.

    Accepted names: TDS, SIM2, TDH, TDW, H1, GABOR (optionally GABOR(2)) and
    WAVELET, WAVELET(dilation), WAVELET(similitude).
    """
    key = name.strip().upper()
    if key in _CLASS_E:
        return _CLASS_E[key]()
    m = re.fullmatch(r"GABOR(?:\((\d)\))?", key)
    if m:
        d = int(m.group(1) or 1)
        if d not in (1, 2):
            raise KeyError(f"Gabor groups are built for d = 1, 2, not {d}")
        return GaborGroup(d, name=f"GABOR({d})" if d != 1 else "GABOR")
    m = re.fullmatch(r"WAVELET(?:\((\w+)\))?", key)
    if m:
        kind = (m.group(1) or "DILATION").lower()
        if kind == "dilation":
            return _wavelet_dilation()
        if kind == "similitude":
            return _wavelet_similitude()
        raise KeyError(f"unknown wavelet dilation group {kind!r}")
    raise KeyError(f"unknown group {name!r}; builtins are {', '.join(BUILTIN_NAMES)}")


# --- group-spec files --------------------------------------------------------

_SPEC_KEYS = {"name", "dim", "sigma_basis", "d_param_dim", "d_matrix", "theta_matrix",
              "d_haar_density", "coords", "periods"}


def load_group_spec(path: str | Path) -> ClassEGroup:
    return parse_group_spec(Path(path).read_text())


def parse_group_spec(text: str) -> ClassEGroup:
    """Build a class-E group from YAML text.

    Keys: ``name``, ``dim``, ``sigma_basis`` (list of row-major d x d
    matrices), ``d_param_dim``, ``d_matrix`` and ``theta_matrix`` (d x d
    nested lists of numbers or expression strings over the coordinates),
    ``d_haar_density`` (expression) and optionally ``coords`` (coordinate
    names, default s, t) and ``periods``.  Errors carry line and column.
    """
    import yaml

    try:
        root = yaml.compose(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise GroupSpecError(str(getattr(exc, "problem", exc)),
                             mark.line + 1 if mark else None, mark.column + 1 if mark else None) from None
    if not isinstance(root, yaml.MappingNode):
        raise GroupSpecError("group spec must be a mapping", 1, 1)
    nodes = {}
    for knode, vnode in root.value:
        key = knode.value
        if key not in _SPEC_KEYS:
            raise GroupSpecError(f"unknown key {key!r}", knode.start_mark.line + 1, knode.start_mark.column + 1)
        nodes[key] = vnode
    for key in ("name", "dim", "sigma_basis", "d_param_dim", "d_matrix", "theta_matrix", "d_haar_density"):
        if key not in nodes:
            raise GroupSpecError(f"missing key {key!r}", 1, 1)

    name = _scalar(nodes["name"], str)
    dim = _scalar(nodes["dim"], int)
    m = _scalar(nodes["d_param_dim"], int)
    names = tuple(_scalar(n, str) for n in _seq(nodes["coords"])) if "coords" in nodes \
        else default_coord_names(m)
    if len(names) != m:
        raise _node_error(nodes.get("coords", nodes["d_param_dim"]), "coords must list d_param_dim names")
    periods = (None,) * m
    if "periods" in nodes:
        periods = tuple(None if n.value in ("null", "~", "") else _number(n) for n in _seq(nodes["periods"]))
    basis = [[[_number(c) for c in _seq(row)] for row in _seq(mat)] for mat in _seq(nodes["sigma_basis"])]
    try:
        basis = np.array(basis, dtype=float)
    except ValueError:
        raise _node_error(nodes["sigma_basis"], "sigma_basis must be a list of square matrices") from None
    d_fn = _matrix_fn(nodes["d_matrix"], dim, names)
    t_fn = _matrix_fn(nodes["theta_matrix"], dim, names)
    dens = _expr(nodes["d_haar_density"], names)

    def density(c):
        c = np.asarray(c, dtype=float)
        return np.broadcast_to(dens(**{n: c[..., i] for i, n in enumerate(names)}), c.shape[:-1]).astype(float)

    try:
        return ClassEGroup(name, dim, basis, m, d_fn, t_fn, density, names, periods)
    except GroupSpecError as exc:
        if exc.line is None:
            raise GroupSpecError(str(exc), 1, 1) from None
        raise


def _node_error(node, message):
    return GroupSpecError(message, node.start_mark.line + 1, node.start_mark.column + 1)


def _seq(node):
    import yaml
    if not isinstance(node, yaml.SequenceNode):
        raise _node_error(node, "expected a list")
    return node.value


def _scalar(node, kind):
    import yaml
    if not isinstance(node, yaml.ScalarNode):
        raise _node_error(node, f"expected a {kind.__name__}")
    try:
        return kind(node.value)
    except ValueError:
        raise _node_error(node, f"expected a {kind.__name__}, got {node.value!r}") from None


def _number(node) -> float:
    import yaml
    if not isinstance(node, yaml.ScalarNode):
        raise _node_error(node, "expected a number")
    try:
        return float(node.value)
    except ValueError:
        pass
    try:
        return float(Expression(node.value, ())())
    except ExpressionError as exc:
        raise _expr_error(node, exc) from None


def _expr_error(node, exc: ExpressionError):
    col = node.start_mark.column + 1
    if node.style in ("'", '"'):
        col += 1
    if exc.column is not None:
        col += exc.column - 1
    msg = str(exc).split(": ", 1)[-1] if exc.column is not None else str(exc)
    return GroupSpecError(msg, node.start_mark.line + 1, col)


def _expr(node, names) -> Expression:
    import yaml
    if not isinstance(node, yaml.ScalarNode):
        raise _node_error(node, "expected an expression")
    try:
        return Expression(node.value, names)
    except ExpressionError as exc:
        raise _expr_error(node, exc) from None


def _matrix_fn(node, dim, names) -> MatrixFn:
    rows = _seq(node)
    if len(rows) != dim:
        raise _node_error(node, f"expected {dim} rows")
    exprs = []
    for row in rows:
        cells = _seq(row)
        if len(cells) != dim:
            raise _node_error(row, f"expected {dim} entries")
        exprs.append([_expr(c, names) for c in cells])

    def fn(c):
        c = np.asarray(c, dtype=float)
        env = {n: c[..., i] for i, n in enumerate(names)}
        out = np.empty(c.shape[:-1] + (dim, dim))
        for i in range(dim):
            for j in range(dim):
                out[..., i, j] = exprs[i][j](**env)
        return out

    return fn

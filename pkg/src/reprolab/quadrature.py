"""Quadrature rules on the parameter group D (coordinate charts).

``DQuadrature`` weights already include the Haar density of D in the chart,
so sum_n w_n g(a_n) approximates int_D g(a) da.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConstructionError, RegionSpecError

DEFAULT_BOX = 3.0
DEFAULT_NODES = 48


@dataclass(frozen=True, eq=False)
class DQuadrature:
    nodes: np.ndarray      # (N, m) a-coordinates
    weights: np.ndarray    # (N,) positive
    box: tuple[tuple[float, float], ...]

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.ndim != 2 or weights.shape != (nodes.shape[0],):
            raise ValueError("nodes must be (N, m) and weights (N,)")
        if np.any(weights <= 0):
            raise ValueError("quadrature weights must be positive")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "box", tuple((float(a), float(b)) for a, b in self.box))

    def __len__(self):
        return len(self.weights)

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """sum_n w_n values[n] with values of shape (N, ...)."""
        return np.tensordot(self.weights, np.asarray(values), axes=(0, 0))

    @classmethod
    def tensor(cls, group, box=None, n: int | tuple[int, ...] = DEFAULT_NODES, panels: int = 1,
               breakpoints=None) -> "DQuadrature":
        """Tensor rule: composite Gauss-Legendre on unbounded coordinates,
        uniform (trapezoidal) nodes on periodic ones.

        ``box`` defaults to [-3, 3] per coordinate (one full period for
        angles); ``breakpoints`` adds panel edges per axis so that known
        discontinuities of the integrand fall on panel boundaries.
        """
        m = group.d_param_dim
        periods = getattr(group, "periods", (None,) * m) or (None,) * m
        ns = (n,) * m if np.isscalar(n) else tuple(n)
        if box is None:
            box = [(-DEFAULT_BOX, DEFAULT_BOX) if p is None else (0.0, p) for p in periods]
        box = [tuple(map(float, b)) for b in box]
        rules = []
        for i in range(m):
            lo, hi = box[i]
            if periods[i] is not None and np.isclose(hi - lo, periods[i]):
                x = lo + (np.arange(ns[i]) + 0.5) * (hi - lo) / ns[i]
                rules.append((x, np.full(ns[i], (hi - lo) / ns[i])))
                continue
            edges = np.linspace(lo, hi, panels + 1)
            if breakpoints is not None and breakpoints[i] is not None:
                extra = [b for b in breakpoints[i] if lo < b < hi]
                edges = np.unique(np.concatenate([edges, extra]))
            per = max(2, int(np.ceil(ns[i] / (len(edges) - 1))))
            gx, gw = np.polynomial.legendre.leggauss(per)
            xs, ws = [], []
            for a, b in zip(edges[:-1], edges[1:]):
                xs.append(0.5 * (b - a) * gx + 0.5 * (a + b))
                ws.append(0.5 * (b - a) * gw)
            rules.append((np.concatenate(xs), np.concatenate(ws)))
        grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
        wgrids = np.meshgrid(*[r[1] for r in rules], indexing="ij")
        nodes = np.stack([g.reshape(-1) for g in grids], -1)
        w = np.prod(np.stack([g.reshape(-1) for g in wgrids], -1), axis=-1)
        w = w * group.d_haar_density(nodes)
        return cls(nodes, w, tuple(box))

    def doubled(self, group, n_factor: int = 2, **kw) -> "DQuadrature":
        """Same node density on a box twice as wide about its center."""
        periods = getattr(group, "periods", (None,) * group.d_param_dim) or (None,) * group.d_param_dim
        box, ns = [], []
        counts = _axis_counts(self)
        for (lo, hi), p, c in zip(self.box, periods, counts):
            if p is not None and np.isclose(hi - lo, p):
                box.append((lo, hi))
                ns.append(c)
            else:
                mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
                box.append((mid - 2 * half, mid + 2 * half))
                ns.append(n_factor * c)
        return DQuadrature.tensor(group, box, tuple(ns), **kw)


def _axis_counts(q: DQuadrature) -> list[int]:
    return [len(np.unique(np.round(q.nodes[:, i], 12))) for i in range(q.nodes.shape[1])]


def _orbit_map(group, coords: np.ndarray, x: np.ndarray) -> np.ndarray:
    """a(coords)^{-1} x for a batch of coordinates."""
    ainv = np.linalg.inv(group.d_matrix(coords))
    return np.einsum("nij,j->ni", ainv, x)


def invert_orbit_map(group, x: np.ndarray, targets: np.ndarray, seed_box: float = 8.0,
                     seed_n: int = 41, tol: float = 1e-12, maxiter: int = 60,
                     fd_step: float = 1e-6) -> tuple[np.ndarray, np.ndarray]:
    """Solve a(c)^{-1} x = u for c, for every target u; returns (coords, |det dc/du|).

    Requires m = d (D acts with open orbits).  Seeds come from a coarse
    coordinate lattice; Newton uses central-difference Jacobians.
    """
    m, d = group.d_param_dim, len(x)
    if m != d:
        raise ConstructionError("orbit pullback needs dim D = d")
    periods = getattr(group, "periods", (None,) * m) or (None,) * m
    axes = [np.linspace(-seed_box, seed_box, seed_n) if p is None else np.linspace(0, p, seed_n, endpoint=False)
            for p in periods]
    lattice = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, m)
    images = _orbit_map(group, lattice, x)
    targets = np.asarray(targets, dtype=float)
    c = np.empty((len(targets), m))
    for start in range(0, len(targets), 4096):
        sl = slice(start, start + 4096)
        dist = np.sum((targets[sl, None, :] - images[None, :, :]) ** 2, axis=-1)
        c[sl] = lattice[np.argmin(dist, axis=1)]

    def jac(cc):
        cols = []
        for k in range(m):
            e = np.zeros(m)
            e[k] = fd_step
            cols.append((_orbit_map(group, cc + e, x) - _orbit_map(group, cc - e, x)) / (2 * fd_step))
        return np.stack(cols, axis=-1)

    for _ in range(maxiter):
        res = _orbit_map(group, c, x) - targets
        if np.max(np.abs(res)) <= tol * max(1.0, float(np.max(np.abs(targets)))):
            break
        c = c - np.linalg.solve(jac(c), res[..., None])[..., 0]
    res = _orbit_map(group, c, x) - targets
    if np.max(np.abs(res)) > 1e-9 * max(1.0, float(np.max(np.abs(targets)))):
        raise RegionSpecError("orbit map inversion did not converge; targets may leave the orbit of x")
    det = np.abs(np.linalg.det(jac(c)))
    return c, 1.0 / det


def orbit_pullback(group, x, grid, mask: np.ndarray) -> DQuadrature:
    """Quadrature on D whose nodes map the probe ``x`` onto the grid samples
    selected by ``mask``: a_k^{-1} x = u_k, weight = density(a_k) |dc/du| du.

    For a function on ``grid`` this turns int_D g(a^{-1} x) da into the
    grid's own Riemann sum, so piecewise-smooth data with jumps on cell
    faces is integrated without interpolation error.
    """
    x = np.asarray(x, dtype=float)
    targets = grid.mesh()[mask]
    coords, jac = invert_orbit_map(group, x, targets)
    w = group.d_haar_density(coords) * jac * grid.cell_volume
    box = tuple((float(coords[:, i].min()), float(coords[:, i].max())) for i in range(coords.shape[1]))
    return DQuadrature(coords, w, box)

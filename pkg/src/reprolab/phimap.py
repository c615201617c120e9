"""The quadratic map Phi_j(x) = -1/2 <sigma^j x, x>, its sheets and the
nonlinear Plancherel identity

    int |int_{Y_j} h(x) exp(2 pi i <q, Phi(x)>) dx|^2 dq = int_{Y_j} |h|^2 / |J_Phi|.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import RegionSpecError, SupportError
from .grid import GridSpec, SampledFunction

Predicate = Callable[[np.ndarray], np.ndarray]
Sampler = Callable[[np.random.Generator, int], np.ndarray]

SINGULAR_TOL = 1e-8
NEWTON_TOL = 1e-10
NEWTON_MAXITER = 60
DEDUP_DIST = 1e-6


@dataclass(frozen=True)
class Sheet:
    name: str
    contains: Predicate
    sampler: Sampler


@dataclass(frozen=True)
class RegionSpec:
    """Image region X with its preimage sheets Y_j (points with |J_Phi| <= tol are in S)."""

    x_contains: Predicate
    x_sampler: Sampler
    sheets: tuple[Sheet, ...]
    singular_tol: float = SINGULAR_TOL

    def sheet(self, name: str) -> Sheet:
        for s in self.sheets:
            if s.name == name:
                return s
        raise KeyError(f"no sheet named {name!r}")

    def membership(self, points: np.ndarray) -> np.ndarray:
        """Index of the sheet containing each point, -1 if none."""
        points = np.asarray(points, dtype=float)
        out = np.full(points.shape[:-1], -1, dtype=int)
        for j, s in enumerate(self.sheets):
            out = np.where((out < 0) & s.contains(points), j, out)
        return out


@dataclass(frozen=True, eq=False)
class QuadraticMap:
    dim: int
    sigma_basis: np.ndarray
    regions: RegionSpec | None = None
    name: str = ""

    def __post_init__(self):
        basis = np.asarray(self.sigma_basis, dtype=float)
        if basis.shape != (self.dim, self.dim, self.dim):
            raise ValueError("sigma_basis must hold d symmetric d x d matrices")
        basis.setflags(write=False)
        object.__setattr__(self, "sigma_basis", basis)
        if self.regions is not None:
            validate_regions(self, self.regions)

    @classmethod
    def from_group(cls, group, regions: RegionSpec | None = None) -> "QuadraticMap":
        return cls(group.dim, group.sigma_basis, regions, group.name)


def phi_eval(m: QuadraticMap, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return -0.5 * np.einsum("...i,jik,...k->...j", x, m.sigma_basis, x)


def phi_differential(m: QuadraticMap, x) -> np.ndarray:
    """D Phi(x); row j is -(sigma^j x)^T."""
    x = np.asarray(x, dtype=float)
    return -np.einsum("jik,...k->...ji", m.sigma_basis, x)


def phi_jacobian(m: QuadraticMap, x) -> np.ndarray:
    return np.linalg.det(phi_differential(m, x))


def fd_jacobian(m: QuadraticMap, x, step: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian determinant (oracle for ``phi_jacobian``)."""
    x = np.asarray(x, dtype=float)
    cols = []
    for k in range(m.dim):
        e = np.zeros(m.dim)
        e[k] = step
        cols.append((phi_eval(m, x + e) - phi_eval(m, x - e)) / (2 * step))
    return np.linalg.det(np.stack(cols, axis=-1))


def equivariance_residual(group, m: QuadraticMap, samples: int = 100,
                          rng: np.random.Generator | None = None, coord_box: float = 2.0,
                          x_box: float = 2.0) -> float:
    """max |Phi(a^{-1} x) - theta(a)^T Phi(x)|, relative to max(1, |rhs|)."""
    rng = np.random.default_rng(0) if rng is None else rng
    a_coords = rng.uniform(-coord_box, coord_box, size=(samples, group.d_param_dim))
    x = rng.uniform(-x_box, x_box, size=(samples, m.dim))
    ainv = np.linalg.inv(group.d_matrix(a_coords))
    lhs = phi_eval(m, np.einsum("nij,nj->ni", ainv, x))
    rhs = np.einsum("nji,nj->ni", group.theta_matrix(a_coords), phi_eval(m, x))
    scale = np.maximum(1.0, np.max(np.abs(rhs), axis=-1))
    return float(np.max(np.max(np.abs(lhs - rhs), axis=-1) / scale))


def validate_regions(m: QuadraticMap, regions: RegionSpec, samples: int = 200, seed: int = 0) -> None:
    k = len(regions.sheets)
    if k % 2 or k > 2 ** m.dim or k == 0:
        raise RegionSpecError(f"sheet count must be even and at most 2^d, got {k}")
    rng = np.random.default_rng(seed)
    for j, s in enumerate(regions.sheets):
        pts = s.sampler(rng, samples)
        if not np.all(s.contains(pts)):
            raise RegionSpecError(f"sampler of sheet {s.name} leaves the sheet")
        if np.any(np.abs(phi_jacobian(m, pts)) <= regions.singular_tol):
            raise RegionSpecError(f"sampler of sheet {s.name} hits the singular set")
        for i, other in enumerate(regions.sheets):
            if i != j and np.any(other.contains(pts)):
                raise RegionSpecError(f"sheets {s.name} and {other.name} overlap")
        if not np.all(regions.x_contains(phi_eval(m, pts))):
            raise RegionSpecError(f"Phi maps sheet {s.name} outside X")
    xs = regions.x_sampler(rng, samples)
    if not np.all(regions.x_contains(xs)):
        raise RegionSpecError("X sampler leaves X")


# --- sheet census ------------------------------------------------------------

def newton_solve(m: QuadraticMap, y: np.ndarray, seeds: np.ndarray, tol: float = NEWTON_TOL,
                 maxiter: int = NEWTON_MAXITER) -> tuple[np.ndarray, np.ndarray]:
    """Damped Newton for Phi(x) = y from each seed; returns (points, converged)."""
    x = np.array(seeds, dtype=float)
    res = phi_eval(m, x) - y
    norm = np.max(np.abs(res), axis=-1)
    done = norm <= tol
    for _ in range(maxiter):
        if np.all(done):
            break
        jac = phi_differential(m, x)
        ok = np.abs(np.linalg.det(jac)) > 1e-14
        step = np.zeros_like(x)
        act = ~done & ok
        if np.any(act):
            step[act] = np.linalg.solve(jac[act], res[act][..., None])[..., 0]
        lam = np.ones(len(x))
        trial = x - step
        tnorm = np.max(np.abs(phi_eval(m, trial) - y), axis=-1)
        for _ in range(20):
            worse = act & (tnorm > norm) & (lam > 1e-6)
            if not np.any(worse):
                break
            lam = np.where(worse, lam / 2, lam)
            trial = x - lam[:, None] * step
            tnorm = np.max(np.abs(phi_eval(m, trial) - y), axis=-1)
        x = np.where(act[:, None], trial, x)
        res = phi_eval(m, x) - y
        norm = np.max(np.abs(res), axis=-1)
        done = norm <= tol * max(1.0, float(np.max(np.abs(y))))
    return x, done


def _dedup(points: np.ndarray, dist: float = DEDUP_DIST) -> np.ndarray:
    kept: list[np.ndarray] = []
    for p in points:
        if all(np.max(np.abs(p - k)) > dist for k in kept):
            kept.append(p)
    return np.array(kept).reshape(-1, points.shape[-1])


@dataclass
class CensusResult:
    k: int
    counts: list[int]
    discarded: int
    roots: list[np.ndarray] = field(repr=False, default_factory=list)


def sheet_census_detail(m: QuadraticMap, regions: RegionSpec | None = None, probes: int = 50,
                        rng: np.random.Generator | None = None, seeds_per_sheet: int = 4,
                        lattice: int = 7, lattice_box: float = 3.0) -> CensusResult:
    regions = m.regions if regions is None else regions
    if regions is None:
        raise RegionSpecError("no region spec attached to the map")
    rng = np.random.default_rng(0) if rng is None else rng
    axes = [np.linspace(-lattice_box, lattice_box, lattice)] * m.dim
    grid_seeds = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, m.dim)
    counts: list[int] = []
    roots_all: list[np.ndarray] = []
    discarded = 0
    budget = 3 * probes
    while len(counts) < probes:
        if budget == 0:
            raise RegionSpecError(f"only {len(counts)} of {probes} probes converged")
        budget -= 1
        y = regions.x_sampler(rng, 1)[0]
        seeds = [grid_seeds] + [s.sampler(rng, seeds_per_sheet) for s in regions.sheets]
        x, ok = newton_solve(m, y, np.concatenate(seeds))
        x = x[ok]
        x = x[np.abs(phi_jacobian(m, x)) > regions.singular_tol] if len(x) else x
        if len(x) == 0:
            warnings.warn(f"Newton did not converge for probe {y}; probe discarded", RuntimeWarning)
            discarded += 1
            continue
        roots = _dedup(x)
        member = np.stack([s.contains(roots) for s in regions.sheets], axis=-1)
        if np.any(member.sum(axis=-1) != 1):
            raise RegionSpecError(f"a preimage of {y} is not in exactly one declared sheet")
        counts.append(len(roots))
        roots_all.append(roots)
    if len(set(counts)) != 1:
        raise RegionSpecError(f"preimage counts vary across probes: {sorted(set(counts))}")
    k = counts[0]
    if k % 2:
        raise RegionSpecError(f"odd preimage count {k} contradicts the evenness of Phi")
    return CensusResult(k, counts, discarded, roots_all)


def sheet_census(m: QuadraticMap, regions: RegionSpec | None = None, probes: int = 50,
                 rng: np.random.Generator | None = None, **kw) -> int:
    """Number k of preimages of a generic point of X (constant over probes)."""
    return sheet_census_detail(m, regions, probes, rng, **kw).k


def sheet_membership_csv(m: QuadraticMap, path: str | Path | None = None, half_width: float = 3.0,
                         n: int = 64, regions: RegionSpec | None = None) -> str:
    """Lattice dump ``axis0,axis1,sheet`` (sheet -1 marks S or no sheet)."""
    regions = m.regions if regions is None else regions
    grid = GridSpec.symmetric(half_width, n, m.dim, cell_centered=True)
    pts = grid.mesh().reshape(-1, m.dim)
    idx = regions.membership(pts)
    idx = np.where(np.abs(phi_jacobian(m, pts)) <= regions.singular_tol, -1, idx)
    header = ",".join([f"axis{i}" for i in range(m.dim)] + ["sheet"])
    lines = [header] + [",".join(repr(float(c)) for c in p) + f",{int(j)}" for p, j in zip(pts, idx)]
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


# --- nonlinear Plancherel ----------------------------------------------------

def check_sheet_support(h: SampledFunction, sheet: Sheet, margin_steps: int = 2,
                        m: QuadraticMap | None = None, singular_tol: float = SINGULAR_TOL) -> np.ndarray:
    """Mask of the support of h; raises SupportError unless the support sits
    ``margin_steps`` grid steps inside the sheet (and away from S)."""
    mag = np.abs(h.values)
    supp = mag > 0
    if not np.any(supp):
        return supp
    pts = h.grid.mesh()[supp]
    offsets = np.stack(np.meshgrid(*[np.array([-1, 0, 1])] * h.dim, indexing="ij"), -1).reshape(-1, h.dim)
    offsets = offsets * margin_steps * np.asarray(h.grid.step)
    for off in offsets:
        shifted = pts + off
        if not np.all(sheet.contains(shifted)):
            raise SupportError(f"function support is not {margin_steps} steps inside sheet {sheet.name}")
        if m is not None and np.any(np.abs(phi_jacobian(m, shifted)) <= singular_tol):
            raise SupportError("function support touches the singular set")
    return supp


def oscillatory_q_transform(x: np.ndarray, weights: np.ndarray, phases: list[np.ndarray],
                            q_axes: list[np.ndarray]) -> np.ndarray:
    """sum_x w(x) prod_j exp(2 pi i q_j P_j(x)) on the tensor grid of q_axes (d <= 2)."""
    if len(q_axes) == 1:
        e = np.exp(2j * np.pi * np.outer(q_axes[0], phases[0]))
        return e @ weights
    e0 = np.exp(2j * np.pi * np.outer(q_axes[0], phases[0]))
    e1 = np.exp(2j * np.pi * np.outer(q_axes[1], phases[1]))
    return (e0 * weights[None, :]) @ e1.T


def nonlinear_plancherel(m: QuadraticMap, sheet: Sheet, h: SampledFunction, q_grid: GridSpec,
                         margin_steps: int = 2, chunk: int = 8192) -> tuple[float, float]:
    """(lhs, rhs) of the nonlinear Plancherel identity on one sheet.

    The lhs is a Riemann sum over ``q_grid`` (its window is the q-truncation)
    of the squared modulus of the oscillatory x-integral; the rhs is the
    weighted Riemann sum of |h|^2 / |J_Phi| on the function grid.
    """
    if q_grid.dim != m.dim or h.dim != m.dim:
        raise ValueError("q grid, function and map dimensions must agree")
    supp = check_sheet_support(h, sheet, margin_steps, m)
    if not np.any(supp):
        return 0.0, 0.0
    pts = h.grid.mesh()[supp]
    vals = h.values[supp] * h.grid.cell_volume
    phi = phi_eval(m, pts)
    spread = np.ptp(phi, axis=0)
    if np.any(spread * np.asarray(q_grid.step) >= 1.0):
        warnings.warn("q step too coarse for the Phi-spread of the support; lhs is aliased", RuntimeWarning)
    grad = np.max(np.abs(phi_differential(m, pts)), axis=0).sum(axis=-1)
    qmax = np.max(np.abs(np.stack([q_grid.lo, q_grid.hi])), axis=0)
    if np.any(qmax * grad * np.asarray(h.grid.step) > 0.5):
        warnings.warn("function grid does not resolve the phase at the q-window edge", RuntimeWarning)
    q_axes = q_grid.axes()
    total = np.zeros(q_grid.shape, dtype=complex)
    for start in range(0, len(pts), chunk):
        sl = slice(start, start + chunk)
        total += oscillatory_q_transform(pts[sl], vals[sl], [phi[sl, j] for j in range(m.dim)], q_axes)
    lhs = float(np.sum(np.abs(total) ** 2) * q_grid.cell_volume)
    rhs = float(np.sum(np.abs(h.values[supp]) ** 2 / np.abs(phi_jacobian(m, pts))) * h.grid.cell_volume)
    return lhs, rhs


# --- builtin regions ---------------------------------------------------------

def _box_sampler(lo, hi, transform=None) -> Sampler:
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)

    def sample(rng, n):
        p = rng.uniform(lo, hi, size=(n, len(lo)))
        return p if transform is None else transform(p)

    return sample


def _neg(sampler: Sampler) -> Sampler:
    return lambda rng, n: -sampler(rng, n)


def _pair(name, contains: Predicate, sampler: Sampler) -> list[Sheet]:
    return [Sheet(name, contains, sampler),
            Sheet("-" + name, lambda p: contains(-np.asarray(p)), _neg(sampler))]


def _cone(p):
    # (x1, x2) with x1 < 0 and |x2| < |x1| (scaled by a random factor)
    r, w = p[:, 0], p[:, 1]
    return np.stack([-r, -r * w], axis=-1)


def tdh_regions() -> RegionSpec:
    y1 = lambda p: (p[..., 0] < 0) & (p[..., 0] ** 2 - p[..., 1] ** 2 > 0)
    y3 = lambda p: (p[..., 1] < 0) & (p[..., 0] ** 2 - p[..., 1] ** 2 < 0)
    s1 = _box_sampler([0.2, -0.95], [2.5, 0.95], _cone)
    s3 = _box_sampler([0.2, -0.95], [2.5, 0.95], lambda p: _cone(p)[:, ::-1])
    return RegionSpec(
        lambda p: (p[..., 0] < 0) & (p[..., 0] ** 2 - p[..., 1] ** 2 > 0),
        _box_sampler([0.1, -0.95], [3.0, 0.95], _cone),
        tuple(_pair("Y1", y1, s1) + _pair("Y3", y3, s3)))


def tdw_regions() -> RegionSpec:
    y1 = lambda p: (p[..., 0] > 0) & (p[..., 1] > 0)
    y2 = lambda p: (p[..., 0] < 0) & (p[..., 1] > 0)
    return RegionSpec(
        lambda p: (p[..., 0] < 0) & (p[..., 1] < 0),
        _box_sampler([-3.0, -3.0], [-0.1, -0.1]),
        tuple(_pair("Y1", y1, _box_sampler([0.2, 0.2], [2.5, 2.5]))
              + _pair("Y2", y2, _box_sampler([-2.5, 0.2], [-0.2, 2.5]))))


def _half_plane_regions(x_contains, x_sampler) -> RegionSpec:
    y1 = lambda p: p[..., 1] > 0
    return RegionSpec(x_contains, x_sampler, tuple(_pair("Y1", y1, _box_sampler([-2.5, 0.2], [2.5, 2.5]))))


def tds_regions() -> RegionSpec:
    return _half_plane_regions(lambda p: p[..., 1] < 0, _box_sampler([-3.0, -3.0], [3.0, -0.1]))


def sim2_regions() -> RegionSpec:
    def x_sampler(rng, n):
        r = rng.uniform(0.1, 3.0, n)
        ang = rng.uniform(-np.pi + 0.1, np.pi - 0.1, n)
        return np.stack([r * np.cos(ang), r * np.sin(ang)], -1)

    return _half_plane_regions(lambda p: ~((p[..., 1] == 0) & (p[..., 0] <= 0)), x_sampler)


def psi_p_regions() -> RegionSpec:
    return _half_plane_regions(lambda p: p[..., 1] > 0, _box_sampler([-3.0, 0.1], [3.0, 3.0]))


def h1_regions() -> RegionSpec:
    y1 = lambda p: p[..., 0] > 0
    return RegionSpec(lambda p: p[..., 0] < 0, _box_sampler([-3.0], [-0.05]),
                      tuple(_pair("Y1", y1, _box_sampler([0.2], [2.5]))))


_REGIONS = {"TDS": tds_regions, "SIM2": sim2_regions, "TDH": tdh_regions, "TDW": tdw_regions,
            "H1": h1_regions}


def builtin_map(name: str) -> QuadraticMap:
    """Quadratic map with regions for a builtin class-E group or PSI_P[(p)]."""
    from .groups import builtin_catalog

    key = name.strip().upper()
    if key.startswith("PSI_P"):
        p = float(key[6:-1]) if key.startswith("PSI_P(") else 1.0
        return psi_p_map(p)
    group = builtin_catalog(key)
    return QuadraticMap.from_group(group, _REGIONS[group.name]())


def psi_p_map(p: float = 1.0) -> QuadraticMap:
    """Psi_p(x1, x2) = (x2 x1 - x2^2 p / 2, x2^2 / 2) in d = 2.

    It has the quadratic form -1/2 <sigma^j x, x> with the basis below; no
    group data accompanies it.
    """
    basis = np.array([[[0.0, -1.0], [-1.0, p]], [[0.0, 0.0], [0.0, -1.0]]])
    return QuadraticMap(2, basis, psi_p_regions(), f"PSI_P({p:g})")

"""Direct verification of the reproducing identity

    ||f||^2 = int_H |<f, mu_e(h) psi>|^2 dh

for Gabor, wavelet and class-E groups, plus the compact-factor formula and
the divergence on R^d x| N.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .errors import QuadratureBudgetError, SupportError
from .grid import GridSpec, SampledFunction, check_same_grid, fourier_transform, reflect, translate
from .phimap import QuadraticMap, Sheet, builtin_map, phi_eval, phi_jacobian
from .quadrature import DQuadrature, invert_orbit_map

DEFAULT_NODES = 24
SUPPORT_SAMPLES = 120
BOX_PAD = 0.05
# q'-truncation for the brute-force route: phase advance per u-cell at the window edge
BRUTE_PHASE_PER_CELL = 0.25
BRUTE_Q_OVERSAMPLE = 1.25


@dataclass
class VerifyResult:
    group: str
    wavelet: str
    f: str
    estimate: float
    target: float
    nodes: int
    truncation: float | None = None
    wall_ms: float | None = None
    method: str = "direct"
    partial: bool = False
    extra: dict = field(default_factory=dict)

    @property
    def rel_error(self) -> float:
        if self.target == 0:
            return float(abs(self.estimate))
        return float(abs(self.estimate - self.target) / abs(self.target))

    @property
    def ratio(self) -> float:
        return float(self.estimate / self.target) if self.target else float("nan")

    def to_dict(self, deterministic: bool = False) -> dict:
        out = {
            "group": self.group, "wavelet": self.wavelet, "f": self.f,
            "estimate": float(self.estimate), "target": float(self.target),
            "rel_error": self.rel_error, "nodes": int(self.nodes),
            "truncation": None if self.truncation is None else float(self.truncation),
            "wall_ms": None if deterministic or self.wall_ms is None else round(float(self.wall_ms), 3),
            "method": self.method, "partial": self.partial,
        }
        out.update(self.extra)
        return out

    def to_json(self, deterministic: bool = False) -> str:
        return json.dumps(self.to_dict(deterministic), indent=2, sort_keys=True)


def _ordered_sum(parts) -> float:
    """Deterministic reduction: numpy's pairwise sum over a fixed order."""
    return float(np.sum(np.asarray(list(parts), dtype=float)))


def _map_chunks(fn: Callable[[int, int], float], n: int, jobs: int, chunk: int) -> float:
    bounds = [(s, min(s + chunk, n)) for s in range(0, n, chunk)]
    if jobs <= 1 or len(bounds) == 1:
        return _ordered_sum(fn(a, b) for a, b in bounds)
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return _ordered_sum(pool.map(lambda ab: fn(*ab), bounds))


# --- Gabor ----------------------------------------------------------------------

def _shift_offsets(grid: GridSpec, box: float | None) -> np.ndarray:
    axes = []
    for i in range(grid.dim):
        k = np.arange(grid.n[i]) - grid.n[i] // 2
        if box is not None:
            k = k[np.abs(k * grid.step[i]) <= box]
        axes.append(k)
    return np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, grid.dim)


def gabor_sum(f: SampledFunction, psi: SampledFunction, box: float | None = None, jobs: int = 1,
              chunk: int = 64) -> tuple[float, int]:
    """sum over grid shifts q (|q_i| <= box) and reciprocal frequencies p of |<f, T_q M_p psi>|^2 dq dp.

    The p-sum runs over FFT outputs; shifts are non-circular (zero fill).
    """
    check_same_grid(f.grid, psi.grid)
    grid = f.grid
    offsets = _shift_offsets(grid, box)
    cell = grid.cell_volume
    dp = grid.reciprocal().cell_volume
    axes = tuple(range(1, grid.dim + 1))

    def part(a, b):
        shifted = np.stack([translate(psi.values, tuple(int(k) for k in off)) for off in offsets[a:b]])
        prod = f.values[None] * np.conj(shifted)
        spec = np.fft.fftn(prod, axes=axes) * cell
        return float(np.sum(np.abs(spec) ** 2) * dp * cell)

    return _map_chunks(part, len(offsets), jobs, chunk), len(offsets) * grid.size


# --- wavelet groups ------------------------------------------------------------------

def wavelet_sum(group, f: SampledFunction, psi: SampledFunction, quad: DQuadrature, jobs: int = 1) -> float:
    """sum_a w(a) / |det a| sum_q |<f, T_q D_a psi>|^2 dq.

    For each a the q-correlation is the inverse DFT of
    F f(xi) |det a|^{1/2} conj(F psi(a^T xi)); the q-sum runs over the
    space grid.
    """
    check_same_grid(f.grid, psi.grid)
    fh = fourier_transform(f)
    ph = fourier_transform(psi)
    xi = fh.grid.mesh()
    axes = tuple(range(f.dim))
    pi = ph.interpolator("cubic")

    def part(a, b):
        acc = []
        for c, w in zip(quad.nodes[a:b], quad.weights[a:b]):
            mat = group.d_matrix(c)
            det = abs(np.linalg.det(mat))
            dil = pi(xi @ mat)
            prod = fh.values * np.sqrt(det) * np.conj(dil)
            corr = np.fft.ifftn(prod, axes=axes) * prod.size * fh.grid.cell_volume
            acc.append(w / det * np.sum(np.abs(corr) ** 2) * f.grid.cell_volume)
        return _ordered_sum(acc)

    return _map_chunks(part, len(quad), jobs, 16)


# --- class-E groups --------------------------------------------------------------------

def _support_points(h: SampledFunction, mask: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    pts = h.grid.mesh()[mask & (np.abs(h.values) > 0)]
    if len(pts) > n:
        pts = pts[rng.choice(len(pts), n, replace=False)]
    return pts


def support_box(group, sheet: Sheet, f: SampledFunction, psi: SampledFunction, *, samples: int = SUPPORT_SAMPLES,
                pad: float = BOX_PAD, seed: int = 0) -> list[tuple[float, float]]:
    """Coordinate box of all a with f(a u) psi(u) not identically zero, u in the sheet.

    Supports on -sheet are folded onto the sheet first.  Periodic
    coordinates get their full period.
    """
    rng = np.random.default_rng(seed)
    fx = np.concatenate([_support_points(f, sheet.contains(f.grid.mesh()), samples, rng),
                         -_support_points(f, sheet.contains(-f.grid.mesh()), samples, rng)])
    pu = np.concatenate([_support_points(psi, sheet.contains(psi.grid.mesh()), samples, rng),
                         -_support_points(psi, sheet.contains(-psi.grid.mesh()), samples, rng)])
    if len(fx) == 0 or len(pu) == 0:
        raise SupportError("f or psi has no support on the sheet pair")
    coords = np.concatenate([invert_orbit_map(group, x, pu)[0] for x in fx])
    periods = getattr(group, "periods", ()) or (None,) * group.d_param_dim
    box = []
    for i, p in enumerate(periods):
        if p is not None:
            box.append((0.0, float(p)))
        else:
            lo, hi = float(coords[:, i].min()), float(coords[:, i].max())
            w = hi - lo
            box.append((lo - pad * w - 1e-3, hi + pad * w + 1e-3))
    return box


def _sheet_pair_data(psi: SampledFunction, sheet: Sheet):
    mesh = psi.grid.mesh()
    refl = reflect(psi)
    mask = sheet.contains(mesh) & ((np.abs(psi.values) > 0) | (np.abs(refl.values) > 0))
    return mesh[mask], psi.values[mask], refl.values[mask]


def _check_f_support(f: SampledFunction, sheet: Sheet) -> None:
    mesh = f.grid.mesh()
    ok = sheet.contains(mesh) | sheet.contains(-mesh)
    if np.any(~ok & (np.abs(f.values) > 0)):
        raise SupportError(f"f must be supported in {sheet.name} and its mirror image")


def class_e_phi_sum(group, m: QuadraticMap, sheet: Sheet, f: SampledFunction, psi: SampledFunction,
                    quad: DQuadrature, jobs: int = 1, method: str = "cubic") -> float:
    """Reproducing integral with the q-integral done exactly in Phi-coordinates.

    With u = a^{-1} x and k_a(u) = f(a u) conj(psi(u)), the q-integral of
    |<f, mu(h) psi>|^2 is |det a| int_Y |k_a(u) + k_a(-u)|^2 / |J_Phi(u)| du.
    """
    u, pv, mv = _sheet_pair_data(psi, sheet)
    inv_jac = 1.0 / np.abs(phi_jacobian(m, u))
    du = psi.grid.cell_volume
    fi = f.interpolator(method)

    def part(a, b):
        acc = []
        for c, w in zip(quad.nodes[a:b], quad.weights[a:b]):
            mat = group.d_matrix(c)
            x = u @ mat.T
            k = fi(x) * np.conj(pv) + fi(-x) * np.conj(mv)
            acc.append(w * abs(np.linalg.det(mat)) * np.sum(np.abs(k) ** 2 * inv_jac) * du)
        return _ordered_sum(acc)

    return _map_chunks(part, len(quad), jobs, 32)


def brute_q_grid(m: QuadraticMap, psi: SampledFunction, *, phase_per_cell: float = BRUTE_PHASE_PER_CELL,
                 oversample: float = BRUTE_Q_OVERSAMPLE) -> list[np.ndarray]:
    """q'-axes for the brute-force route.

    Step 1 / (oversample * spread of Phi_j on supp psi), so the discrete
    q'-sum is alias-free; half width where the phase advance per u-cell
    reaches ``phase_per_cell`` cycles.
    """
    mesh = psi.grid.mesh()
    pts = mesh[np.abs(psi.values) > 0]
    phi = phi_eval(m, pts)
    spread = np.ptp(phi, axis=0)
    grad = np.abs(np.einsum("jab,nb->nja", m.sigma_basis, pts))           # |d Phi_j / d u_a|
    slope = np.max(np.sum(grad * np.asarray(psi.grid.step), axis=-1), axis=0)
    axes = []
    for j in range(m.dim):
        step = 1.0 / (oversample * max(spread[j], 1e-12))
        half = phase_per_cell / slope[j]
        k = int(np.ceil(half / step))
        axes.append((np.arange(-k, k) + 0.5) * step)
    return axes


def class_e_brute_sum(group, m: QuadraticMap, f: SampledFunction, psi: SampledFunction, quad: DQuadrature,
                      q_axes: list[np.ndarray] | None = None, jobs: int = 1, method: str = "cubic",
                      budget: int | None = None) -> tuple[float, int, bool]:
    """Full quadrature over (q', a): sum_a w |det a| sum_q' dq' |sum_u k_a(u) e^{2 pi i <q', Phi(u)>} du|^2.

    q' = theta(a)^{-1} q absorbs the Haar factor; the u-sum runs over every
    sample of psi with k_a(u) != 0.  Returns (estimate, group nodes, partial).
    """
    q_axes = q_axes if q_axes is not None else brute_q_grid(m, psi)
    dq = float(np.prod([ax[1] - ax[0] for ax in q_axes]))
    nq = int(np.prod([len(ax) for ax in q_axes]))
    mesh = psi.grid.mesh()
    supp = np.abs(psi.values) > 0
    u, pv = mesh[supp], psi.values[supp]
    phi = phi_eval(m, u)
    du = psi.grid.cell_volume
    fi = f.interpolator(method)
    n_nodes = len(quad)
    partial = False
    if budget is not None and n_nodes * nq > budget:
        n_nodes = max(0, budget // nq)
        partial = True

    def node_value(c, w):
        mat = group.d_matrix(c)
        k = fi(u @ mat.T) * np.conj(pv) * du
        keep = np.abs(k) > 0
        if not np.any(keep):
            return 0.0
        k, ph = k[keep], phi[keep]
        e0 = np.exp(2j * np.pi * np.outer(q_axes[0], ph[:, 0]))
        if m.dim == 1:
            vals = e0 @ k
        else:
            e1 = np.exp(2j * np.pi * np.outer(q_axes[1], ph[:, 1]))
            vals = (e0 * k[None, :]) @ e1.T
        return w * abs(np.linalg.det(mat)) * np.sum(np.abs(vals) ** 2) * dq

    def part(a, b):
        return _ordered_sum(node_value(c, w) for c, w in zip(quad.nodes[a:b], quad.weights[a:b]))

    return _map_chunks(part, n_nodes, jobs, 8), n_nodes * nq, partial


# --- front door -------------------------------------------------------------------------

def reproduce_identity(group, psi: SampledFunction, f: SampledFunction, quad: DQuadrature | None = None, *,
                       method: str = "phi", sheet: str | Sheet = "Y1", qmap: QuadraticMap | None = None,
                       n: int = DEFAULT_NODES, box=None, jobs: int = 1, budget: int | None = None,
                       strict_budget: bool = False, estimate_truncation: bool = True,
                       wavelet_name: str = "psi", f_name: str = "f") -> VerifyResult:
    """Estimate int_H |<f, mu_e(h) psi>|^2 dh against ||f||^2.

    Gabor: all grid shifts within ``box`` (default the whole window), the
    truncation estimate is the change when the window and sampling rate are
    both doubled.  Wavelet and class-E groups use ``quad`` over D (default
    ``n`` Gauss-Legendre nodes per coordinate on ``box``, which for class-E
    groups is fitted to the supports).  Class-E ``method`` is ``phi``
    (q-integral done in Phi-coordinates) or ``brute`` (explicit q'-grid).
    """
    start = time.perf_counter()
    target = f.l2_norm() ** 2
    kind = getattr(group, "kind", None)
    trunc = None
    extra: dict = {}
    partial = False
    if kind == "gabor":
        est, nodes = gabor_sum(f, psi, box, jobs)
        if estimate_truncation:
            f2, p2 = refine_window(f), refine_window(psi)
            est2, _ = gabor_sum(f2, p2, None if box is None else 2 * box, jobs)
            trunc = abs(est2 - est)
        used = "stft"
    elif kind == "wavelet":
        quad = quad or DQuadrature.tensor(group, box, n)
        est = wavelet_sum(group, f, psi, quad, jobs)
        nodes = len(quad) * f.grid.size
        if estimate_truncation:
            trunc = abs(wavelet_sum(group, f, psi, quad.doubled(group), jobs) - est)
        used = "fft-correlation"
    elif kind == "class_e":
        qmap = qmap or builtin_map(group.name)
        sh = sheet if isinstance(sheet, Sheet) else qmap.regions.sheet(sheet)
        _check_f_support(f, sh)
        if not np.any(np.abs(f.values) > 0):
            return VerifyResult(group.name, wavelet_name, f_name, 0.0, 0.0, 0, 0.0,
                                (time.perf_counter() - start) * 1e3, method)
        if quad is None:
            quad = DQuadrature.tensor(group, box or support_box(group, sh, f, psi), n)
        extra["a_box"] = [list(b) for b in quad.box]
        if method == "phi":
            est = class_e_phi_sum(group, qmap, sh, f, psi, quad, jobs)
            nodes = len(quad)
            if estimate_truncation:
                trunc = abs(class_e_phi_sum(group, qmap, sh, f, psi, quad.doubled(group), jobs) - est)
        elif method == "brute":
            q_axes = brute_q_grid(qmap, psi)
            est, nodes, partial = class_e_brute_sum(group, qmap, f, psi, quad, q_axes, jobs, budget=budget)
            extra["q_window"] = [[float(ax[0]), float(ax[-1]), len(ax)] for ax in q_axes]
            if partial and strict_budget:
                raise QuadratureBudgetError(f"brute-force quadrature needs {len(quad) * np.prod([len(a) for a in q_axes])}"
                                            f" group nodes, budget is {budget}")
        else:
            raise ValueError("method must be 'phi' or 'brute'")
        used = method
    else:
        raise TypeError(f"unsupported group {group!r}")
    wall = (time.perf_counter() - start) * 1e3
    name = getattr(group, "name", kind)
    return VerifyResult(name, wavelet_name, f_name, float(est), float(target), int(nodes), trunc, wall, used,
                        partial, extra)


def refine_window(h: SampledFunction) -> SampledFunction:
    """The same function on a window twice as wide at half the step (spectral resampling)."""
    g = h.grid
    lo = np.asarray(g.lo)
    hi = np.asarray(g.hi)
    mid, half = (lo + hi) / 2, (hi - lo) / 2
    new = GridSpec(tuple(mid - 2 * half), tuple(mid + 2 * half), tuple(4 * k for k in g.n))
    mesh = new.mesh()
    inside = g.contains(mesh)
    vals = np.zeros(new.shape, dtype=complex)
    vals[inside] = h.evaluate(mesh[inside], method="fourier")
    return SampledFunction(new, vals)


# --- compact factor and the R^d x| N failure ------------------------------------------------

def compact_factor_value(k: str, phi: SampledFunction, f: SampledFunction, jobs: int = 1) -> float:
    """int_K int |<f, T_x M_xi mu(k) phi>|^2 dx dxi dk for K = {I} or {I, -I} (normalized counting).

    mu(-I) acts as the parity x -> -x; its fixed phase drops out.
    """
    key = k.lower()
    if key == "trivial":
        members = [phi]
    elif key == "parity":
        members = [phi, reflect(phi)]
    else:
        raise ValueError("K must be 'trivial' or 'parity'")
    return _ordered_sum(gabor_sum(f, p, None, jobs)[0] for p in members) / len(members)


def product_factor(phi: SampledFunction, f: SampledFunction) -> float:
    """int |f|^2 |phi|^2 as a direct grid sum."""
    check_same_grid(f.grid, phi.grid)
    return float(np.sum(np.abs(f.values) ** 2 * np.abs(phi.values) ** 2) * f.grid.cell_volume)


def rn_failure_demo(r: float, phi: SampledFunction, f: SampledFunction, nodes_per_axis: int = 4) -> float:
    """Truncated int_N int_p |F(e^{i pi <c t, t>} f conj(phi))(p)|^2 dp dc over c in Sym(d), |c_ij| <= r.

    The p-integral is a DFT sum over the reciprocal grid; c-nodes are
    midpoints of a uniform lattice on [-r, r]^{d(d+1)/2}.
    """
    check_same_grid(f.grid, phi.grid)
    d = f.dim
    iu = np.triu_indices(d)
    dim_n = len(iu[0])
    ax = -r + (np.arange(nodes_per_axis) + 0.5) * (2 * r / nodes_per_axis)
    nodes = np.stack(np.meshgrid(*[ax] * dim_n, indexing="ij"), -1).reshape(-1, dim_n)
    weight = (2 * r / nodes_per_axis) ** dim_n
    mesh = f.grid.mesh()
    base = f.values * np.conj(phi.values)
    dp = f.grid.reciprocal().cell_volume
    vals = []
    for node in nodes:
        c = np.zeros((d, d))
        c[iu] = node
        c = c + np.triu(c, 1).T
        quad_form = np.einsum("...i,ij,...j->...", mesh, c, mesh)
        spec = np.fft.fftn(np.exp(1j * np.pi * quad_form) * base) * f.grid.cell_volume
        vals.append(weight * np.sum(np.abs(spec) ** 2) * dp)
    return _ordered_sum(vals)


def sym_dim(d: int) -> int:
    return d * (d + 1) // 2

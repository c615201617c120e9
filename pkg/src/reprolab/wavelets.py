"""Constructors of windows and reproducing functions.

Gabor windows (Gaussian, Hermite functions, box), the closed-form H1
wavelet, the TDW tensor wavelet, bumps in TDH orbit coordinates, and two
generic steps for class-E sheets: orbit normalization and the two-sided
extension that cancels the cross condition by phase oscillation.
"""

from __future__ import annotations

from math import factorial
from typing import Callable

import numpy as np
from scipy import optimize, special

from .errors import ConstructionError
from .grid import GridSpec, SampledFunction, reflect
from .phimap import QuadraticMap, Sheet, phi_jacobian
from .quadrature import orbit_pullback

H1_HALF_WIDTH = 4.0
H1_SAMPLES = 4096
TDW_HALF_WIDTH = 4.0
TDW_SAMPLES = 512
# cross integral must vanish relative to its beta = 0 value
EXTEND_TOL = 1e-3
ORBIT_SPREAD_TOL = 1e-3
ORBIT_FLOOR = 1e-8


# --- Gabor windows -------------------------------------------------------------

def default_grid(dim: int = 1, half_width: float = 8.0, n: int | None = None) -> GridSpec:
    n = n if n is not None else (1024 if dim == 1 else 128)
    return GridSpec.symmetric(half_width, n, dim)


def gaussian(grid: GridSpec | None = None, dim: int = 1) -> SampledFunction:
    """Unit-norm Gaussian 2^{d/4} exp(-pi |x|^2)."""
    grid = grid or default_grid(dim)
    d = grid.dim
    return SampledFunction.from_callable(grid, lambda x: 2 ** (d / 4) * np.exp(-np.pi * np.sum(x ** 2, axis=-1)))


def hermite_profile(n: int) -> Callable[[np.ndarray], np.ndarray]:
    """h_n(x) = c_n H_n(sqrt(2 pi) x) exp(-pi x^2), c_n = 2^{1/4} / sqrt(2^n n!)."""
    if n < 0:
        raise ValueError("Hermite index must be non-negative")
    c = 2 ** 0.25 / np.sqrt(2.0 ** n * factorial(n))
    return lambda x: c * special.eval_hermite(n, np.sqrt(2 * np.pi) * x) * np.exp(-np.pi * x ** 2)


def hermite(n: int, grid: GridSpec | None = None) -> SampledFunction:
    """L2-normalized Hermite function h_n (d = 1; tensor h_n(x1) h_0(x2) in d = 2)."""
    grid = grid or default_grid(1)
    prof, base = hermite_profile(n), hermite_profile(0)
    if grid.dim == 1:
        return SampledFunction.from_callable(grid, lambda x: prof(x[..., 0]))
    return SampledFunction.from_callable(grid, lambda x: prof(x[..., 0]) * base(x[..., 1]))


def box(grid: GridSpec | None = None, width: float = 1.0) -> SampledFunction:
    """Indicator of [-width/2, width/2]^d divided by width^{d/2} (unit norm).

    Samples exactly on an edge take the value 1/2 so that the midpoint
    of the jump is used.
    """
    grid = grid or default_grid(1)
    half = width / 2

    def fn(x):
        ind = np.where(np.abs(x) < half, 1.0, np.where(np.isclose(np.abs(x), half), 0.5, 0.0))
        return np.prod(ind, axis=-1) / width ** (grid.dim / 2)

    return SampledFunction.from_callable(grid, fn)


def mexican_hat(grid: GridSpec | None = None) -> SampledFunction:
    """sqrt 2 (1 - 2 pi x^2) e^{-pi x^2}: its Fourier transform is 2 sqrt 2 pi xi^2 e^{-pi xi^2},
    so the Calderon integral over da / a equals 1."""
    grid = grid or GridSpec.symmetric(8, 512)
    return SampledFunction.from_callable(
        grid, lambda x: np.sqrt(2) * (1 - 2 * np.pi * x[..., 0] ** 2) * np.exp(-np.pi * x[..., 0] ** 2))


def smooth_cutoff(r: np.ndarray) -> np.ndarray:
    """C-infinity cutoff: exp(1 - 1/(1 - r^2)) for |r| < 1, zero outside."""
    r = np.asarray(r, dtype=float)
    inside = np.abs(r) < 1
    safe = np.where(inside, r, 0.0)
    return np.where(inside, np.exp(1.0 - 1.0 / (1.0 - safe ** 2)), 0.0)


def bump(grid: GridSpec, center, radius: float) -> SampledFunction:
    """Smooth compactly supported bump centred at ``center`` (unit norm)."""
    center = np.atleast_1d(np.asarray(center, dtype=float))
    if center.shape != (grid.dim,):
        raise ValueError("center must match the grid dimension")
    f = SampledFunction.from_callable(
        grid, lambda x: smooth_cutoff(np.linalg.norm(x - center, axis=-1) / radius))
    if f.l2_norm() == 0:
        raise ConstructionError("bump does not meet any grid sample; refine the grid")
    return f.normalized()


# --- closed forms on H1 and TDW ------------------------------------------------

def h1_profile(x) -> np.ndarray:
    """phi_1(x) = x / sqrt 2 on [1, 2] and exp(-2 pi i (-x - 1)) (-x) / sqrt 2 on [-2, -1].

    Endpoint samples take half the one-sided value.
    """
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    weight = np.where((ax > 1) & (ax < 2), 1.0, np.where(np.isclose(ax, 1) | np.isclose(ax, 2), 0.5, 0.0))
    pos = ax / np.sqrt(2) * weight
    phase = np.where(x < 0, np.exp(-2j * np.pi * (-x - 1)), 1.0)
    return pos * phase


def h1_wavelet(grid: GridSpec | None = None) -> SampledFunction:
    """H1 wavelet on a cell-centred grid, so the jumps at 1 and 2 lie on cell faces."""
    grid = grid or GridSpec.symmetric(H1_HALF_WIDTH, H1_SAMPLES, 1, cell_centered=True)
    return SampledFunction.from_callable(grid, lambda x: h1_profile(x[..., 0]))


def tdw_tensor_profile(x) -> np.ndarray:
    """psi(u, v) = 2 phi_1(u) phi_1(v)."""
    x = np.asarray(x, dtype=float)
    return 2.0 * h1_profile(x[..., 0]) * h1_profile(x[..., 1])


def tdw_tensor_wavelet(grid: GridSpec | None = None) -> SampledFunction:
    grid = grid or GridSpec.symmetric(TDW_HALF_WIDTH, TDW_SAMPLES, 2, cell_centered=True)
    if grid.dim != 2:
        raise ValueError("the tensor wavelet lives on a 2-d grid")
    return SampledFunction.from_callable(grid, tdw_tensor_profile)


# --- TDH orbit coordinates -------------------------------------------------------

def tdh_orbit_point(s, t) -> np.ndarray:
    """x = e^s H(-t) (-1, 0) = e^s (-cosh t, sinh t), a point of the cone Y1."""
    s, t = np.asarray(s, dtype=float), np.asarray(t, dtype=float)
    return np.stack([-np.exp(s) * np.cosh(t), np.exp(s) * np.sinh(t)], -1)


def tdh_orbit_coords(x) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(s, t, inside) with s = ln(x1^2 - x2^2) / 2, t = atanh(x2 / -x1); NaN-free off Y1."""
    x = np.asarray(x, dtype=float)
    x1, x2 = x[..., 0], x[..., 1]
    inside = (x1 < 0) & (x1 ** 2 - x2 ** 2 > 0)
    q = np.where(inside, x1 ** 2 - x2 ** 2, 1.0)
    s = 0.5 * np.log(q)
    t = np.arctanh(np.where(inside, x2 / np.where(inside, -x1, 1.0), 0.0))
    return s, t, inside


def tdh_orbit_bump(grid: GridSpec | None = None, center=(0.5, 0.0), width: float = 0.25,
                   radius: float = 0.6) -> SampledFunction:
    """Gaussian in TDH orbit coordinates (s, t) times a smooth cutoff of radius ``radius``.

    Supported in Y1 = {x1 < 0, |x2| < |x1|} only.
    """
    grid = grid or GridSpec.symmetric(4.0, 256, 2, cell_centered=True)
    s0, t0 = map(float, center)

    def fn(x):
        s, t, inside = tdh_orbit_coords(x)
        r2 = (s - s0) ** 2 + (t - t0) ** 2
        val = np.exp(-r2 / (2 * width ** 2)) * smooth_cutoff(np.sqrt(r2) / radius)
        return np.where(inside, val, 0.0)

    f = SampledFunction.from_callable(grid, fn)
    if f.l2_norm() == 0:
        raise ConstructionError("orbit bump does not meet any grid sample")
    return f


# --- generic class-E steps ---------------------------------------------------------

def orbit_ratio_pullback(group, m: QuadraticMap, psi: SampledFunction, sheet: Sheet, points) -> np.ndarray:
    """c(x) = int_D |psi(a^{-1} x)|^2 |det theta(a) a|^{-1} da / |J_Phi(x)| by orbit pullback.

    The D-nodes map x onto psi's samples in the sheet, so every c(x) is a
    Riemann sum on psi's own grid.
    """
    mesh = psi.grid.mesh()
    mask = sheet.contains(mesh) & (np.abs(psi.values) > 0)
    if not np.any(mask):
        return np.zeros(len(np.atleast_2d(points)))
    vals = np.abs(psi.values[mask]) ** 2
    out = []
    for x in np.atleast_2d(np.asarray(points, dtype=float)):
        q = orbit_pullback(group, x, psi.grid, mask)
        a = group.d_matrix(q.nodes)
        w = q.weights / np.abs(np.linalg.det(group.theta_matrix(q.nodes) @ a))
        out.append(np.sum(w * vals) / abs(float(phi_jacobian(m, x[None])[0])))
    return np.asarray(out)


def orbit_normalize(group, m: QuadraticMap, sheet: Sheet, bump_fn: SampledFunction, probes=None,
                    *, spread_tol: float = ORBIT_SPREAD_TOL, seed: int = 0) -> SampledFunction:
    """Divide ``bump_fn`` by sqrt(c) so that the diagonal condition holds on the sheet.

    c(x) is D-invariant; it is evaluated at ``probes`` (default: 8 sheet
    samples) and its relative spread must stay below ``spread_tol``, which
    certifies that the probes share an orbit and the quadrature is
    resolved.  Raises ConstructionError on a large spread or when c falls
    below 1e-8 (the bump's orbit coverage is insufficient).
    """
    mesh = bump_fn.grid.mesh()
    if np.any((np.abs(bump_fn.values) > 0) & ~sheet.contains(mesh)):
        raise ConstructionError(f"bump is not supported in sheet {sheet.name}")
    if probes is None:
        probes = sheet.sampler(np.random.default_rng(seed), 8)
    c = orbit_ratio_pullback(group, m, bump_fn, sheet, probes)
    if np.min(c) < ORBIT_FLOOR:
        raise ConstructionError(f"orbit ratio {np.min(c):.2e} below {ORBIT_FLOOR:g}; the bump misses some orbits")
    spread = float(np.ptp(c) / np.mean(c))
    if spread > spread_tol:
        raise ConstructionError(f"orbit ratio varies by {spread:.2e} across probes; it must be D-invariant")
    return bump_fn.scaled(1.0 / np.sqrt(np.mean(c)))


def cross_profile(psi_plus: SampledFunction, m: QuadraticMap, sheet: Sheet,
                  lam: Callable[[np.ndarray], np.ndarray]) -> Callable[[float], complex]:
    """beta -> int_sheet exp(2 pi i beta lam(u)) |psi_plus(u)|^2 / J_Phi(u)^2 du.

    By D-invariance this is the cross condition produced by the extension
    with oscillation beta, the same at every probe of the sheet.
    """
    mesh = psi_plus.grid.mesh()
    mask = sheet.contains(mesh) & (np.abs(psi_plus.values) > 0)
    pts = mesh[mask]
    w = np.abs(psi_plus.values[mask]) ** 2 / phi_jacobian(m, pts) ** 2 * psi_plus.grid.cell_volume
    lv = lam(pts)
    return lambda beta: complex(np.sum(w * np.exp(2j * np.pi * beta * lv)))


def default_functional(dim: int) -> Callable[[np.ndarray], np.ndarray]:
    return lambda p: np.asarray(p)[..., dim - 1]


def two_sided_extend(psi_plus: SampledFunction, m: QuadraticMap, sheet: Sheet, beta: float | None = None,
                     lam: Callable[[np.ndarray], np.ndarray] | None = None, *,
                     beta_max: float = 20.0, scan: int = 4001, tol: float = EXTEND_TOL
                     ) -> tuple[SampledFunction, float]:
    """Extend psi_plus (supported in the sheet) by psi(-x) = exp(2 pi i beta lam(x)) psi_plus(x).

    With ``beta`` None, beta is the smallest root in [0, beta_max] of the
    real part of the cross profile whose modulus is at most ``tol`` times
    its value at beta = 0 (brentq between scan sign changes).  ``lam``
    defaults to the last coordinate.  Returns (psi, beta).
    """
    lam = lam or default_functional(psi_plus.dim)
    mesh = psi_plus.grid.mesh()
    if np.any((np.abs(psi_plus.values) > 0) & ~sheet.contains(mesh)):
        raise ConstructionError(f"psi_plus must be supported in sheet {sheet.name}")
    if beta is None:
        beta = find_oscillation(cross_profile(psi_plus, m, sheet, lam), beta_max, scan, tol)
    mirrored = reflect(psi_plus)
    phase = np.exp(2j * np.pi * beta * lam(-mesh))
    return psi_plus + mirrored.with_values(phase * mirrored.values), float(beta)


def find_oscillation(g: Callable[[float], complex], beta_max: float = 20.0, scan: int = 4001,
                     tol: float = EXTEND_TOL) -> float:
    g0 = abs(g(0.0))
    if g0 == 0:
        raise ConstructionError("cross profile vanishes identically; psi_plus carries no mass")
    betas = np.linspace(0.0, beta_max, scan)
    re = np.array([g(b).real for b in betas])
    for i in np.nonzero(np.sign(re[:-1]) * np.sign(re[1:]) <= 0)[0]:
        if re[i] == 0:
            root = betas[i]
        else:
            root = optimize.brentq(lambda b: g(b).real, betas[i], betas[i + 1], xtol=1e-14)
        if abs(g(root)) <= tol * g0:
            return float(root)
    raise ConstructionError(f"no oscillation in [0, {beta_max:g}] cancels the cross condition; "
                            "try a different coordinate functional")


def tdh_wavelet(grid: GridSpec | None = None) -> tuple[SampledFunction, float]:
    """Orbit-normalized TDH bump on Y1, extended to -Y1 by oscillation; returns (psi, beta)."""
    from .groups import builtin_catalog
    from .phimap import builtin_map

    group, m = builtin_catalog("TDH"), builtin_map("TDH")
    y1 = m.regions.sheet("Y1")
    psi_plus = orbit_normalize(group, m, y1, tdh_orbit_bump(grid))
    return two_sided_extend(psi_plus, m, y1)

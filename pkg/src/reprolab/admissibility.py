"""Admissibility functionals.

Every function here measures; none of them judges.  Targets and residuals
are reported and the thresholds live in the acceptance battery.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import signal

from .errors import GridError, SupportError
from .grid import GridSpec, SampledFunction, fourier_transform, reflect
from .phimap import QuadraticMap, Sheet, phi_jacobian
from .quadrature import DQuadrature, orbit_pullback
from .wigner import WignerField, marginals, wigner

WINDOW_MASS_TOL = 1e-6


# --- reports -----------------------------------------------------------------

def _jsonable(v):
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()] if v.ndim else _jsonable(v.item())
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def condition_report(check: str, group: str, probe, value, target, truncation_estimate=None) -> dict:
    """JSON-ready record {check, group, probe, value, target, residual, truncation_estimate}."""
    residual = float(abs(complex(value) - complex(target)))
    return {
        "check": check,
        "group": group,
        "probe": _jsonable(np.asarray(probe, dtype=float)) if probe is not None else None,
        "value": _jsonable(value),
        "target": _jsonable(target),
        "residual": residual,
        "truncation_estimate": None if truncation_estimate is None else float(truncation_estimate),
    }


# --- Calderon ----------------------------------------------------------------

def _spectral_density(psi) -> tuple[Callable[[np.ndarray], np.ndarray], SampledFunction | None]:
    if isinstance(psi, SampledFunction):
        hat = fourier_transform(psi)
        sq = hat.with_values(np.abs(hat.values) ** 2)
        return (lambda pts: np.real(sq.evaluate(pts, method="cubic"))), sq
    return psi, None


def calderon_integral(psi, group, quad: DQuadrature, xi) -> np.ndarray | float:
    """int_D |psi_hat(a^T xi)|^2 da for one or many frequencies ``xi``.

    ``psi`` is a SampledFunction (transformed once, |psi_hat|^2 interpolated
    by cubic splines) or a callable returning |psi_hat|^2 at points (..., d).
    """
    density, sq = _spectral_density(psi)
    xi = np.asarray(xi, dtype=float)
    single = xi.ndim <= 1
    xi = np.atleast_2d(xi.reshape(-1, group.dim) if xi.ndim <= 1 else xi)
    a = group.d_matrix(quad.nodes)
    pts = np.einsum("nji,kj->kni", a, xi)            # (K, N, d): a^T xi
    vals = density(pts)
    out = vals @ quad.weights
    if sq is not None:
        _window_warning(sq, pts, quad.weights)
    return float(out[0]) if single else out


def _window_warning(sq: SampledFunction, pts: np.ndarray, weights: np.ndarray) -> None:
    outside = ~sq.grid.contains(pts)
    if not np.any(outside):
        return
    edge = np.concatenate([np.abs(np.take(sq.values, [0, -1], axis=i)).reshape(-1) for i in range(sq.dim)])
    mass = float(np.max(edge) * np.sum(np.broadcast_to(weights, outside.shape)[outside]))
    if mass > WINDOW_MASS_TOL:
        warnings.warn(f"a^T xi leaves the frequency window; neglected mass up to {mass:.2e}", RuntimeWarning)


# --- Wigner admissibility ----------------------------------------------------

def _as_wigner(phi) -> WignerField:
    return phi if isinstance(phi, WignerField) else wigner(phi)


def wigner_admissibility(phi, group, quad: DQuadrature | None, point, *, order: int = 3,
                         q_half_width: float = 4.0, q_nodes: int = 64) -> float:
    """int_H W_phi(h^{-1} . (x, xi)) dh at one phase-space point.

    Gabor group: (q, p) runs over the Wigner lattice shifted to the probe,
    so the sum is a Riemann sum over the Wigner grid window.  Wavelet
    groups: q-nodes are x - a u_k with u_k on the space grid (weight
    |det a| du), a-nodes from ``quad``.  Class-E groups: uniform q-nodes on
    [-q_half_width, q_half_width]^d.
    """
    w = _as_wigner(phi)
    point = np.asarray(point, dtype=float)
    d = w.d
    kind = getattr(group, "kind", None)
    if kind == "gabor":
        offsets = w.grid.mesh().reshape(-1, 2 * d)
        nodes = point - offsets                        # h^{-1} . point = grid sample
        z = group.phase_space_inverse(nodes[:, :d], nodes[:, d:], point)
        vals = w.evaluate(z, order=order)
        return float(np.real(np.sum(vals)) * w.grid.cell_volume)
    if kind == "wavelet":
        u = w.space_grid.mesh().reshape(-1, d)
        du = w.space_grid.cell_volume
        pts_all = []
        for c in quad.nodes:
            q = point[:d] - u @ group.d_matrix(c).T
            pts_all.append(group.phase_space_inverse(q, c, point))
        pts_all = np.stack(pts_all)                    # (N, K, 2d)
        vals = np.real(w.evaluate(pts_all, order=order))
        dets = np.abs(np.linalg.det(group.d_matrix(quad.nodes)))
        haar = quad.weights / dets                     # dh = dq da / |det a|
        total = np.sum(haar * dets * vals.sum(axis=1) * du)
        _phase_window_warning(w, pts_all)
        return float(total)
    if kind == "class_e":
        axes = [np.linspace(-q_half_width, q_half_width, q_nodes, endpoint=False) + q_half_width / q_nodes] * d
        qs = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, d)
        dq = (2 * q_half_width / q_nodes) ** d
        total = 0.0
        for c, wt in zip(quad.nodes, quad.weights):
            a = group.d_matrix(c)
            ainv = np.linalg.inv(a)
            x, xi = point[:d], point[d:]
            # h^{-1} = [[a^{-1}, 0], [-a^T sigma_q, a^T]]
            xs = np.broadcast_to(ainv @ x, (len(qs), d))
            xis = xi @ a - np.einsum("ji,njk,k->ni", a, group.sigma(qs), x)
            vals = np.real(w.evaluate(np.concatenate([xs, xis], -1), order=order))
            total += wt / abs(np.linalg.det(group.theta_matrix(c))) * np.sum(vals) * dq
        return float(total)
    raise TypeError(f"no phase-space action for {group!r}")


def _phase_window_warning(w: WignerField, pts: np.ndarray) -> None:
    outside = ~w.grid.contains(pts)
    if np.any(outside):
        edge = max(float(np.max(np.abs(np.take(w.values, [0, -1], axis=i)))) for i in range(w.grid.dim))
        if edge > WINDOW_MASS_TOL * w.sup_norm():
            warnings.warn("group action leaves the Wigner window where W is not negligible", RuntimeWarning)


# --- Reproducing conditions on class-E groups -------------------------------------

@dataclass
class RepthmResult:
    probes: np.ndarray
    diag_plus: np.ndarray
    diag_minus: np.ndarray
    cross: np.ndarray
    rejected: list[int] = field(default_factory=list)

    def reports(self, group: str, truncation: float | None = None) -> list[dict]:
        out = []
        for i, x in enumerate(self.probes):
            if i in self.rejected:
                continue
            out.append(condition_report("repthm.diag_plus", group, x, self.diag_plus[i], 1.0, truncation))
            out.append(condition_report("repthm.diag_minus", group, x, self.diag_minus[i], 1.0, truncation))
            out.append(condition_report("repthm.cross", group, x, complex(self.cross[i]), 0.0, truncation))
        return out


def pullback_quadrature(group, psi: SampledFunction, sheet: Sheet) -> Callable[[np.ndarray], DQuadrature]:
    """Per-probe D-quadrature whose nodes map the probe onto psi's samples in the sheet."""
    mesh = psi.grid.mesh()
    refl = reflect(psi)
    mask = sheet.contains(mesh) & ((np.abs(psi.values) > 0) | (np.abs(refl.values) > 0))
    return lambda x: orbit_pullback(group, x, psi.grid, mask)


def repthm_conditions(group, m: QuadraticMap, psi: SampledFunction, sheet: Sheet,
                      dquad: DQuadrature | Callable[[np.ndarray], DQuadrature], probes,
                      *, method: str = "cubic") -> RepthmResult:
    """Per probe x in the sheet, with w(a) = |det theta(a) a|^{-1}:

    diag_plus  = int_D |psi(a^{-1} x)|^2 w da / |J_Phi(x)|
    diag_minus = int_D |psi(-a^{-1} x)|^2 w da / |J_Phi(x)|
    cross      = int_D psi(-a^{-1} x) conj(psi(a^{-1} x)) w da / |J_Phi(x)|

    ``dquad`` is a fixed rule or a factory returning a rule per probe.
    Probes outside the sheet or in the singular set are rejected (NaN).
    """
    probes = np.atleast_2d(np.asarray(probes, dtype=float))
    n = len(probes)
    dp, dm = np.full(n, np.nan), np.full(n, np.nan)
    cr = np.full(n, np.nan + 0j)
    rejected = []
    jac = np.abs(phi_jacobian(m, probes))
    tol = m.regions.singular_tol if m.regions is not None else 1e-8
    for i, x in enumerate(probes):
        if jac[i] <= tol or not bool(sheet.contains(x[None])[0]):
            rejected.append(i)
            continue
        q = dquad(x) if callable(dquad) else dquad
        a = group.d_matrix(q.nodes)
        u = np.einsum("nij,j->ni", np.linalg.inv(a), x)
        wt = q.weights / np.abs(np.linalg.det(group.theta_matrix(q.nodes) @ a))
        vp = psi.evaluate(u, method=method)
        vm = psi.evaluate(-u, method=method)
        dp[i] = np.sum(wt * np.abs(vp) ** 2) / jac[i]
        dm[i] = np.sum(wt * np.abs(vm) ** 2) / jac[i]
        cr[i] = np.sum(wt * vm * np.conj(vp)) / jac[i]
    return RepthmResult(probes, dp, dm, cr, rejected)


def orbit_ratio(group, m: QuadraticMap, psi: SampledFunction, dquad: DQuadrature, points,
                *, method: str = "cubic", chunk: int = 256) -> np.ndarray:
    """c(x) = int_D |psi(a^{-1} x)|^2 |det theta(a) a|^{-1} da / |J_Phi(x)| at many points."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    ainv = np.linalg.inv(group.d_matrix(dquad.nodes))
    wt = dquad.weights / np.abs(np.linalg.det(group.theta_matrix(dquad.nodes) @ group.d_matrix(dquad.nodes)))
    out = np.empty(len(points))
    for start in range(0, len(points), chunk):
        x = points[start:start + chunk]
        u = np.einsum("nij,kj->kni", ainv, x)
        vals = np.abs(psi.evaluate(u, method=method)) ** 2
        out[start:start + chunk] = vals @ wt / np.abs(phi_jacobian(m, x))
    return out


# --- closed-form region conditions ---------------------------------------------

SPECIALIZED = {
    # name: (sheet predicate, weight(u), targets)
    "TDH": (lambda p: (p[..., 0] < 0) & (p[..., 0] ** 2 - p[..., 1] ** 2 > 0),
            lambda p: 1.0 / (p[..., 0] ** 2 - p[..., 1] ** 2) ** 2, (1.0, 1.0, 0.0)),
    "TDW": (lambda p: (p[..., 0] > 0) & (p[..., 1] > 0),
            lambda p: 1.0 / (p[..., 0] ** 2 * p[..., 1] ** 2), (1.0, 1.0, 0.0)),
    "H1": (lambda p: p[..., 0] > 0, lambda p: 1.0 / p[..., 0] ** 2, (0.5, 0.5, 0.0)),
}


@dataclass
class SpecializedResult:
    name: str
    values: tuple[float, float, complex]
    targets: tuple[float, float, float]

    @property
    def residuals(self) -> tuple[float, float, float]:
        return tuple(float(abs(v - t)) for v, t in zip(self.values, self.targets))

    def reports(self) -> list[dict]:
        labels = ("diag_plus", "diag_minus", "cross")
        return [condition_report(f"specialized.{lab}", self.name, None, v, t)
                for lab, v, t in zip(labels, self.values, self.targets)]


def specialized_conditions(name: str, psi: SampledFunction) -> SpecializedResult:
    """The three weighted region integrals over Y_1 for TDH, TDW or H1.

    TDH weight du dv / (u^2 - v^2)^2, TDW weight du dv / (u^2 v^2), H1
    weight dx / x^2; targets (1, 1, 0) resp. (1/2, 1/2, 0).
    """
    key = name.upper()
    if key not in SPECIALIZED:
        raise KeyError(f"specialized conditions exist for {sorted(SPECIALIZED)}")
    contains, weight, targets = SPECIALIZED[key]
    mesh = psi.grid.mesh()
    if key == "H1":
        if psi.dim != 1:
            raise GridError("H1 conditions need a 1-d function")
    else:
        if psi.dim != 2:
            raise GridError(f"{key} conditions need a 2-d function")
        singular = (mesh[..., 0] ** 2 == mesh[..., 1] ** 2) if key == "TDH" else \
            (mesh[..., 0] * mesh[..., 1] == 0)
        if np.any(singular & (np.abs(psi.values) > 0)):
            raise SupportError(f"function does not vanish on the singular set of the {key} map")
        if key == "TDH":
            cone = contains(mesh) | contains(-mesh)
            if np.any(~cone & (np.abs(psi.values) > 0)):
                raise SupportError("TDH conditions need support in Y1 and -Y1")
    refl = reflect(psi)
    inside = contains(mesh)
    with np.errstate(divide="ignore"):
        wt = np.where(inside, weight(np.where(inside[..., None], mesh, 1.0)), 0.0) * psi.grid.cell_volume
    plus = float(np.sum(wt * np.abs(psi.values) ** 2))
    minus = float(np.sum(wt * np.abs(refl.values) ** 2))
    cross = complex(np.sum(wt * refl.values * np.conj(psi.values)))
    return SpecializedResult(key, (plus, minus, cross), targets)


# --- weak admissibility --------------------------------------------------------

def weak_functional(phi: SampledFunction, group, span: Sequence[tuple[complex, SampledFunction]],
                    quad: DQuadrature | None = None, box: float | None = None) -> complex:
    """l(F) = int_H <W_{mu_e(h) phi}, F> dh for F = sum_k c_k W_{f_k}.

    Uses the covariance W_{mu_e(h) phi} = W_phi o h^{-1}.  Gabor group: the
    (q, p) integral runs over the Wigner lattice shifts with |shift| <=
    ``box`` (default: all shifts), evaluated as a cross-correlation.
    Wavelet groups: the q-integral collapses exactly to the frequency
    marginal of W_phi, the a-integral uses ``quad``.
    """
    if not span:
        return 0j
    w_phi = wigner(phi)
    kind = getattr(group, "kind", None)
    total = 0j
    for c, f in span:
        w_f = wigner(f)
        if kind == "gabor":
            total += np.conj(c) * _gabor_pairing(w_phi, w_f, box)
        elif kind == "wavelet":
            total += np.conj(c) * _wavelet_pairing(w_phi, w_f, group, quad)
        else:
            raise TypeError("weak functional is implemented for Gabor and wavelet groups")
    return complex(total)


def _gabor_pairing(w_phi: WignerField, w_f: WignerField, box: float | None) -> float:
    corr = signal.correlate(np.real(w_f.values), np.real(w_phi.values), mode="full", method="fft")
    if box is not None:
        steps = np.asarray(w_f.grid.step)
        idx = np.stack(np.meshgrid(*[np.arange(s) - (s - 1) // 2 for s in corr.shape], indexing="ij"), -1)
        keep = np.all(np.abs(idx * steps) <= box, axis=-1)
        corr = np.where(keep, corr, 0.0)
    return float(np.sum(corr) * w_f.grid.cell_volume ** 2)


def _wavelet_pairing(w_phi: WignerField, w_f: WignerField, group, quad: DQuadrature) -> float:
    d = w_phi.d
    marg = marginals(w_phi).frequency
    xi = w_f.freq_grid.mesh().reshape(-1, d)
    f_marg = np.real(marginals(w_f).frequency.values).reshape(-1)
    total = 0.0
    for c, wt in zip(quad.nodes, quad.weights):
        a = group.d_matrix(c)
        vals = np.real(marg.evaluate(xi @ a, method="cubic"))
        # dq da / |det a| against the exact q-collapse factor |det a|
        total += wt * np.sum(vals * f_marg) * w_f.freq_grid.cell_volume
    return float(total)


def l1_orbit_mass(phi, group, quad: DQuadrature | None = None, point=None) -> float:
    """Diagnostic int_H |W_phi(h^{-1} . z)| dh (truncated); no pass/fail meaning."""
    w = _as_wigner(phi)
    kind = getattr(group, "kind", None)
    if kind == "gabor":
        return float(np.sum(np.abs(w.values)) * w.grid.cell_volume)
    if kind == "wavelet":
        d = w.d
        point = np.zeros(2 * d) if point is None else np.asarray(point, dtype=float)
        u = w.space_grid.mesh().reshape(-1, d)
        total = 0.0
        for c, wt in zip(quad.nodes, quad.weights):
            a = group.d_matrix(c)
            xi = point[d:] @ a
            pts = np.concatenate([u, np.broadcast_to(xi, u.shape)], -1)
            total += wt * np.sum(np.abs(w.evaluate(pts))) * w.space_grid.cell_volume
        return float(total)
    raise TypeError("orbit mass is implemented for Gabor and wavelet groups")

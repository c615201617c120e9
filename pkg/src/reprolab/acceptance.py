"""The acceptance battery: eleven criteria, each a list of residual checks.

Tolerances are pinned here; the measuring modules never judge.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import wavelets as wv
from .admissibility import (calderon_integral, pullback_quadrature, repthm_conditions, specialized_conditions,
                            weak_functional, wigner_admissibility)
from .errors import ReproLabError
from .grid import GridSpec, SampledFunction, fourier_transform, l2_inner, phase_space_shift
from .groups import builtin_catalog, compatibility_check, symplectic_residual_max
from .phimap import builtin_map, equivariance_residual, nonlinear_plancherel, sheet_census_detail
from .quadrature import DQuadrature
from .verify import product_factor, reproduce_identity, rn_failure_demo, sym_dim
from .wigner import abs_mass_in_window, box_wigner_oracle, marginals, moyal_pairing, wigner


@dataclass
class Check:
    name: str
    value: float
    tolerance: float
    mode: str = "le"          # "le": value <= tolerance, "ge": value >= tolerance

    @property
    def passed(self) -> bool:
        if not np.isfinite(self.value):
            return False
        return bool(self.value <= self.tolerance if self.mode == "le" else self.value >= self.tolerance)

    @property
    def ratio(self) -> float:
        """Distance to the threshold in units of it (< 1 passes for "le" checks)."""
        if self.mode == "le":
            return self.value / self.tolerance if self.tolerance else (0.0 if self.value == 0 else np.inf)
        return self.tolerance / self.value if self.value > 0 else np.inf

    def to_dict(self) -> dict:
        return {"name": self.name, "value": float(self.value), "tolerance": float(self.tolerance),
                "mode": self.mode, "passed": self.passed}


@dataclass
class CriterionResult:
    id: int
    title: str
    checks: list[Check]
    seconds: float
    budget_s: float
    error: str | None = None
    figures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.error is None and bool(self.checks) and all(c.passed for c in self.checks)

    @property
    def worst(self) -> Check | None:
        return max(self.checks, key=lambda c: c.ratio) if self.checks else None

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        if self.error is not None:
            detail = f"error: {self.error}"
        else:
            w = self.worst
            op = "<=" if w.mode == "le" else ">="
            detail = f"worst {w.name} = {w.value:.3e} ({op} {w.tolerance:.1e})"
        return f"[{tag}] {self.id:2d} {self.title}: {detail}; {self.seconds:.1f} s"

    def to_dict(self, deterministic: bool = False) -> dict:
        w = self.worst
        return {"id": self.id, "title": self.title, "passed": self.passed, "error": self.error,
                "worst_ratio": None if w is None else float(w.ratio),
                "seconds": None if deterministic else round(self.seconds, 3), "budget_s": self.budget_s,
                "checks": [c.to_dict() for c in self.checks], "figures": self.figures}


# --- criteria ------------------------------------------------------------------------

def _hermite_set(grid):
    return [wv.hermite(k, grid) for k in range(4)]


def crit_wigner_structure(ctx) -> list[Check]:
    grid = GridSpec.symmetric(8, 256)
    h = _hermite_set(grid)
    pairs = [(h[0], h[0]), (h[0], h[1]), (h[1], h[2]), (h[2], h[2]),
             (h[0], phase_space_shift(h[1], [0.5], [0.25])), (h[3], phase_space_shift(h[2], [-0.25], [0.5]))]
    checks = []
    for k, (f, g) in enumerate(pairs):
        checks.append(Check(f"moyal pair {k}", abs(moyal_pairing(f, g) - abs(l2_inner(f, g)) ** 2), 1e-5))
    probes = [h[1], phase_space_shift(h[2], [0.75], [-0.5]), (h[0] + h[3].scaled(1j)).normalized()]
    g2 = wv.gaussian(GridSpec.symmetric(4, 32, 2))
    for k, f in enumerate(probes + [g2]):
        w = wigner(f)
        norm2 = f.l2_norm() ** 2
        checks.append(Check(f"realness {k}", w.max_imag() / w.sup_norm(), 1e-10))
        checks.append(Check(f"2^d bound {k}", max(0.0, w.sup_norm() / (2 ** f.dim * norm2) - 1.0), 1e-12))
    g = wv.gaussian(grid)
    m = marginals(wigner(g))
    checks.append(Check("space marginal", float(np.max(np.abs(m.space.values - np.abs(g.values) ** 2))), 1e-6))
    gh = fourier_transform(g)
    checks.append(Check("frequency marginal",
                        float(np.max(np.abs(m.frequency.values - np.abs(gh.values) ** 2))), 1e-6))
    return checks


BOX_XI_WINDOW = 32.0


def crit_box(ctx) -> list[Check]:
    grid = GridSpec.symmetric(2, 1024, cell_centered=True)
    b = wv.box(grid)
    w = wigner(b, half_sample_method="linear")
    x, xi = np.meshgrid(w.space_grid.axis(0), w.freq_grid.axis(0), indexing="ij")
    band = np.abs(np.abs(x) - 0.5) <= 2 * grid.step[0]
    window = np.abs(xi) <= BOX_XI_WINDOW
    err = np.abs(w.values.real - box_wigner_oracle(x, xi))[~band & window]
    mg = marginals(w)
    iterated = float(np.sum(mg.space.values.real) * grid.step[0])
    levels = [1, 2, 4, 8, 16, 32]
    mass = [abs_mass_in_window(w, L) for L in levels]
    incr = np.diff(mass)
    checks = [Check("closed form sup error", float(err.max()), 1e-3),
              Check("iterated marginal", abs(iterated - 1.0), 2e-3),
              Check("window mass increment / first increment", float(np.min(incr) / incr[0]), 0.25, "ge")]
    if ctx.get("figures"):
        from .plotting import plot_growth, plot_wigner
        d = Path(ctx["figures"])
        ctx["paths"] += [str(plot_wigner(w, d / "box_wigner.png", "Wigner distribution of the box", 8.0)),
                         str(plot_growth(levels, mass, d / "box_l1_growth.png"))]
    return checks


def crit_gabor(ctx) -> list[Check]:
    grid = GridSpec.symmetric(8, 1024, cell_centered=True)
    g = wv.gaussian(grid)
    checks = []
    for name, f in [("h0", wv.hermite(0, grid)), ("h1", wv.hermite(1, grid)), ("box", wv.box(grid))]:
        r = reproduce_identity(builtin_catalog("GABOR"), g, f, jobs=ctx["jobs"], wavelet_name="gaussian", f_name=name)
        checks.append(Check(f"rel_error {name}", r.rel_error, 5e-3))
        checks.append(Check(f"doubling change {name}", r.truncation / r.target, 1e-3))
    return checks


AUDIT_GROUPS = ("TDS", "SIM2", "TDH", "TDW")


def crit_audits(ctx) -> list[Check]:
    checks = []
    for name in AUDIT_GROUPS:
        grp = builtin_catalog(name)
        m = builtin_map(name)
        rng = np.random.default_rng(ctx["seed"])
        checks.append(Check(f"{name} compatibility", compatibility_check(grp, 100, rng), 1e-10))
        checks.append(Check(f"{name} equivariance", equivariance_residual(grp, m, 100, rng), 1e-10))
        checks.append(Check(f"{name} symplectic", symplectic_residual_max(grp, 100, ctx["seed"]), 1e-10))
    tdh = builtin_catalog("TDH")
    c = np.random.default_rng(ctx["seed"]).uniform(-2, 2, size=(100, 2))
    dev = np.abs(tdh.haar_weight(c) / np.exp(-4 * c[:, 0]) - 1.0)
    checks.append(Check("TDH Haar weight vs e^{-4s}", float(np.max(dev)), 1e-12))
    return checks


CENSUS = {"TDS": 2, "SIM2": 2, "TDH": 4, "TDW": 4}


def crit_census(ctx) -> list[Check]:
    checks = []
    for name, k in CENSUS.items():
        try:
            res = sheet_census_detail(builtin_map(name), probes=50, rng=np.random.default_rng(ctx["seed"]))
            checks.append(Check(f"{name} |k - {k}|", abs(res.k - k), 0))
            checks.append(Check(f"{name} non-constant counts", len(set(res.counts)) - 1, 0))
        except ReproLabError as exc:
            checks.append(Check(f"{name} census ({exc})", np.inf, 0))
    if ctx.get("figures"):
        from .plotting import plot_sheets
        for name in ("TDH", "TDW"):
            m = builtin_map(name)
            pts = GridSpec.symmetric(3.0, 128, 2, cell_centered=True).mesh().reshape(-1, 2)
            labels = m.regions.membership(pts)
            names = [s.name for s in m.regions.sheets]
            path = Path(ctx["figures"]) / f"{name.lower()}_sheets.png"
            ctx["paths"].append(str(plot_sheets(pts, labels, names, path, f"{name} sheets")))
    return checks


def _local_bump(center, half_width: float = 0.75, n: int = 128, radius: float = 0.6) -> SampledFunction:
    c = np.asarray(center, dtype=float)
    grid = GridSpec(tuple(c - half_width), tuple(c + half_width), (n, n))
    return wv.bump(grid, c, radius)


def crit_plancherel(ctx) -> list[Check]:
    checks = []
    for name, center in [("TDH", (-2.0, 0.3)), ("TDW", (1.5, 1.5))]:
        m = builtin_map(name)
        lhs, rhs = nonlinear_plancherel(m, m.regions.sheet("Y1"), _local_bump(center), GridSpec.symmetric(8, 64, 2))
        checks.append(Check(f"{name}-Y1 |lhs/rhs - 1|", abs(lhs / rhs - 1.0), 1e-2))
    return checks


def crit_h1(ctx) -> list[Check]:
    res = specialized_conditions("H1", wv.h1_wavelet())
    labels = ("int |phi(x)|^2 / x^2", "int |phi(-x)|^2 / x^2", "cross")
    return [Check(lab, r, 1e-6) for lab, r in zip(labels, res.residuals)]


TDW_BUMP = ((1.5, 1.5), 0.6)


def tdw_test_function() -> SampledFunction:
    return wv.bump(GridSpec.symmetric(4, 256, 2, cell_centered=True), *TDW_BUMP)


def crit_tdw(ctx) -> list[Check]:
    grp = builtin_catalog("TDW")
    psi = wv.tdw_tensor_wavelet()
    checks = [Check(f"tensor conditions {lab}", r, 1e-3)
              for lab, r in zip(("diag_plus", "diag_minus", "cross"), specialized_conditions("TDW", psi).residuals)]
    f = tdw_test_function()
    t0 = time.perf_counter()
    r = reproduce_identity(grp, psi, f, jobs=ctx["jobs"], estimate_truncation=False)
    phi_s = time.perf_counter() - t0
    checks.append(Check("phi-route rel_error", r.rel_error, 2e-2))
    checks.append(Check("phi-route seconds", phi_s, 20.0))
    fine = wv.tdw_tensor_wavelet(GridSpec.symmetric(4, 1024, 2, cell_centered=True))
    ref = reproduce_identity(grp, fine, f, jobs=ctx["jobs"], estimate_truncation=False)
    t0 = time.perf_counter()
    brute = reproduce_identity(grp, fine, f, method="brute", jobs=ctx["jobs"])
    brute_s = time.perf_counter() - t0
    checks.append(Check("brute vs phi |ratio - 1|", abs(brute.estimate / ref.estimate - 1.0), 2e-2))
    checks.append(Check("brute-force rel_error", brute.rel_error, 2e-2))
    checks.append(Check("brute-force seconds", brute_s, 600.0))
    if ctx.get("figures"):
        from .plotting import plot_function
        ctx["paths"].append(str(plot_function(psi, Path(ctx["figures"]) / "tdw_wavelet.png", "|psi| TDW tensor")))
    return checks


def tdh_test_function() -> SampledFunction:
    grid = GridSpec.symmetric(4, 256, 2, cell_centered=True)
    return wv.bump(grid, (-2.0, 0.3), 0.6) + wv.bump(grid, (1.8, 0.2), 0.5).scaled(0.5j)


def crit_tdh(ctx) -> list[Check]:
    grp, m = builtin_catalog("TDH"), builtin_map("TDH")
    y1 = m.regions.sheet("Y1")
    psi, _ = wv.tdh_wavelet()
    checks = [Check(f"specialized conditions {lab}", r, 1e-2)
              for lab, r in zip(("diag_plus", "diag_minus", "cross"), specialized_conditions("TDH", psi).residuals)]
    probes = y1.sampler(np.random.default_rng(ctx["seed"]), 4)
    rep = repthm_conditions(grp, m, psi, y1, pullback_quadrature(grp, psi, y1), probes)
    checks.append(Check("repthm diag_plus", float(np.max(np.abs(rep.diag_plus - 1))), 1e-2))
    checks.append(Check("repthm diag_minus", float(np.max(np.abs(rep.diag_minus - 1))), 1e-2))
    checks.append(Check("repthm cross", float(np.max(np.abs(rep.cross))), 1e-2))
    r = reproduce_identity(grp, psi, tdh_test_function(), jobs=ctx["jobs"])
    checks.append(Check("reproduce rel_error", r.rel_error, 2e-2))
    if ctx.get("figures"):
        from .plotting import plot_function
        ctx["paths"].append(str(plot_function(psi, Path(ctx["figures"]) / "tdh_wavelet.png", "|psi| TDH two-sided")))
    return checks


def crit_rn_failure(ctx) -> list[Check]:
    checks = []
    for d, n, hw in [(1, 512, 8.0), (2, 64, 4.0)]:
        grid = GridSpec.symmetric(hw, n, d)
        phi = wv.gaussian(grid)
        f = wv.hermite(1, grid)
        v1 = rn_failure_demo(1.0, phi, f)
        v2 = rn_failure_demo(2.0, phi, f)
        k = sym_dim(d)
        checks.append(Check(f"d={d} |ratio / 2^{k} - 1|", abs(v2 / v1 / 2 ** k - 1.0), 0.1))
        checks.append(Check(f"d={d} factored form", abs(v1 / 2 ** k - product_factor(phi, f)), 1e-6))
    grid = GridSpec.symmetric(8, 512)
    left, right = wv.bump(grid, [-3.0], 1.0), wv.bump(grid, [3.0], 1.0)
    checks.append(Check("disjoint supports", max(abs(rn_failure_demo(r, left, right)) for r in (1.0, 2.0)), 0.0))
    return checks


EQUIV_FREQUENCIES = (0.3, 0.7, 1.0, 1.5, 2.5)


def crit_equivalence(ctx) -> list[Check]:
    grp = builtin_catalog("WAVELET")
    mh = wv.mexican_hat()
    quad = DQuadrature.tensor(grp, [(-6.0, 4.0)], 64, panels=2)
    checks = []
    for xi in EQUIV_FREQUENCIES:
        cal = calderon_integral(mh, grp, quad, [xi])
        wig = wigner_admissibility(mh, grp, quad, [0.2, xi])
        checks.append(Check(f"|wigner - calderon| at xi={xi}", abs(wig - cal), 1e-2))
    gab = builtin_catalog("GABOR")
    grid = GridSpec.symmetric(8, 256)
    g = wv.gaussian(grid)
    h = _hermite_set(grid)
    spans = [[(1.0, h[0])], [(1.0, h[0]), (-1.0, h[1])], [(2j, h[2]), (0.5, h[3])]]
    for k, span in enumerate(spans):
        target = sum(np.conj(c) * f.l2_norm() ** 2 for c, f in span)
        checks.append(Check(f"weak functional span {k}", abs(weak_functional(g, gab, span) - target), 2e-2))
    return checks


CRITERIA: dict[int, tuple[str, Callable, float]] = {
    1: ("Wigner structure", crit_wigner_structure, 5),
    2: ("Box-function oracle", crit_box, 10),
    3: ("Gabor reproducing", crit_gabor, 30),
    4: ("Group audits", crit_audits, 2),
    5: ("Sheet census", crit_census, 10),
    6: ("Nonlinear Plancherel", crit_plancherel, 60),
    7: ("H1 closed-form wavelet", crit_h1, 1),
    8: ("TDW end-to-end", crit_tdw, 620),
    9: ("TDH end-to-end", crit_tdh, 600),
    10: ("Negative result on R^d x| N", crit_rn_failure, 30),
    11: ("Equivalence checks", crit_equivalence, 60),
}


def run_criterion(cid: int, *, jobs: int = 1, seed: int = 0, figures: str | Path | None = None) -> CriterionResult:
    title, fn, budget = CRITERIA[cid]
    ctx = {"jobs": jobs, "seed": seed, "figures": figures, "paths": []}
    t0 = time.perf_counter()
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            checks = fn(ctx)
        err = None
    except (ReproLabError, ValueError, ArithmeticError) as exc:
        checks, err = [], f"{type(exc).__name__}: {exc}"
    return CriterionResult(cid, title, checks, time.perf_counter() - t0, budget, err, ctx["paths"])


def run_acceptance(ids=None, *, jobs: int = 1, seed: int = 0, figures: str | Path | None = None,
                   echo: Callable[[str], None] | None = None) -> list[CriterionResult]:
    results = []
    for cid in (ids or sorted(CRITERIA)):
        res = run_criterion(cid, jobs=jobs, seed=seed, figures=figures)
        if echo is not None:
            echo(res.line())
        results.append(res)
    if figures is not None:
        from .plotting import plot_acceptance
        plot_acceptance([r.to_dict() for r in results], Path(figures) / "acceptance.png")
    return results

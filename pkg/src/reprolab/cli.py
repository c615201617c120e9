"""reprolab command line.

Usage:
    reprolab wigner <f-spec> --out w.csv [--figure w.png]
    reprolab audit-group <spec.yaml|builtin>
    reprolab check <builtin> --wavelet <w> [--condition repthm|calderon|specialized|weak]
    reprolab verify <builtin> --wavelet <w> --test-fn <f-spec> [--brute-force]
    reprolab build-wavelet <h1|tdw|tdh-bump> --out w.csv [--figure w.png]
    reprolab acceptance [--suite primary] [--only 1,3] [--figure-dir figs/]

Exit codes: 0 all residuals within thresholds, 1 numerical failure
(diagnostics in the JSON report), 2 usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .errors import GroupSpecError, ReproLabError
from .expr import ExpressionError
from .grid import GridSpec
from .presets import SpecError

SEED_ENV = "REPROLAB_SEED"

# suite thresholds used for exit codes
SPECIALIZED_TOL = {"TDW": 1e-3, "H1": 1e-6, "TDH": 1e-2}
REPTHM_TOL = {"TDW": 1e-3, "H1": 1e-6}
DEFAULT_TOL = 1e-2
VERIFY_TOL = {"gabor": 5e-3}
VERIFY_DEFAULT_TOL = 2e-2
AUDIT_TOL = 1e-10
HAAR_FD_TOL = 1e-6
EQUIV_FREQUENCIES = (0.3, 0.7, 1.0, 1.5, 2.5)


class UsageError(Exception):
    pass


def _emit(report: dict, out: str | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True, default=_json_default)
    if out:
        Path(out).write_text(text + "\n")
    print(text)


def _json_default(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, complex):
        return [v.real, v.imag]
    raise TypeError(f"not serializable: {type(v).__name__}")


def _group(name: str):
    from .groups import builtin_catalog
    try:
        return builtin_catalog(name)
    except KeyError as exc:
        raise UsageError(str(exc).strip("'\"")) from None


# --- subcommands ---------------------------------------------------------------------

def cmd_wigner(args) -> int:
    from .presets import function_from_spec
    from .wigner import marginals, wigner

    grid = GridSpec.symmetric(args.half_width, args.samples, args.dim, cell_centered=args.cell_centered)
    f = function_from_spec(args.fspec, grid)
    w = wigner(f, half_sample_method=args.half_sample)
    m = marginals(w)
    if args.csv:
        w.to_csv(args.csv)
    if args.figure and w.d == 1:
        from .plotting import plot_wigner
        plot_wigner(w, args.figure, f"Wigner distribution of {args.fspec}")
    norm2 = f.l2_norm() ** 2
    space_err = float(np.max(np.abs(m.space.values - np.abs(f.values) ** 2)))
    report = {
        "f": args.fspec, "grid": {"lo": grid.lo, "hi": grid.hi, "n": grid.n},
        "norm2": norm2, "total_integral": [m.total.real, m.total.imag],
        "max_imag": w.max_imag(), "sup_norm": w.sup_norm(), "bound_2d": 2 ** f.dim * norm2,
        "space_marginal_error": space_err, "csv": args.csv,
    }
    ok = w.sup_norm() <= 2 ** f.dim * norm2 * (1 + 1e-12) and space_err <= 1e-6 * max(1.0, norm2)
    report["passed"] = bool(ok)
    _emit(report, args.out)
    return 0 if ok else 1


def cmd_audit(args) -> int:
    from .groups import (CLASS_E_NAMES, compatibility_check, haar_invariance_residual, homomorphism_residual,
                         load_group_spec, symplectic_residual_max)
    from .phimap import QuadraticMap, builtin_map, equivariance_residual, sheet_census_detail

    target = args.group
    if Path(target).exists():
        try:
            group = load_group_spec(target)
        except GroupSpecError as exc:
            _emit({"group": target, "error": str(exc), "line": exc.line, "column": exc.column}, args.out)
            return 1
        qmap = QuadraticMap.from_group(group)
    else:
        if target.strip().upper() not in CLASS_E_NAMES:
            raise UsageError(f"audit-group needs a class-E builtin ({', '.join(CLASS_E_NAMES)}) or a spec file")
        group = _group(target)
        qmap = builtin_map(group.name)
    rng = np.random.default_rng(args.seed)
    report = {
        "group": group.name, "seed": args.seed,
        "compatibility_residual": compatibility_check(group, args.samples, rng),
        "haar_invariance_residual": haar_invariance_residual(group, 20, rng),
        "symplectic_residual": symplectic_residual_max(group, args.samples, args.seed),
        "homomorphism_residual": homomorphism_residual(group, 50, args.seed),
        "equivariance_residual": equivariance_residual(group, qmap, args.samples, rng),
    }
    ok = (report["compatibility_residual"] <= AUDIT_TOL and report["symplectic_residual"] <= AUDIT_TOL
          and report["equivariance_residual"] <= AUDIT_TOL and report["homomorphism_residual"] <= AUDIT_TOL
          and report["haar_invariance_residual"] <= HAAR_FD_TOL)
    if qmap.regions is not None:
        try:
            census = sheet_census_detail(qmap, probes=args.probes, rng=np.random.default_rng(args.seed))
            report["sheet_count"] = census.k
            report["census_discarded"] = census.discarded
        except ReproLabError as exc:
            report["sheet_count"] = None
            report["census_error"] = str(exc)
            ok = False
    else:
        report["sheet_count"] = None
        report["census_note"] = "no region metadata for spec-file groups"
    report["passed"] = bool(ok)
    _emit(report, args.out)
    return 0 if ok else 1


def _default_condition(group) -> str:
    kind = group.kind
    if kind == "gabor":
        return "weak"
    if kind == "wavelet":
        return "calderon"
    return "specialized" if group.name in SPECIALIZED_TOL else "repthm"


def cmd_check(args) -> int:
    from . import admissibility as adm
    from .phimap import builtin_map
    from .presets import function_from_spec, wavelet_from_name
    from .quadrature import DQuadrature

    group = _group(args.group)
    psi = wavelet_from_name(args.wavelet, group)
    cond = args.condition or _default_condition(group)
    report: dict = {"group": group.name, "wavelet": args.wavelet, "condition": cond}
    if cond == "specialized":
        if group.name not in SPECIALIZED_TOL:
            raise UsageError(f"specialized conditions exist for {', '.join(SPECIALIZED_TOL)}")
        res = adm.specialized_conditions(group.name, psi)
        tol = SPECIALIZED_TOL[group.name]
        report["reports"] = res.reports()
        report["values"] = [res.values[0], res.values[1], [res.values[2].real, res.values[2].imag]]
        ok = max(res.residuals) <= tol
    elif cond == "repthm":
        if group.kind != "class_e":
            raise UsageError("repthm conditions need a class-E group")
        m = builtin_map(group.name)
        sheet = m.regions.sheet(args.sheet)
        probes = sheet.sampler(np.random.default_rng(args.seed), args.probes)
        res = adm.repthm_conditions(group, m, psi, sheet, adm.pullback_quadrature(group, psi, sheet), probes)
        tol = REPTHM_TOL.get(group.name, DEFAULT_TOL)
        report["reports"] = res.reports(group.name)
        report["rejected"] = res.rejected
        ok = bool(report["reports"]) and max(r["residual"] for r in report["reports"]) <= tol
    elif cond == "calderon":
        if group.kind != "wavelet" or group.dim != 1:
            raise UsageError("the Calderon check runs on the 1-d wavelet group")
        quad = DQuadrature.tensor(group, [(-6.0, 4.0)], 64, panels=2)
        rows = []
        for xi in EQUIV_FREQUENCIES:
            cal = adm.calderon_integral(psi, group, quad, [xi])
            wig = adm.wigner_admissibility(psi, group, quad, [0.0, xi])
            rows.append(adm.condition_report("calderon", group.name, [xi], cal, 1.0))
            rows.append(adm.condition_report("wigner", group.name, [0.0, xi], wig, cal))
        report["reports"] = rows
        tol = DEFAULT_TOL
        ok = max(r["residual"] for r in rows) <= tol
    elif cond == "weak":
        if group.kind != "gabor":
            raise UsageError("the weak functional check runs on the Gabor group")
        grid = psi.grid
        h0 = function_from_spec("hermite0", grid)
        h1 = function_from_spec("hermite1", grid)
        rows = []
        for label, span in [("W_h0", [(1.0, h0)]), ("W_h0 - W_h1", [(1.0, h0), (-1.0, h1)])]:
            target = sum(np.conj(c) * f.l2_norm() ** 2 for c, f in span)
            rows.append(adm.condition_report(f"weak {label}", group.name, None,
                                             adm.weak_functional(psi, group, span), target))
        report["reports"] = rows
        tol = 2e-2
        ok = max(r["residual"] for r in rows) <= tol
    else:
        raise UsageError(f"unknown condition {cond!r}")
    report["threshold"] = tol
    report["passed"] = bool(ok)
    _emit(report, args.out)
    return 0 if ok else 1


def cmd_verify(args) -> int:
    from .presets import default_grid, function_from_spec, wavelet_from_name
    from .verify import reproduce_identity

    group = _group(args.group)
    psi = wavelet_from_name(args.wavelet, group)
    grid = psi.grid if group.kind in ("gabor", "wavelet") else default_grid(group)
    f = function_from_spec(args.test_fn, grid, group.name)
    kw = {}
    if group.kind == "class_e":
        kw = {"method": "brute" if args.brute_force else "phi", "sheet": args.sheet}
    elif args.brute_force:
        raise UsageError("--brute-force applies to class-E groups")
    res = reproduce_identity(group, psi, f, jobs=args.jobs, budget=args.budget, wavelet_name=args.wavelet,
                             f_name=args.test_fn, **kw)
    tol = VERIFY_TOL.get(group.kind, VERIFY_DEFAULT_TOL)
    report = res.to_dict(deterministic=not args.timings)
    report["threshold"] = tol
    ok = res.rel_error <= tol and not res.partial
    report["passed"] = bool(ok)
    _emit(report, args.out)
    return 0 if ok else 1


def cmd_build(args) -> int:
    from . import wavelets as wv
    from .admissibility import specialized_conditions

    kind = args.kind.lower()
    extra = {}
    if kind == "h1":
        psi, name = wv.h1_wavelet(), "H1"
    elif kind == "tdw":
        psi, name = wv.tdw_tensor_wavelet(), "TDW"
    elif kind == "tdh-bump":
        psi, beta = wv.tdh_wavelet()
        name = "TDH"
        extra["beta"] = beta
    else:
        raise UsageError("build-wavelet takes h1, tdw or tdh-bump")
    if args.csv:
        psi.to_csv(args.csv)
    if args.figure:
        from .plotting import plot_function
        plot_function(psi, args.figure, f"|psi| {name}")
    res = specialized_conditions(name, psi)
    tol = SPECIALIZED_TOL[name]
    report = {"wavelet": kind, "grid": {"lo": psi.grid.lo, "hi": psi.grid.hi, "n": psi.grid.n},
              "l2_norm2": psi.l2_norm() ** 2, "conditions": res.reports(), "threshold": tol,
              "csv": args.csv, **extra}
    ok = max(res.residuals) <= tol
    report["passed"] = bool(ok)
    _emit(report, args.out)
    return 0 if ok else 1


def cmd_acceptance(args) -> int:
    from .acceptance import CRITERIA, run_acceptance

    if args.suite != "primary":
        raise UsageError("the only suite is 'primary'")
    ids = None
    if args.only:
        try:
            ids = [int(v) for v in args.only.split(",")]
        except ValueError:
            raise UsageError("--only takes comma-separated criterion numbers") from None
        bad = [i for i in ids if i not in CRITERIA]
        if bad:
            raise UsageError(f"unknown criteria {bad}")
    echo = (lambda line: print(line, file=sys.stderr)) if args.out is None else print
    results = run_acceptance(ids, jobs=args.jobs, seed=args.seed, figures=args.figure_dir, echo=echo)
    report = {"suite": args.suite, "seed": args.seed, "passed": all(r.passed for r in results),
              "criteria": [r.to_dict(deterministic=not args.timings) for r in results]}
    text = json.dumps(report, indent=2, sort_keys=True, default=_json_default)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return 0 if report["passed"] else 1


# --- parser ---------------------------------------------------------------------------

def _seed_default() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help=f"random seed (fallback: ${SEED_ENV}, then 0)")
    common.add_argument("--jobs", type=int, default=1, help="worker threads; results do not depend on it")
    common.add_argument("--out", default=None, help="also write the JSON report to this path")
    common.add_argument("--timings", action="store_true", help="include wall-clock fields in reports")

    p = argparse.ArgumentParser(prog="reprolab", description="Reproducing formulae for triangular subgroups "
                                "of the symplectic group: checks, constructions and verification.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("wigner", parents=[common], help="Wigner field and marginals of a function spec")
    s.add_argument("fspec")
    s.add_argument("--csv", default=None, help="write the field as CSV")
    s.add_argument("--figure", default=None, help="heat map (d = 1)")
    s.add_argument("--dim", type=int, choices=(1, 2), default=1)
    s.add_argument("--half-width", type=float, default=8.0)
    s.add_argument("--samples", type=int, default=256)
    s.add_argument("--cell-centered", action="store_true")
    s.add_argument("--half-sample", choices=("fourier", "linear"), default="fourier")
    s.set_defaults(func=cmd_wigner)

    s = sub.add_parser("audit-group", parents=[common], help="invariant audit of a class-E group")
    s.add_argument("group", help="builtin name or YAML spec file")
    s.add_argument("--samples", type=int, default=100)
    s.add_argument("--probes", type=int, default=50)
    s.set_defaults(func=cmd_audit)

    s = sub.add_parser("check", parents=[common], help="admissibility conditions of a wavelet")
    s.add_argument("group")
    s.add_argument("--wavelet", required=True)
    s.add_argument("--condition", choices=("repthm", "calderon", "specialized", "weak"), default=None)
    s.add_argument("--sheet", default="Y1")
    s.add_argument("--probes", type=int, default=20)
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("verify", parents=[common], help="reproducing identity by quadrature")
    s.add_argument("group")
    s.add_argument("--wavelet", required=True)
    s.add_argument("--test-fn", required=True)
    s.add_argument("--brute-force", action="store_true")
    s.add_argument("--sheet", default="Y1")
    s.add_argument("--budget", type=int, default=None, help="maximum number of group nodes (brute force)")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("build-wavelet", parents=[common], help="construct and export a reproducing function")
    s.add_argument("kind", help="h1, tdw or tdh-bump")
    s.add_argument("--csv", default=None, help="CSV export of the sampled wavelet")
    s.add_argument("--figure", default=None)
    s.set_defaults(func=cmd_build)

    s = sub.add_parser("acceptance", parents=[common], help="run the acceptance battery")
    s.add_argument("--suite", default="primary")
    s.add_argument("--only", default=None, help="comma-separated criterion numbers")
    s.add_argument("--figure-dir", default=None, help="write report figures here")
    s.set_defaults(func=cmd_acceptance)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.seed is None:
            args.seed = _seed_default()
        if args.jobs < 1:
            raise UsageError("--jobs must be at least 1")
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"reprolab: error: {exc}", file=sys.stderr)
        return 2
    except SpecError as exc:
        parser.print_usage(sys.stderr)
        print(f"reprolab: error: {exc}", file=sys.stderr)
        return 2
    except ExpressionError as exc:
        parser.print_usage(sys.stderr)
        print(f"reprolab: error: bad function spec: {exc}", file=sys.stderr)
        return 2
    except (ReproLabError, ValueError, ArithmeticError) as exc:
        print(json.dumps({"command": args.command, "error": f"{type(exc).__name__}: {exc}"}, indent=2))
        return 1


if __name__ == "__main__":
    sys.exit(main())

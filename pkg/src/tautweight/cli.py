"""Command-line entry point tying the modules into reproducible runs.

Every run writes CSV profiles, JSON certificates and a manifest into the
output directory (flag ``--out``, env ``TAUTWEIGHT_OUT``, default cwd), with
deterministic names ``<command>-<params-hash>.<ext>`` so identical configs
produce byte-identical files.  Exit codes: 0 success, 1 usage or data error,
2 when a requested certificate fails (reports are still written).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

import numpy as np

from . import __version__
from .certificates import CertificateReport
from .counterexample import OscillatoryProfile, build_u, direction_step, dual_certificate_g
from .data import builtin
from .errors import TautweightError
from .grids import Grid, SampledFunction, from_csv, make_grid
from .ictv import IctvProblem, boundedness_report, denoise_ictv, ictv_optimality
from .levelset import (
    isoperimetric_report,
    layer_cake_residual,
    level_set,
    perimeter_identity_residual,
)
from .radial import (
    classify_general,
    classify_power,
    dual_field_z,
    explicit_minimizer,
    sample_solution,
    solve_cubic_c,
    switching_inequality,
)
from .rof import denoise, optimality_residuals, switching_decomposition
from .taut_string import kkt_certificate
from .weights import WeightPair

SCHEMA_VERSION = 1


def _params_hash(params: dict) -> str:
    canon = json.dumps(params, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not serializable: {type(obj)}")


def write_outputs(command: str, params: dict, payload: dict, csv_columns: dict, out_dir: str):
    """Write JSON payload, CSV columns and the manifest; returns file names."""
    os.makedirs(out_dir, exist_ok=True)
    tag = f"{command}-{_params_hash(params)}"
    written = []

    if csv_columns:
        names = list(csv_columns)
        arrays = [np.asarray(csv_columns[k]) for k in names]
        csv_path = os.path.join(out_dir, f"{tag}.csv")
        with open(csv_path, "w") as fh:
            fh.write(",".join(names) + "\n")
            for row in zip(*arrays):
                fh.write(",".join(repr(float(x)) for x in row) + "\n")
        written.append(os.path.basename(csv_path))

    json_path = os.path.join(out_dir, f"{tag}.json")
    with open(json_path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1, default=_json_default)
        fh.write("\n")
    written.append(os.path.basename(json_path))

    manifest = {
        "schema": SCHEMA_VERSION,
        "version": __version__,
        "command": command,
        "parameters": params,
        "outputs": written,
    }
    man_path = os.path.join(out_dir, f"{tag}.manifest.json")
    with open(man_path, "w") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=1, default=_json_default)
        fh.write("\n")
    written.append(os.path.basename(man_path))
    return tag, written


def _parse_weight(spec: str, alpha: float) -> WeightPair:
    if spec == "unit":
        return WeightPair.unit(alpha)
    if spec.startswith("power:"):
        kv = dict(item.split("=") for item in spec.split(":")[1:])
        return WeightPair.power(int(kv["d"]), alpha)
    if spec.startswith("table:"):
        table = from_csv(spec.split(":", 1)[1])
        return WeightPair(
            alpha=alpha, phi_kind="table", rho_kind="table",
            phi_table=table, rho_table=table,
        )
    raise TautweightError(f"unknown weight spec {spec!r}")


def _load_data(spec: str, grid: Grid):
    if spec.startswith("builtin:"):
        return builtin(spec, grid)
    if spec.startswith("csv:"):
        sf = from_csv(spec.split(":", 1)[1])
        return sf, None, None
    raise TautweightError(f"unknown data spec {spec!r}")


def _data_grid(args) -> Grid:
    return make_grid(args.grid_a, args.grid_b, args.n, grading=args.grading, ratio=args.ratio)


def _add_grid_flags(sub, a=0.0, b=1.0, n=1024, grading="uniform", ratio=1.0):
    sub.add_argument("--grid-a", type=float, default=a)
    sub.add_argument("--grid-b", type=float, default=b)
    sub.add_argument("--n", type=int, default=n)
    sub.add_argument("--grading", choices=("uniform", "geometric"), default=grading)
    sub.add_argument("--ratio", type=float, default=ratio)


def _cmd_denoise(args, out_dir: str) -> int:
    grid = _data_grid(args)
    f, F, beta = _load_data(args.data, grid)
    grid = f.grid  # csv data brings its own grid
    w = _parse_weight(args.weight, args.alpha)
    sol = denoise(f, w, f_antiderivative=F, power_beta=beta)
    cert = optimality_residuals(sol, f, w)
    kkt = kkt_certificate(sol.taut, sol.tube, args.kink_tol, args.feas_tol)
    segments = switching_decomposition(sol, f, w, power_beta=beta)
    params = {
        "data": args.data, "weight": args.weight, "alpha": args.alpha,
        "grid": [args.grid_a, args.grid_b, args.n, args.grading, args.ratio],
        "kink_tol": args.kink_tol, "feas_tol": args.feas_tol,
    }
    payload = {
        "energy": sol.energy,
        "certificate": cert.as_dict(),
        "kkt": kkt.as_dict(),
        "segments": [
            {"r_lo": s.r_lo, "r_hi": s.r_hi, "behavior": s.behavior,
             "residual": s.residual, "ok": s.ok}
            for s in segments
        ],
        "tolerances": {"kink_tol": args.kink_tol, "feas_tol": args.feas_tol},
    }
    cols = {
        "r": grid.knots, "f": f.values, "u": sol.u.values,
        "U": sol.U.values, "xi": sol.xi.values,
    }
    tag, _ = write_outputs("denoise", params, payload, cols, out_dir)
    ok = cert.passed and kkt.passed
    print(f"{tag}: energy={sol.energy:.6g} certificate={'PASS' if ok else 'FAIL'}")
    return 0 if ok else 2


def _cmd_radial(args, out_dir: str) -> int:
    if not (0.0 < args.alpha < 0.5):
        raise TautweightError(f"radial problem needs alpha in (0, 1/2), got {args.alpha}")
    params = {
        "d": args.d, "alpha": args.alpha, "beta": args.beta,
        "grid": [args.grid_a, args.grid_b, args.n, args.grading, args.ratio],
    }
    payload = {"d": args.d, "alpha": args.alpha}
    cols = {}
    failed = False
    if args.d == 3 and args.beta == 1.0 and 0.25 <= args.alpha < 0.5:
        sol = explicit_minimizer(args.alpha)
        grid = _data_grid(args)
        cert = dual_field_z(sol, grid)
        sampled = sample_solution(sol, grid)
        w = WeightPair.power(3, args.alpha)
        f = SampledFunction(grid, grid.knots ** (-1.0))
        residuals = optimality_residuals(sampled, f, w)
        payload.update(
            c=sol.c, flat_value=sol.flat_value,
            verdict=classify_power(args.beta, args.d).as_dict(),
            certificates={"dual_field": cert.as_dict(), "pointwise": residuals.as_dict()},
        )
        cols = {"r": grid.knots, "u": sampled.u.values, "f": f.values}
        failed = not (cert.passed and residuals.passed)
    else:
        payload.update(
            c=None, flat_value=None,
            verdict=classify_power(args.beta, args.d).as_dict(),
            certificates={},
            note="closed form covers d=3, beta=1, alpha in [1/4, 1/2); "
                 "use `denoise --weight power:d=..` for the numerical pipeline",
        )
    tag, _ = write_outputs("radial", params, payload, cols, out_dir)
    print(f"{tag}: " + json.dumps({k: payload[k] for k in ("c", "flat_value")}))
    return 2 if failed else 0


def _cmd_classify(args, out_dir: str) -> int:
    if args.beta is None and args.data is None:
        raise TautweightError("classify needs --beta or --data")
    params = {"d": args.d, "beta": args.beta, "data": args.data}
    if args.data:
        grid = make_grid(args.grid_a, args.grid_b, args.n, grading="geometric", ratio=args.ratio)
        f, _, _ = _load_data(args.data, grid)
        verdict = classify_general(f, args.d)
    else:
        verdict = classify_power(args.beta, args.d)
    payload = {"verdict": verdict.as_dict(), "d": args.d, "beta": args.beta}
    tag, _ = write_outputs("classify", params, payload, {}, out_dir)
    print(f"{tag}: {verdict.verdict} ({verdict.reason})")
    return 0


def _cmd_diagnose(args, out_dir: str) -> int:
    with open(args.solution) as fh:
        solution = json.load(fh)
    alpha = solution["alpha"]
    d = solution["d"]
    sibling = args.solution[:-5] + ".csv" if args.solution.endswith(".json") else None
    src = args.profile or (sibling if sibling and os.path.exists(sibling) else None)
    if not src:
        raise TautweightError("diagnose needs --profile <csv with r,u,f columns>")
    rows = np.loadtxt(src, delimiter=",", skiprows=1)
    grid = Grid(rows[:, 0])
    u = SampledFunction(grid, rows[:, 1])
    f = SampledFunction(grid, rows[:, 2])

    if args.levels == "auto":
        qs = np.quantile(u.values, [0.05, 0.25, 0.5, 0.75, 0.95])
        levels = sorted(set(float(q) for q in qs if q > 0))
        if solution.get("flat_value"):
            levels.append(1.01 * solution["flat_value"])
    else:
        levels = [float(x) for x in args.levels.split(",")]

    v = f.with_values((f.values - u.values) / alpha)
    reports = []
    worst = 0.0
    for s in levels:
        ls = level_set(u, s, d)
        resid = perimeter_identity_residual(u, f, alpha, s, d, mode="relative")
        worst = max(worst, resid)
        row = {"level": s, "perimeter_identity_residual": resid, "empty": ls.empty}
        if not ls.empty:
            row["isoperimetric"] = isoperimetric_report(v, ls, d).as_dict()
        reports.append(row)
    payload = {
        "levels": reports,
        "layer_cake_residual": layer_cake_residual(u, d),
        "tolerance": args.tol,
    }
    params = {"solution": os.path.basename(args.solution), "levels": args.levels, "tol": args.tol}
    tag, _ = write_outputs("diagnose", params, payload, {}, out_dir)
    ok = worst <= args.tol
    print(f"{tag}: worst perimeter-identity residual {worst:.3e} ({'PASS' if ok else 'FAIL'})")
    return 0 if ok else 2


def _cmd_ictv(args, out_dir: str) -> int:
    grid = _data_grid(args)
    f, _, _ = _load_data(args.data, grid)
    prob = IctvProblem(f=f, alpha=args.alpha, gamma=args.gamma)
    sol = denoise_ictv(prob, gap_tol=args.gap_tol, max_iter=args.max_iter)
    cert = ictv_optimality(sol, prob, tol=10.0 * args.gap_tol)
    sups = boundedness_report(sol)
    params = {
        "data": args.data, "alpha": args.alpha, "gamma": args.gamma,
        "grid": [args.grid_a, args.grid_b, args.n], "gap_tol": args.gap_tol,
        "max_iter": args.max_iter,
    }
    payload = {
        "primal_energy": sol.primal_energy,
        "dual_value": sol.dual_value,
        "gap": sol.gap,
        "iterations": sol.iterations,
        "certified": sol.certified,
        "certificate": cert.as_dict(),
        "sup_norms": sups.as_dict(),
    }
    cols = {
        "x": grid.knots, "f": f.values, "u": sol.u.values,
        "g": sol.g.values, "u_minus_g": sol.u.values - sol.g.values,
    }
    tag, _ = write_outputs("ictv", params, payload, cols, out_dir)
    ok = sol.certified and cert.passed
    print(f"{tag}: gap={sol.gap:.3e} iters={sol.iterations} {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 2


def _cmd_counterexample(args, out_dir: str) -> int:
    profile = OscillatoryProfile(
        kind=args.profile, n_max=args.n_max, cells_per_block=args.cells_per_block
    )
    u, tv = build_u(profile)
    steps = [direction_step(profile, n) for n in range(args.n_max + 1)]
    payload = {
        "total_variation": tv,
        "steps": [
            {"n": s.n, "t_n": s.t_n, "quotient": s.quotient,
             "direction_variation": s.direction_variation,
             "cancellation_residual": s.cancellation_residual}
            for s in steps
        ],
    }
    failed = False
    if args.profile == "mollified-step":
        cert = dual_certificate_g(profile)
        payload["dual_certificate"] = cert.as_dict()
        failed = not cert.passed
    params = {"profile": args.profile, "n_max": args.n_max,
              "cells_per_block": args.cells_per_block}
    cols = {"x": u.grid.knots, "u": u.values}
    tag, _ = write_outputs("counterexample", params, payload, cols, out_dir)
    print(f"{tag}: TV={tv:.6g}, quotient[n_max]={steps[-1].quotient:.4g}")
    return 2 if failed else 0


def _cmd_sweep(args, out_dir: str) -> int:
    alphas = []
    if args.alphas:
        alphas = [float(x) for x in args.alphas.split(",") if x]
    elif args.alpha_range:
        lo, hi, count = args.alpha_range.split(":")
        alphas = list(np.linspace(float(lo), float(hi), int(count)))
    sizes = [int(x) for x in args.sizes.split(",") if x] if args.sizes else []

    rows = []
    any_fail = False
    for alpha in alphas:
        sol = explicit_minimizer(alpha)
        cert = dual_field_z(sol, make_grid(1e-6, 1.0, 2048))
        any_fail |= not cert.passed
        rows.append({
            "alpha": alpha, "c": sol.c, "flat_value": sol.flat_value,
            "dual_field_passed": cert.passed,
        })

    convergence = None
    if sizes:
        alpha = args.alpha
        sol = explicit_minimizer(alpha)
        w = WeightPair.power(3, alpha)
        errors = []
        for n in sizes:
            grid = make_grid(1e-6, 1.0, n, grading="geometric", ratio=(1e6) ** (1.0 / n))
            f = SampledFunction(grid, grid.knots ** (-1.0))
            out = denoise(f, w, power_beta=1.0)
            mids = grid.midpoints
            diff = out.u_cells.values - sol.u(mids)
            err = float(np.sqrt(np.sum(diff**2 * np.diff(out.transform.t_values))))
            errors.append(err)
        slope = float(np.polyfit(np.log(sizes), np.log(errors), 1)[0])
        convergence = {"sizes": sizes, "l2_phi_errors": errors, "rate": -slope}
        any_fail |= not (-slope >= 1.0)

    params = {"alphas": args.alphas, "alpha_range": args.alpha_range,
              "sizes": args.sizes, "alpha": args.alpha}
    payload = {"rows": rows, "convergence": convergence}
    tag, _ = write_outputs("sweep", params, payload, {}, out_dir)
    print(f"{tag}: {len(rows)} alpha rows"
          + (f", rate={convergence['rate']:.3f}" if convergence else ""))
    return 2 if any_fail else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tautweight", description=__doc__)
    parser.add_argument("--out", default=None, help="output directory (default $TAUTWEIGHT_OUT or .)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("denoise", help="weighted TV denoising with certificates")
    p.add_argument("--data", required=True)
    p.add_argument("--weight", default="unit")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--kink-tol", type=float, default=1e-7)
    p.add_argument("--feas-tol", type=float, default=1e-9)
    _add_grid_flags(p, a=0.0, b=1.0, n=4096)

    p = sub.add_parser("radial", help="radial ball problem: closed form + certificates")
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, default=1.0)
    _add_grid_flags(p, a=1e-6, b=1.0, n=4096)

    p = sub.add_parser("classify", help="boundedness classification of radial data")
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--data", default=None)
    _add_grid_flags(p, a=1e-12, b=1.0, n=512, grading="geometric", ratio=1.06)

    p = sub.add_parser("diagnose", help="level-set reports for a solved profile")
    p.add_argument("--solution", required=True, help="JSON written by the radial command")
    p.add_argument("--profile", default=None, help="CSV with r,u,f columns")
    p.add_argument("--levels", default="auto")
    p.add_argument("--tol", type=float, default=1e-6)

    p = sub.add_parser("ictv", help="first/second-order infimal-convolution denoising")
    p.add_argument("--data", required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--gap-tol", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=200_000)
    _add_grid_flags(p, a=0.0, b=1.0, n=1024)

    p = sub.add_parser("counterexample", help="oscillatory profile with empty subgradient")
    p.add_argument("--profile", choices=("hat", "mollified-step"), default="hat")
    p.add_argument("--n-max", type=int, default=8)
    p.add_argument("--cells-per-block", type=int, default=1024)

    p = sub.add_parser("sweep", help="parameter sweeps with certificates and rates")
    p.add_argument("--alphas", default=None, help="comma-separated list")
    p.add_argument("--alpha-range", default=None, help="lo:hi:count")
    p.add_argument("--sizes", default=None, help="comma-separated grid sizes")
    p.add_argument("--alpha", type=float, default=0.25, help="alpha for the size sweep")

    return parser


def parse_and_dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse handles --help (code 0) and usage errors (code 2); the
        # contract here is 1 for usage errors
        return 0 if exc.code == 0 else 1
    out_dir = args.out or os.environ.get("TAUTWEIGHT_OUT", ".")
    handlers = {
        "denoise": _cmd_denoise,
        "radial": _cmd_radial,
        "classify": _cmd_classify,
        "diagnose": _cmd_diagnose,
        "ictv": _cmd_ictv,
        "counterexample": _cmd_counterexample,
        "sweep": _cmd_sweep,
    }
    try:
        return handlers[args.command](args, out_dir)
    except (TautweightError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(parse_and_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()

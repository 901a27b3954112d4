"""Command-line front-end: fit models from CSV, simulate data, run benchmarks.

Exit codes: 0 success, 2 invalid input (bad CSV, bad scenario or grid), 3
solver finished without converging (the result file is still written).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .bench import BenchGrid, fit_scaling, mean_times, run_grid, speedup, summarize, \
    write_records_csv, write_speedup_csv
from .cirls import fit_cirls
from .cls import fit_cls
from .compositional import SolverConfig
from .datagen import ScenarioSpec, generate
from .em import FitResult, fit_em
from .errors import InsufficientSizes, TflrError, ValidationError
from .io import default_names, read_composition_csv, write_matrix_csv
from .objective import fitted, kld


def _fresh_seed() -> int:
    seed = int(np.random.SeedSequence().generate_state(1, np.uint64)[0])
    print(f"seed: {seed} (generated; pass --seed to reproduce)")
    return seed


def _write_json(path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_fit(args) -> int:
    try:
        X = read_composition_csv(args.x)
        Y = read_composition_csv(args.y)
        if X.n != Y.n:
            raise ValidationError(f"{args.x} has {X.n} rows but {args.y} has {Y.n}")
        new_x = read_composition_csv(args.new_x) if args.new_x else None
        if new_x is not None and new_x.n_components != X.n_components:
            raise ValidationError(
                f"{args.new_x} has {new_x.n_components} components, expected {X.n_components}"
            )
        config = SolverConfig(eps_converge=args.eps, delta_guard=args.delta,
                              max_iter=args.max_iter, init=args.init)
    except (ValidationError, TflrError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.method == "em":
        result = fit_em(X, Y, config)
    elif args.method == "cirls":
        result = fit_cirls(X, Y, config)
    else:
        t0 = time.perf_counter()
        B = fit_cls(X, Y)
        elapsed = time.perf_counter() - t0
        result = FitResult(B=B, kld=kld(Y, fitted(X, B), args.delta), iterations=1,
                           elapsed=elapsed, converged=True)

    payload = {
        "method": args.method,
        "predictor_names": list(X.names or default_names(X.n_components, "x")),
        "response_names": list(Y.names or default_names(Y.n_components, "y")),
        "B": [[float(v) for v in row] for row in result.B.values],
        "kld": result.kld,
        "iterations": result.iterations,
        "elapsed_s": result.elapsed,
        "converged": result.converged,
        "stop_rule": result.stop_rule,
        "config": {"eps": args.eps, "delta": args.delta,
                   "max_iter": args.max_iter, "init": args.init},
    }
    _write_json(args.out, payload)

    if new_x is not None:
        fitted_path = Path(args.out).with_suffix("").parent / (Path(args.out).stem + "_fitted.csv")
        write_matrix_csv(fitted_path, fitted(new_x, result.B).values,
                         Y.names or default_names(Y.n_components, "y"))
        print(f"fitted values for {new_x.n} new rows: {fitted_path}")

    if not result.converged:
        print(f"warning: {args.method} hit max_iter={args.max_iter} without converging",
              file=sys.stderr)
        return 3
    return 0


def cmd_simulate(args) -> int:
    seed = args.seed if args.seed is not None else _fresh_seed()
    try:
        alpha_x = tuple(float(a) for a in args.alpha_x.split(",")) if args.alpha_x else None
        spec = ScenarioSpec(n=args.n, d_p=args.dp, d_r=args.dr, kind=args.kind,
                            alpha_x=alpha_x, phi=args.phi, seed=seed)
    except (ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    X, Y, B_true = generate(spec)
    write_matrix_csv(out / "X.csv", X.values, default_names(spec.d_p, "x"))
    write_matrix_csv(out / "Y.csv", Y.values, default_names(spec.d_r, "y"))
    meta = {
        "n": spec.n, "d_p": spec.d_p, "d_r": spec.d_r, "kind": spec.kind,
        "alpha_x": list(spec.alpha_x) if spec.alpha_x else [1.0] * spec.d_p,
        "phi": spec.phi, "seed": seed, "tflr_version": __version__,
        "files": ["X.csv", "Y.csv"] + (["B_true.csv"] if B_true is not None else []),
    }
    if B_true is not None:
        write_matrix_csv(out / "B_true.csv", B_true.values, default_names(spec.d_r, "y"))
    _write_json(out / "meta.json", meta)
    print(f"wrote {spec.kind} scenario (n={spec.n}, D_p={spec.d_p}, D_r={spec.d_r}) to {out}")
    return 0


def cmd_bench(args) -> int:
    seed = args.seed if args.seed is not None else _fresh_seed()
    try:
        sizes = tuple(int(s) for s in args.sizes.split(","))
        grid = BenchGrid(sizes=sizes, d_p=args.dp, d_r=args.dr, kind=args.kind,
                         replicates=args.replicates, base_seed=seed, phi=args.phi)
        config = SolverConfig(eps_converge=args.eps, delta_guard=args.delta,
                              max_iter=args.max_iter, init=args.init)
    except (ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records, errors = run_grid(grid, config)
    write_records_csv(records, out / "records.csv")
    summary = summarize(grid, config, records, errors)
    _write_json(out / "summary.json", summary)

    if records:
        speedups = speedup(records)
        write_speedup_csv(speedups, out / "speedup_vs_n.csv")
        if not args.no_figures:
            from .figures import scaling_figure, speedup_figure

            label = f"{grid.kind}, D_p={grid.d_p}, D_r={grid.d_r}"
            speedup_figure(speedups, out / "speedup_vs_n.png", title=label)
            times = {s: mean_times(records, s) for s in ("em", "cirls")}
            fits = {}
            for s in ("em", "cirls"):
                try:
                    fits[s] = fit_scaling(records, s)
                except InsufficientSizes:
                    fits[s] = None
            scaling_figure(times, fits, out / "time_vs_n.png", title=label)
    for err in errors:
        print(f"cell failed: {err}", file=sys.stderr)
    print(f"wrote benchmark results for sizes {list(grid.sizes)} to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tflr",
        description="Simplicial-simplicial linear regression without transformations: "
                    "EM and constrained-IRLS estimators, simulation and benchmarking.",
    )
    parser.add_argument("--version", action="version", version=f"tflr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit coefficients from CSV data")
    fit.add_argument("--x", required=True, help="predictor composition CSV")
    fit.add_argument("--y", required=True, help="response composition CSV")
    fit.add_argument("--method", choices=["em", "cirls", "cls"], default="cirls")
    fit.add_argument("--eps", type=float, default=1e-8, help="convergence tolerance")
    fit.add_argument("--delta", type=float, default=1e-8, help="zero-fitted-value guard")
    fit.add_argument("--max-iter", type=int, default=10_000)
    fit.add_argument("--init", choices=["uniform", "cls"], default="cls")
    fit.add_argument("--out", required=True, help="result JSON path")
    fit.add_argument("--new-x", default=None,
                     help="optional predictor CSV; fitted values go to <out>_fitted.csv")
    fit.set_defaults(func=cmd_fit)

    sim = sub.add_parser("simulate", help="generate scenario data as CSV + JSON metadata")
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--dp", type=int, required=True, help="predictor components")
    sim.add_argument("--dr", type=int, required=True, help="response components")
    sim.add_argument("--kind", choices=["independent", "dependent"], default="independent")
    sim.add_argument("--alpha-x", default=None, help="comma-separated concentrations for X")
    sim.add_argument("--phi", type=float, default=50.0, help="response concentration (dependent kind)")
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--out-dir", required=True)
    sim.set_defaults(func=cmd_simulate)

    bench = sub.add_parser("bench", help="paired EM vs CIRLS timing over a size grid")
    bench.add_argument("--sizes", required=True, help="comma-separated sample sizes")
    bench.add_argument("--replicates", type=int, default=20)
    bench.add_argument("--dp", type=int, required=True)
    bench.add_argument("--dr", type=int, required=True)
    bench.add_argument("--kind", choices=["independent", "dependent"], default="dependent")
    bench.add_argument("--phi", type=float, default=50.0)
    bench.add_argument("--eps", type=float, default=1e-8)
    bench.add_argument("--delta", type=float, default=1e-8)
    bench.add_argument("--max-iter", type=int, default=10_000)
    bench.add_argument("--init", choices=["uniform", "cls"], default="cls")
    bench.add_argument("--seed", type=int, default=None)
    bench.add_argument("--out-dir", required=True)
    bench.add_argument("--no-figures", action="store_true",
                       help="skip the PNG figures, write only CSV/JSON")
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

"""Timing harness: paired EM vs CIRLS runs over a sample-size grid.

Every (size, replicate) cell generates one dataset from a seed derived from
the grid's base seed, fits it with both solvers, and records wall time,
divergence and iteration counts. Seeds are paired so speed-up ratios and
divergence gaps always compare identical data. Timed fits run strictly
sequentially; one warm-up fit per solver is discarded before the grid starts
so first-call allocation effects stay out of the measurements.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass

import numpy as np

from .cirls import fit_cirls
from .compositional import SolverConfig
from .datagen import ScenarioSpec, generate
from .em import fit_em
from .errors import InsufficientSizes, InvalidSpec, UnpairedRecords

SOLVERS = {"em": fit_em, "cirls": fit_cirls}


@dataclass(frozen=True)
class BenchGrid:
    sizes: tuple[int, ...]
    d_p: int
    d_r: int
    kind: str
    replicates: int = 20
    base_seed: int = 0
    phi: float = 50.0

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if len(sizes) < 1 or any(s < 2 for s in sizes):
            raise InvalidSpec(f"sizes must be >= 2, got {sizes}")
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise InvalidSpec(f"sizes must be strictly increasing, got {sizes}")
        if self.replicates < 1:
            raise InvalidSpec(f"replicates must be >= 1, got {self.replicates}")
        object.__setattr__(self, "sizes", sizes)
        # delegate the remaining field checks to the scenario validator
        ScenarioSpec(n=sizes[0], d_p=self.d_p, d_r=self.d_r, kind=self.kind,
                     phi=self.phi, seed=self.base_seed)


@dataclass(frozen=True)
class BenchRecord:
    n: int
    solver: str
    elapsed: float
    kld: float
    iterations: int
    replicate: int
    seed: int


@dataclass(frozen=True)
class ScalingFit:
    """Power-law fit t = exp(alpha) * n^beta from log-log least squares."""

    alpha: float
    beta: float
    r_squared: float


def derived_seed(base_seed: int, n: int, replicate: int) -> int:
    """Stable per-cell seed; both solvers in a cell share it."""
    return int(np.random.SeedSequence([base_seed, n, replicate]).generate_state(1, np.uint64)[0])


def _cell_spec(grid: BenchGrid, n: int, replicate: int) -> ScenarioSpec:
    return ScenarioSpec(n=n, d_p=grid.d_p, d_r=grid.d_r, kind=grid.kind,
                        phi=grid.phi, seed=derived_seed(grid.base_seed, n, replicate))


def run_grid(grid: BenchGrid, config: SolverConfig = SolverConfig()
             ) -> tuple[list[BenchRecord], list[dict]]:
    """Fit every cell with both solvers; returns (records, per-cell errors).

    A failing cell is reported in the error list and contributes no records,
    so the pairing invariant (one em and one cirls record per cell) always
    holds for the returned list.
    """
    # warm-up on the smallest size, discarded
    warm = _cell_spec(grid, grid.sizes[0], grid.replicates)
    Xw, Yw, _ = generate(warm)
    for fit in SOLVERS.values():
        try:
            fit(Xw, Yw, config)
        except Exception:
            pass

    records: list[BenchRecord] = []
    errors: list[dict] = []
    for n in grid.sizes:
        for rep in range(grid.replicates):
            spec = _cell_spec(grid, n, rep)
            X, Y, _ = generate(spec)
            cell: list[BenchRecord] = []
            for solver, fit in SOLVERS.items():
                try:
                    t0 = time.perf_counter()
                    res = fit(X, Y, config)
                    elapsed = time.perf_counter() - t0
                except Exception as exc:
                    errors.append({"n": n, "replicate": rep, "solver": solver,
                                   "seed": spec.seed, "error": repr(exc)})
                    cell = []
                    break
                cell.append(BenchRecord(n=n, solver=solver, elapsed=elapsed,
                                        kld=res.kld, iterations=res.iterations,
                                        replicate=rep, seed=spec.seed))
            records.extend(cell)
    return records, errors


def _paired(records: list[BenchRecord]) -> dict[tuple[int, int], dict[str, BenchRecord]]:
    cells: dict[tuple[int, int], dict[str, BenchRecord]] = {}
    for rec in records:
        cells.setdefault((rec.n, rec.replicate), {})[rec.solver] = rec
    for (n, rep), pair in cells.items():
        if set(pair) != set(SOLVERS):
            raise UnpairedRecords(f"cell (n={n}, replicate={rep}) has solvers {sorted(pair)}")
        if pair["em"].seed != pair["cirls"].seed:
            raise UnpairedRecords(f"cell (n={n}, replicate={rep}) mixes seeds")
    return cells


def speedup(records: list[BenchRecord]) -> dict[int, float]:
    """Per size: mean over replicates of elapsed_em / elapsed_cirls on paired seeds."""
    cells = _paired(records)
    ratios: dict[int, list[float]] = {}
    for (n, _), pair in cells.items():
        ratios.setdefault(n, []).append(pair["em"].elapsed / pair["cirls"].elapsed)
    return {n: float(np.mean(r)) for n, r in sorted(ratios.items())}


def mean_times(records: list[BenchRecord], solver: str) -> dict[int, float]:
    """Mean elapsed seconds per size for one solver."""
    times: dict[int, list[float]] = {}
    for rec in records:
        if rec.solver == solver:
            times.setdefault(rec.n, []).append(rec.elapsed)
    return {n: float(np.mean(t)) for n, t in sorted(times.items())}


def fit_scaling(records: list[BenchRecord], solver: str) -> ScalingFit:
    """Least-squares fit of log(mean time) on log(n); beta is the scaling exponent."""
    means = mean_times(records, solver)
    if len(means) < 3:
        raise InsufficientSizes(
            f"scaling fit needs >= 3 distinct sizes for {solver!r}, got {len(means)}"
        )
    log_n = np.log(np.array(sorted(means)))
    log_t = np.log(np.array([means[n] for n in sorted(means)]))
    beta, alpha = np.polyfit(log_n, log_t, 1)
    resid = log_t - (alpha + beta * log_n)
    total = log_t - log_t.mean()
    ss_tot = float(total @ total)
    r_squared = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else 1.0
    return ScalingFit(alpha=float(alpha), beta=float(beta), r_squared=r_squared)


def write_records_csv(records: list[BenchRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "solver", "replicate", "seed", "elapsed_s", "kld", "iterations"])
        for r in records:
            writer.writerow([r.n, r.solver, r.replicate, r.seed,
                             repr(r.elapsed), repr(r.kld), r.iterations])


def write_speedup_csv(speedups: dict[int, float], path) -> None:
    """Figure-ready axes: sample size against the em/cirls time ratio."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "speedup"])
        for n in sorted(speedups):
            writer.writerow([n, repr(speedups[n])])


def summarize(grid: BenchGrid, config: SolverConfig,
              records: list[BenchRecord], errors: list[dict]) -> dict:
    """Summary payload: per-size speed-ups, scaling fits, divergence gaps, errors."""
    summary: dict = {
        "grid": {"sizes": list(grid.sizes), "d_p": grid.d_p, "d_r": grid.d_r,
                 "kind": grid.kind, "replicates": grid.replicates,
                 "base_seed": grid.base_seed, "phi": grid.phi},
        "config": {"eps_converge": config.eps_converge, "delta_guard": config.delta_guard,
                   "eta_clamp": config.eta_clamp, "max_iter": config.max_iter,
                   "init": config.init if isinstance(config.init, str) else "given"},
        "clock": {"name": "perf_counter",
                  "resolution_s": time.get_clock_info("perf_counter").resolution},
        "warmup_fits_discarded": 1,
        "errors": errors,
    }
    if records:
        cells = _paired(records)
        gaps = [abs(p["em"].kld - p["cirls"].kld) for p in cells.values()]
        summary["speedup_per_size"] = {str(n): s for n, s in speedup(records).items()}
        summary["kld_gap_max"] = max(gaps)
        summary["kld_gap_mean"] = float(np.mean(gaps))
        summary["mean_elapsed_s"] = {solver: {str(n): t for n, t in mean_times(records, solver).items()}
                                     for solver in SOLVERS}
        for solver in SOLVERS:
            try:
                fit = fit_scaling(records, solver)
                summary[f"scaling_{solver}"] = {"alpha": fit.alpha, "beta": fit.beta,
                                                "r_squared": fit.r_squared}
            except InsufficientSizes as exc:
                summary[f"scaling_{solver}"] = {"skipped": str(exc)}
    return summary

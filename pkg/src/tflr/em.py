"""EM estimator for the simplicial-simplicial regression coefficients.

Each observed response mass y_ik is split across the predictor components
(E-step allocations z_ijk), and the coefficient rows are re-estimated by
normalizing the allocation totals (M-step). Both steps preserve the
row-stochastic constraints on B, and the divergence never increases.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .cls import initial_coefficients
from .compositional import CoefficientMatrix, SolverConfig
from .errors import DimensionMismatch, NonFinite
from .objective import _values, kld, y_entropy_term


@dataclass(frozen=True, eq=False)
class LatentAllocation:
    """n x D_p x D_r allocations; summed over the predictor axis they
    reproduce the observed responses wherever the fitted value exceeds the
    guard."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.values, dtype=np.float64)
        if arr.ndim != 3:
            raise DimensionMismatch(f"allocations must be 3-d, got shape {arr.shape}")
        if (arr < 0).any():
            raise ValueError("allocations must be non-negative")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)


@dataclass(frozen=True, eq=False)
class FitResult:
    """Shared output record of the EM and CIRLS estimators.

    ``trace`` holds per-iteration divergence values (initial value included)
    when tracing was requested; ``stop_rule`` names the convergence test
    that fired ("b_change" or "kld_change"), or None when the iteration cap
    was hit.
    """

    B: CoefficientMatrix
    kld: float
    iterations: int
    elapsed: float
    converged: bool
    trace: tuple[float, ...] | None = None
    stop_rule: str | None = None


def e_step(X, Y, B, delta: float = 1e-8) -> LatentAllocation:
    """Expected share of each response mass attributed to each predictor.

    z_ijk = x_ij B_jk / max(sum_j' x_ij' B_j'k, delta) * y_ik
    """
    Xv, Yv, Bv = _values(X), _values(Y), _values(B)
    n, d_p = Xv.shape
    if Yv.shape[0] != n:
        raise DimensionMismatch(f"X has {n} rows but Y has {Yv.shape[0]}")
    if Bv.shape != (d_p, Yv.shape[1]):
        raise DimensionMismatch(
            f"B has shape {Bv.shape}, expected ({d_p}, {Yv.shape[1]})"
        )
    num = Xv[:, :, None] * Bv[None, :, :]          # n x D_p x D_r
    den = np.maximum(num.sum(axis=1), delta)       # n x D_r, the guarded fit
    return LatentAllocation(num / den[:, None, :] * Yv[:, None, :])


def m_step(Z: LatentAllocation) -> CoefficientMatrix:
    """Row-normalized allocation totals.

    A predictor row with zero total allocation (its column of X never
    appears) is reset to the uniform row: any simplex row is optimal there
    and uniform keeps the result deterministic.
    """
    totals = _values(Z).sum(axis=0)                # D_p x D_r
    d_r = totals.shape[1]
    row_sums = totals.sum(axis=1)
    dead = row_sums <= 0.0
    if dead.any():
        totals = totals.copy()
        totals[dead] = 1.0 / d_r
        row_sums = totals.sum(axis=1)
    return CoefficientMatrix(totals / row_sums[:, None])


def fit_em(X, Y, config: SolverConfig = SolverConfig()) -> FitResult:
    """Alternate E- and M-steps until the coefficients or the divergence settle.

    Stops when the L1 change in B or the divergence decrease drops below
    config.eps_converge, whichever happens first. The M-step only needs the
    allocation totals, so the full n x D_p x D_r array is never materialized
    here; the totals are accumulated with one matrix product per iteration.
    """
    Xv, Yv = _values(X), _values(Y)
    if Xv.shape[0] != Yv.shape[0]:
        raise DimensionMismatch(f"X has {Xv.shape[0]} rows but Y has {Yv.shape[0]}")
    t0 = time.perf_counter()
    delta, eps = config.delta_guard, config.eps_converge
    d_r = Yv.shape[1]

    B = initial_coefficients(X, Y, config)
    y_const = y_entropy_term(Yv)
    M = Xv @ B
    wll = float(np.sum(xlogy(Yv, np.maximum(M, delta))))
    trace = [y_const - wll] if config.trace else None

    converged = False
    stop_rule = None
    it = 0
    for it in range(1, config.max_iter + 1):
        # allocation totals: sum_i z_ijk = B_jk * [X' (Y / max(XB, delta))]_jk
        totals = B * (Xv.T @ (Yv / np.maximum(M, delta)))
        row_sums = totals.sum(axis=1)
        dead = row_sums <= 0.0
        if dead.any():
            totals[dead] = 1.0 / d_r
            row_sums[dead] = 1.0
        B_new = totals / row_sums[:, None]

        diff_b = float(np.abs(B_new - B).sum())
        B = B_new
        M = Xv @ B
        wll_new = float(np.sum(xlogy(Yv, np.maximum(M, delta))))
        if not np.isfinite(wll_new):
            raise NonFinite(f"objective became non-finite at iteration {it}", iteration=it)
        decrease = wll_new - wll  # divergence drop from the previous iterate
        wll = wll_new
        if trace is not None:
            trace.append(y_const - wll)

        if diff_b < eps:
            converged, stop_rule = True, "b_change"
            break
        if decrease < eps:
            converged, stop_rule = True, "kld_change"
            break

    elapsed = time.perf_counter() - t0
    B_final = CoefficientMatrix(B)
    return FitResult(
        B=B_final,
        kld=kld(Yv, Xv @ B, delta),
        iterations=it,
        elapsed=elapsed,
        converged=converged,
        trace=tuple(trace) if trace is not None else None,
        stop_rule=stop_rule,
    )

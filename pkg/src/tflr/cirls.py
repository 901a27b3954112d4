"""Constrained iteratively reweighted least squares estimator.

Treats each response component as a Bernoulli mean with identity link, so
the working response is the observed Y itself and the weights are the
inverse variances 1/(mu(1-mu)) at the current fitted values. Each iteration
solves one simplex-constrained weighted least squares problem as a QP; the
quadratic term is block diagonal (one X'VX block per response component) and
is factored block-wise inside the QP engine.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .cls import initial_coefficients
from .compositional import CoefficientMatrix, SolverConfig
from .em import FitResult
from .errors import DimensionMismatch, NonFinite, NotPositiveDefinite
from .objective import _values, kld, y_entropy_term
from .qp import QpProblem, coupled_simplex_constraints, solve_qp


@dataclass(frozen=True, eq=False)
class WeightMatrix:
    """n x D_r inverse-variance weights, all finite and positive."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.values, dtype=np.float64)
        if arr.ndim != 2:
            raise DimensionMismatch(f"weights must be 2-d, got shape {arr.shape}")
        if not np.isfinite(arr).all() or (arr <= 0).any():
            raise NonFinite("weights must be finite and positive")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)


def _clamped_weights(M: np.ndarray, eta: float) -> np.ndarray:
    mu = np.clip(M, eta, 1.0 - eta)
    return 1.0 / (mu * (1.0 - mu))


def compute_weights(M, eta: float = 1e-10) -> WeightMatrix:
    """Inverse-variance weights 1/(mu(1-mu)) with mu clamped to [eta, 1-eta].

    The clamp bounds every weight by 1/(eta(1-eta)), keeping the weighted
    normal matrix positive definite even when fitted values sit on the
    simplex boundary.
    """
    if not 0 < eta < 0.5:
        raise ValueError(f"eta must lie in (0, 0.5), got {eta}")
    return WeightMatrix(_clamped_weights(_values(M), eta))


def _fill_qp_terms(Xv: np.ndarray, Wv: np.ndarray, Yv: np.ndarray,
                   D: np.ndarray, d: np.ndarray) -> None:
    """Write the weighted normal blocks X'V_k X and d = vec(X'(W*Y)) in place."""
    d_p = Xv.shape[1]
    for k in range(Wv.shape[1]):
        sl = slice(k * d_p, (k + 1) * d_p)
        D[sl, sl] = Xv.T @ (Wv[:, k : k + 1] * Xv)
    d[:] = (Xv.T @ (Wv * Yv)).ravel(order="F")


def assemble_qp(X, Y, W) -> QpProblem:
    """The weighted least squares subproblem as a QP over column-stacked B.

    Block k of the quadratic term is X'V_k X with V_k the diagonal of W's
    column k; the linear term stacks the columns of X'(W*Y) in the same
    order. With unit weights this is exactly the constrained least squares
    problem.
    """
    Xv, Yv, Wv = _values(X), _values(Y), _values(W)
    n, d_p = Xv.shape
    if Yv.shape[0] != n or Wv.shape != Yv.shape:
        raise DimensionMismatch(
            f"inconsistent shapes: X {Xv.shape}, Y {Yv.shape}, W {Wv.shape}"
        )
    d_r = Yv.shape[1]
    m = d_p * d_r
    D = np.zeros((m, m))
    d = np.zeros(m)
    _fill_qp_terms(Xv, Wv, Yv, D, d)
    A, b, n_eq = coupled_simplex_constraints(d_p, d_r)
    return QpProblem(D, d, A, b, n_eq, block=d_p)


def fit_cirls(X, Y, config: SolverConfig = SolverConfig()) -> FitResult:
    """Iterate weights -> QP -> fitted values until the divergence stabilizes.

    The QP matrices are allocated once and their entries refreshed each
    iteration. Unlike EM the divergence trace is not guaranteed monotone, so
    the best iterate seen is tracked and returned if the final one is worse
    by more than the convergence tolerance.
    """
    Xv, Yv = _values(X), _values(Y)
    if Xv.shape[0] != Yv.shape[0]:
        raise DimensionMismatch(f"X has {Xv.shape[0]} rows but Y has {Yv.shape[0]}")
    t0 = time.perf_counter()
    delta, eps, eta = config.delta_guard, config.eps_converge, config.eta_clamp
    d_p, d_r = Xv.shape[1], Yv.shape[1]
    m = d_p * d_r

    B = initial_coefficients(X, Y, config)
    y_const = y_entropy_term(Yv)
    M = Xv @ B
    kld_cur = y_const - float(np.sum(xlogy(Yv, np.maximum(M, delta))))
    trace = [kld_cur] if config.trace else None

    A, b, n_eq = coupled_simplex_constraints(d_p, d_r)
    Dmat = np.zeros((m, m))
    dvec = np.zeros(m)

    best_kld, best_B = kld_cur, B
    converged = False
    it = 0
    for it in range(1, config.max_iter + 1):
        W = _clamped_weights(M, eta)
        _fill_qp_terms(Xv, W, Yv, Dmat, dvec)
        problem = QpProblem(Dmat, dvec, A, b, n_eq, block=d_p)
        try:
            sol = solve_qp(problem)
        except NotPositiveDefinite:
            ridge = 1e-10 * float(np.trace(Dmat)) / m
            sol = solve_qp(QpProblem(Dmat + ridge * np.eye(m), dvec, A, b, n_eq, block=d_p))
        B = sol.beta.reshape((d_p, d_r), order="F")
        M = Xv @ B
        kld_new = y_const - float(np.sum(xlogy(Yv, np.maximum(M, delta))))
        if not np.isfinite(kld_new):
            raise NonFinite(f"objective became non-finite at iteration {it}", iteration=it)
        if trace is not None:
            trace.append(kld_new)
        if kld_new < best_kld:
            best_kld, best_B = kld_new, B
        change = abs(kld_cur - kld_new)
        kld_cur = kld_new
        if change < eps:
            converged = True
            break

    if kld_cur > best_kld + eps:
        B = best_B
    elapsed = time.perf_counter() - t0
    B_final = CoefficientMatrix(B)
    return FitResult(
        B=B_final,
        kld=kld(Yv, Xv @ B, delta),
        iterations=it,
        elapsed=elapsed,
        converged=converged,
        trace=tuple(trace) if trace is not None else None,
        stop_rule="kld_change" if converged else None,
    )

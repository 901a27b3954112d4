"""Constrained least squares fit of the coefficient matrix.

Minimizes ||Y - XB||_F^2 over row-stochastic B. This is the unit-weight
special case of the reweighted solver's subproblem, posed as a single QP
whose quadratic term is block diagonal with every block equal to X'X. Used
directly and as the default warm start for both iterative estimators.
"""

from __future__ import annotations

import numpy as np

from .compositional import CoefficientMatrix, SolverConfig, uniform_coefficients
from .errors import DimensionMismatch, NotPositiveDefinite
from .objective import _values
from .qp import QpProblem, coupled_simplex_constraints, solve_qp


def fit_cls(X, Y) -> CoefficientMatrix:
    """Least-squares coefficient matrix with simplex constraints on each row."""
    Xv, Yv = _values(X), _values(Y)
    if Xv.shape[0] != Yv.shape[0]:
        raise DimensionMismatch(
            f"X has {Xv.shape[0]} rows but Y has {Yv.shape[0]}"
        )
    d_p, d_r = Xv.shape[1], Yv.shape[1]
    xtx = Xv.T @ Xv
    D = np.kron(np.eye(d_r), xtx)
    d = (Xv.T @ Yv).ravel(order="F")
    A, b, n_eq = coupled_simplex_constraints(d_p, d_r)
    try:
        sol = solve_qp(QpProblem(D, d, A, b, n_eq, block=d_p))
    except NotPositiveDefinite:
        # collinear predictors; a tiny ridge restores positive definiteness
        # and the simplex constraints keep the fit well determined
        ridge = 1e-10 * float(np.trace(xtx)) / d_p
        sol = solve_qp(QpProblem(D + ridge * np.eye(D.shape[0]), d, A, b, n_eq, block=d_p))
    return CoefficientMatrix(sol.beta.reshape((d_p, d_r), order="F"))


def initial_coefficients(X, Y, config: SolverConfig) -> np.ndarray:
    """Starting B values for the iterative solvers, per config.init."""
    if isinstance(config.init, CoefficientMatrix):
        return np.array(config.init.values, dtype=np.float64)
    d_p, d_r = _values(X).shape[1], _values(Y).shape[1]
    if config.init == "uniform":
        return np.array(uniform_coefficients(d_p, d_r).values)
    return np.array(fit_cls(X, Y).values)

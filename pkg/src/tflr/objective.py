"""Fitted values and the Kullback-Leibler objective shared by both solvers.

The model is E[Y|X] = XB. The objective from observed Y to fitted M = XB is

    sum_i sum_k y_ik * log(y_ik / max(m_ik, delta))

with y log y = 0 when y = 0. Guarding the fitted value with ``delta`` keeps
the objective finite when a fitted entry underflows to zero, which happens
when a predictor column and the matching coefficient entries vanish together.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .compositional import CoefficientMatrix, CompositionMatrix, _as_matrix
from .errors import DimensionMismatch


@dataclass(frozen=True, eq=False)
class FittedMatrix:
    """An n x D_r matrix of fitted response compositions.

    Each row of XB is a convex combination of B's simplex rows with simplex
    weights, so rows sum to 1 up to the rounding already present in X and B.
    """

    values: np.ndarray
    tol: float = 1e-8

    def __post_init__(self):
        arr = _as_matrix(self.values)
        if (arr < -self.tol).any() or (arr > 1.0 + self.tol).any():
            raise DimensionMismatch("fitted values must lie in [0, 1]")
        sums = arr.sum(axis=1)
        if np.abs(sums - 1.0).max() > self.tol:
            i = int(np.argmax(np.abs(sums - 1.0)))
            raise DimensionMismatch(f"fitted row {i} sums to {sums[i]!r}, expected 1")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)


def _values(m) -> np.ndarray:
    return m.values if hasattr(m, "values") else np.asarray(m, dtype=np.float64)


def fitted(X: CompositionMatrix, B: CoefficientMatrix) -> FittedMatrix:
    """The matrix product XB, row-wise on the simplex by convexity."""
    Xv, Bv = _values(X), _values(B)
    if Xv.shape[1] != Bv.shape[0]:
        raise DimensionMismatch(
            f"X has {Xv.shape[1]} columns but B has {Bv.shape[0]} rows"
        )
    return FittedMatrix(Xv @ Bv)


def kld(Y, M, delta: float = 1e-8) -> float:
    """Kullback-Leibler divergence from observed to fitted compositions.

    Terms with y_ik = 0 contribute exactly 0 (explicit branch via xlogy, not
    a floating-point accident); fitted entries are floored at ``delta``.
    """
    Yv, Mv = _values(Y), _values(M)
    if Yv.shape != Mv.shape:
        raise DimensionMismatch(f"shapes differ: {Yv.shape} vs {Mv.shape}")
    guarded = np.maximum(Mv, delta)
    return float(np.sum(xlogy(Yv, Yv) - xlogy(Yv, guarded)))


def working_loglik(Y, M, delta: float = 1e-8) -> float:
    """The fitted-dependent part of the objective, sum of y * log(max(m, delta)).

    Cheaper to track per iteration than the full divergence: the observed-data
    entropy term is constant, so kld = sum y log y - working_loglik.
    """
    Yv, Mv = _values(Y), _values(M)
    if Yv.shape != Mv.shape:
        raise DimensionMismatch(f"shapes differ: {Yv.shape} vs {Mv.shape}")
    return float(np.sum(xlogy(Yv, np.maximum(Mv, delta))))


def y_entropy_term(Y) -> float:
    """sum over y > 0 of y log y, the constant part of the divergence."""
    return float(np.sum(xlogy(_values(Y), _values(Y))))

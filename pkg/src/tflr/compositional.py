"""Core data types for compositions, coefficient matrices and solver settings.

A composition is a non-negative vector summing to 1 (a point on the standard
simplex). Responses Y (n x D_r) and predictors X (n x D_p) are matrices whose
rows are compositions; the regression coefficient matrix B (D_p x D_r) is
row-stochastic, so each of its rows is itself a composition.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    NegativeEntry,
    RowSumViolation,
    TooFewComponents,
    ZeroRowSum,
)

INGEST_TOL = 1e-8


def _as_matrix(values) -> np.ndarray:
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise TooFewComponents(f"expected a non-empty 2-d matrix, got shape {arr.shape}")
    return arr


def _check_simplex_rows(arr: np.ndarray, tol: float, what: str) -> None:
    """Raise unless every row of ``arr`` is on the simplex within ``tol``."""
    if arr.shape[1] < 2:
        raise TooFewComponents(f"{what} needs at least 2 components, got {arr.shape[1]}")
    neg = arr < -tol
    if neg.any():
        i, j = np.argwhere(neg)[0]
        raise NegativeEntry(f"{what} entry [{i},{j}] = {arr[i, j]!r} is negative")
    sums = arr.sum(axis=1)
    bad = np.abs(sums - 1.0) > tol
    if bad.any():
        i = int(np.argmax(bad))
        raise RowSumViolation(f"{what} row {i} sums to {sums[i]!r}, expected 1 within {tol}")


@dataclass(frozen=True, eq=False)
class CompositionMatrix:
    """An n x D matrix whose rows lie on the standard simplex.

    Immutable after construction; the underlying array is marked read-only.
    Component ``names`` are optional metadata and never enter the math.
    """

    values: np.ndarray
    names: tuple[str, ...] | None = None
    tol: float = INGEST_TOL

    def __post_init__(self):
        arr = _as_matrix(self.values)
        _check_simplex_rows(arr, self.tol, "composition")
        if self.names is not None and len(self.names) != arr.shape[1]:
            raise TooFewComponents(
                f"{len(self.names)} names for {arr.shape[1]} components"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)
        if self.names is not None:
            object.__setattr__(self, "names", tuple(self.names))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def n_components(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class CoefficientMatrix:
    """A D_p x D_r row-stochastic coefficient matrix.

    Every entry lies in [0, 1] and every row sums to 1, up to ``tol``. Unlike
    compositions a single row (D_p = 1) is allowed.
    """

    values: np.ndarray
    tol: float = INGEST_TOL

    def __post_init__(self):
        arr = _as_matrix(self.values)
        if arr.shape[1] < 2:
            raise TooFewComponents(
                f"coefficient matrix needs at least 2 response components, got {arr.shape[1]}"
            )
        neg = arr < -self.tol
        if neg.any():
            i, j = np.argwhere(neg)[0]
            raise NegativeEntry(f"coefficient [{i},{j}] = {arr[i, j]!r} is negative")
        if (arr > 1.0 + self.tol).any():
            i, j = np.argwhere(arr > 1.0 + self.tol)[0]
            raise RowSumViolation(f"coefficient [{i},{j}] = {arr[i, j]!r} exceeds 1")
        sums = arr.sum(axis=1)
        bad = np.abs(sums - 1.0) > self.tol
        if bad.any():
            i = int(np.argmax(bad))
            raise RowSumViolation(
                f"coefficient row {i} sums to {sums[i]!r}, expected 1 within {self.tol}"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def d_p(self) -> int:
        return self.values.shape[0]

    @property
    def d_r(self) -> int:
        return self.values.shape[1]

    def max_row_sum_error(self) -> float:
        return float(np.abs(self.values.sum(axis=1) - 1.0).max())


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances and controls shared by the EM and CIRLS estimators.

    eps_converge   stop when the objective change (or the L1 change in B for
                   EM) drops below this value
    delta_guard    floor applied to fitted values inside logarithms and the
                   E-step denominator, so zeros in the data stay harmless
    eta_clamp      fitted means are clamped to [eta, 1-eta] before the
                   inverse-variance weights 1/(mu(1-mu)) are formed
    init           "uniform", "cls", or an explicit CoefficientMatrix
    trace          record the per-iteration objective values (off by default,
                   it costs memory on long EM runs)
    """

    eps_converge: float = 1e-8
    delta_guard: float = 1e-8
    eta_clamp: float = 1e-10
    max_iter: int = 10_000
    init: str | CoefficientMatrix = "cls"
    trace: bool = False

    def __post_init__(self):
        if not self.eps_converge > 0:
            raise ValueError(f"eps_converge must be positive, got {self.eps_converge}")
        if not self.delta_guard > 0:
            raise ValueError(f"delta_guard must be positive, got {self.delta_guard}")
        if not 0 < self.eta_clamp < 0.5:
            raise ValueError(f"eta_clamp must lie in (0, 0.5), got {self.eta_clamp}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if isinstance(self.init, str) and self.init not in ("uniform", "cls"):
            raise ValueError(f"init must be 'uniform', 'cls' or a CoefficientMatrix, got {self.init!r}")


def validate_composition(values, tol: float = INGEST_TOL,
                         names: tuple[str, ...] | None = None) -> CompositionMatrix:
    """Validate an n x D matrix of proportions and wrap it unchanged.

    Never rescales: a row whose sum is off by more than ``tol`` is an error,
    not something to fix silently.
    """
    return CompositionMatrix(values, names=names, tol=tol)


def closure(values) -> CompositionMatrix:
    """Divide each row by its sum, turning raw non-negative amounts into compositions."""
    arr = _as_matrix(values)
    if arr.shape[1] < 2:
        raise TooFewComponents(f"need at least 2 components, got {arr.shape[1]}")
    if (arr < 0).any():
        i, j = np.argwhere(arr < 0)[0]
        raise NegativeEntry(f"entry [{i},{j}] = {arr[i, j]!r} is negative")
    sums = arr.sum(axis=1)
    if (sums <= 0).any():
        i = int(np.argmax(sums <= 0))
        raise ZeroRowSum(f"row {i} has non-positive sum {sums[i]!r}")
    return CompositionMatrix(arr / sums[:, None])


def uniform_coefficients(d_p: int, d_r: int) -> CoefficientMatrix:
    """The row-stochastic matrix with every entry 1/d_r."""
    if d_p < 1:
        raise TooFewComponents(f"need at least 1 predictor component, got {d_p}")
    if d_r < 2:
        raise TooFewComponents(f"need at least 2 response components, got {d_r}")
    return CoefficientMatrix(np.full((d_p, d_r), 1.0 / d_r))

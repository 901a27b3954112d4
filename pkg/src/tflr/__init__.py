"""Transformation-free linear regression for compositional data.

Both the response and the predictor live on the simplex; the model is
E[Y|X] = XB with a row-stochastic coefficient matrix B, estimated by
minimizing the Kullback-Leibler divergence from observed to fitted
compositions. Two interchangeable estimators are provided: a latent
allocation EM algorithm and a constrained iteratively reweighted least
squares scheme built on a dual active-set quadratic program.
"""

__version__ = "0.1.0"

from . import errors
from .bench import (
    BenchGrid,
    BenchRecord,
    ScalingFit,
    fit_scaling,
    mean_times,
    run_grid,
    speedup,
)
from .cirls import WeightMatrix, assemble_qp, compute_weights, fit_cirls
from .cls import fit_cls
from .compositional import (
    CoefficientMatrix,
    CompositionMatrix,
    SolverConfig,
    closure,
    uniform_coefficients,
    validate_composition,
)
from .datagen import ScenarioSpec, generate, sample_dirichlet
from .em import FitResult, LatentAllocation, e_step, fit_em, m_step
from .io import read_composition_csv, write_composition_csv, write_matrix_csv
from .objective import FittedMatrix, fitted, kld, working_loglik
from .qp import (
    QpProblem,
    QpSolution,
    coupled_simplex_constraints,
    kkt_check,
    simplex_constraints,
    solve_qp,
)

__all__ = [
    "BenchGrid",
    "BenchRecord",
    "CoefficientMatrix",
    "CompositionMatrix",
    "FitResult",
    "FittedMatrix",
    "LatentAllocation",
    "QpProblem",
    "QpSolution",
    "ScalingFit",
    "ScenarioSpec",
    "SolverConfig",
    "WeightMatrix",
    "assemble_qp",
    "closure",
    "compute_weights",
    "coupled_simplex_constraints",
    "e_step",
    "errors",
    "fit_cirls",
    "fit_cls",
    "fit_em",
    "fit_scaling",
    "fitted",
    "generate",
    "kkt_check",
    "kld",
    "m_step",
    "mean_times",
    "read_composition_csv",
    "run_grid",
    "sample_dirichlet",
    "simplex_constraints",
    "solve_qp",
    "speedup",
    "uniform_coefficients",
    "validate_composition",
    "working_loglik",
    "write_composition_csv",
    "write_matrix_csv",
]

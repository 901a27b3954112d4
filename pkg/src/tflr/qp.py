"""Dual active-set solver for strictly convex quadratic programs.

Solves  min 0.5 * beta' D beta - d' beta  subject to  A beta >= b,  where the
first ``n_eq`` rows of A hold with equality. Starting from the unconstrained
minimizer, the method adds one violated constraint at a time, taking primal
steps that keep the iterate optimal for the current working set and dual
steps that drop blocking constraints. Because feasibility of the working set
is enforced at every iteration, degenerate solutions on the boundary of the
simplex (coefficients exactly 0 or 1) are handled without special casing.

The quadratic term may declare a block-diagonal structure (``block`` = edge
length of the diagonal blocks); the Cholesky factor is then computed one
block at a time, which is much cheaper than factoring the full matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .errors import Infeasible, IterationLimit, NotPositiveDefinite


@dataclass(frozen=True, eq=False)
class QpProblem:
    """min 0.5 b'Db - d'b  s.t.  A b >= b0, first n_eq rows as equalities."""

    D: np.ndarray
    d: np.ndarray
    A: np.ndarray
    b: np.ndarray
    n_eq: int = 0
    block: int | None = None  # edge length of diagonal blocks of D, if any

    def __post_init__(self):
        D = np.asarray(self.D, dtype=np.float64)
        d = np.asarray(self.d, dtype=np.float64).ravel()
        A = np.atleast_2d(np.asarray(self.A, dtype=np.float64))
        b = np.asarray(self.b, dtype=np.float64).ravel()
        m = D.shape[0]
        if D.shape != (m, m):
            raise ValueError(f"D must be square, got shape {D.shape}")
        scale = max(1.0, float(np.abs(D).max()))
        if np.abs(D - D.T).max() > 1e-10 * scale:
            raise ValueError("D must be symmetric (within 1e-10 relative)")
        if d.shape != (m,):
            raise ValueError(f"d has length {d.shape[0]}, expected {m}")
        if A.shape[1] != m or b.shape[0] != A.shape[0]:
            raise ValueError(
                f"constraint shapes inconsistent: A {A.shape}, b {b.shape}, m={m}"
            )
        if not 0 <= self.n_eq <= A.shape[0]:
            raise ValueError(f"n_eq={self.n_eq} outside [0, {A.shape[0]}]")
        if self.block is not None and (self.block < 1 or m % self.block != 0):
            raise ValueError(f"block={self.block} does not divide m={m}")
        for name, val in (("D", D), ("d", d), ("A", A), ("b", b)):
            object.__setattr__(self, name, val)

    @property
    def n_vars(self) -> int:
        return self.D.shape[0]

    @property
    def n_constraints(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True, eq=False)
class QpSolution:
    beta: np.ndarray
    objective: float
    active_set: list[int]
    iterations: int
    multipliers: np.ndarray = field(repr=False)  # one per constraint row, 0 if inactive


def simplex_constraints(m: int) -> tuple[np.ndarray, np.ndarray, int]:
    """Constraints putting an m-vector on the standard simplex.

    One equality row (coordinates sum to 1) followed by m non-negativity
    rows. Upper bounds beta_j <= 1 are implied by the sum and non-negativity,
    so they are omitted.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    A = np.vstack([np.ones((1, m)), np.eye(m)])
    b = np.zeros(m + 1)
    b[0] = 1.0
    return A, b, 1


def coupled_simplex_constraints(d_p: int, d_r: int) -> tuple[np.ndarray, np.ndarray, int]:
    """Constraints making the column-stacked D_p x D_r matrix row-stochastic.

    The variable vector holds the coefficient matrix one column after
    another (block k contains column k), so the row-sum-equals-1 condition
    for row j selects position j of every block. d_p equality rows come
    first, then d_p * d_r non-negativity rows.
    """
    if d_p < 1 or d_r < 2:
        raise ValueError(f"need d_p >= 1 and d_r >= 2, got ({d_p}, {d_r})")
    m = d_p * d_r
    eq = np.zeros((d_p, m))
    for j in range(d_p):
        eq[j, j::d_p] = 1.0
    A = np.vstack([eq, np.eye(m)])
    b = np.concatenate([np.ones(d_p), np.zeros(m)])
    return A, b, d_p


def _cholesky_lower(D: np.ndarray, block: int | None) -> np.ndarray:
    """Lower-triangular factor of D, per diagonal block when a block size is given."""
    try:
        if block is None or block == D.shape[0]:
            return np.linalg.cholesky(D)
        m = D.shape[0]
        L = np.zeros_like(D)
        for start in range(0, m, block):
            sl = slice(start, start + block)
            L[sl, sl] = np.linalg.cholesky(D[sl, sl])
        return L
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc


class _CycleDetected(Exception):
    pass


def solve_qp(problem: QpProblem) -> QpSolution:
    """Global minimizer of a strictly convex QP under linear constraints.

    Deterministic: ties in constraint selection and in the blocking test go
    to the lowest index. If the same working set is ever revisited (stalling
    from rounding), the quadratic term gets a ridge of 1e-10 * trace(D)/m and
    the solve restarts once.
    """
    L = _cholesky_lower(problem.D, problem.block)
    try:
        return _dual_active_set(problem, problem.D, L)
    except _CycleDetected:
        m = problem.n_vars
        ridge = 1e-10 * float(np.trace(problem.D)) / m
        D = problem.D + ridge * np.eye(m)
        L = _cholesky_lower(D, problem.block)
        try:
            return _dual_active_set(problem, D, L)
        except _CycleDetected as exc:
            raise IterationLimit("working set cycled even after ridge restart") from exc


def _dual_active_set(problem: QpProblem, D: np.ndarray, L: np.ndarray) -> QpSolution:
    A, b, n_eq = problem.A, problem.b, problem.n_eq
    d = problem.d
    n_con = A.shape[0]
    max_steps = 50 * max(n_con, 1)
    feas_tol = 1e-11 * max(1.0, float(np.abs(b).max()) if n_con else 1.0)

    # unconstrained minimizer
    x = solve_triangular(L, d, lower=True, check_finite=False)
    x = solve_triangular(L, x, lower=True, trans="T", check_finite=False)

    active: list[int] = []
    signs: list[float] = []
    eff_rows: list[np.ndarray] = []     # sign * A[i] for active i
    ntilde_cols: list[np.ndarray] = []  # L^-1 (sign * A[i]), cached per active constraint
    u = np.zeros(0)
    in_active = np.zeros(n_con, dtype=bool)
    skipped_eq: set[int] = set()
    seen_sets: set[frozenset] = set()
    steps = 0

    while True:
        s = A @ x - b

        # equalities join the working set first, in index order; afterwards
        # pick the most violated inequality (lowest index on ties)
        p = -1
        sign = 1.0
        for i in range(n_eq):
            if not in_active[i] and i not in skipped_eq:
                p = i
                sign = -1.0 if s[i] > 0 else 1.0
                break
        if p < 0:
            free = np.flatnonzero(~in_active[n_eq:]) + n_eq
            if free.size == 0:
                break
            viol = s[free]
            worst = int(np.argmin(viol))
            if viol[worst] >= -feas_tol:
                break
            p = int(free[worst])

        n_eff = sign * A[p]
        b_eff = sign * b[p]
        ntilde_p = solve_triangular(L, n_eff, lower=True, check_finite=False)
        full_curv = float(ntilde_p @ ntilde_p)
        u_plus = 0.0

        while True:
            steps += 1
            if steps > max_steps:
                raise IterationLimit(f"no convergence in {max_steps} active-set steps")

            q = len(active)
            if q:
                Ntilde = np.column_stack(ntilde_cols)
                Q, R = np.linalg.qr(Ntilde)
                qtn = Q.T @ ntilde_p
                r = solve_triangular(R, qtn, lower=False, check_finite=False)
                Pn = ntilde_p - Q @ qtn
            else:
                r = np.zeros(0)
                Pn = ntilde_p
            curv = float(Pn @ Pn)  # equals n' H n, the reduced curvature along n
            s_p = float(n_eff @ x - b_eff)

            z_nonzero = curv > 1e-12 * max(full_curv, 1e-300)
            t2 = (-s_p / curv) if z_nonzero else np.inf

            t1 = np.inf
            k_drop = -1
            if q:
                r_tol = 1e-11 * max(1.0, float(np.abs(r).max()))
                for j in range(q):
                    if active[j] >= n_eq and r[j] > r_tol:
                        ratio = u[j] / r[j]
                        if ratio < t1:
                            t1, k_drop = ratio, j

            t = min(t1, t2)
            if not np.isfinite(t):
                if p < n_eq and abs(s_p) <= feas_tol:
                    # equality row dependent on the working set but consistent
                    skipped_eq.add(p)
                    break
                raise Infeasible(f"constraint {p} cannot be satisfied")

            if t2 <= t1:
                # full step: p enters the working set
                if z_nonzero and t2 != 0.0:
                    z = solve_triangular(L, Pn, lower=True, trans="T", check_finite=False)
                    x = x + t2 * z
                if q:
                    u = u - t2 * r
                u_plus += t2
                active.append(p)
                signs.append(sign)
                eff_rows.append(n_eff)
                ntilde_cols.append(ntilde_p)
                in_active[p] = True
                u = np.append(u, u_plus)
                key = frozenset(active)
                if key in seen_sets:
                    raise _CycleDetected
                seen_sets.add(key)
                break

            # blocking constraint: partial (possibly pure dual) step, then drop it
            if z_nonzero and t1 != 0.0:
                z = solve_triangular(L, Pn, lower=True, trans="T", check_finite=False)
                x = x + t1 * z
            u = u - t1 * r
            u_plus += t1
            ci = active.pop(k_drop)
            in_active[ci] = False
            signs.pop(k_drop)
            eff_rows.pop(k_drop)
            ntilde_cols.pop(k_drop)
            u = np.delete(u, k_drop)

    multipliers = np.zeros(n_con)
    for j, ci in enumerate(active):
        multipliers[ci] = signs[j] * u[j]
    objective = float(0.5 * x @ (D @ x) - d @ x)
    return QpSolution(
        beta=x,
        objective=objective,
        active_set=sorted(active),
        iterations=steps,
        multipliers=multipliers,
    )


def kkt_check(problem: QpProblem, beta: np.ndarray,
              active_tol: float = 1e-7) -> tuple[float, float]:
    """Recompute the stationarity residual and the smallest inequality multiplier.

    Independent of the solver's bookkeeping: the active set is re-detected
    from the constraint residuals and the multipliers re-estimated by least
    squares. Returns (inf-norm of D beta - d - A' lambda, min lambda over
    active inequalities); the second value is 0.0 when no inequality binds.
    """
    beta = np.asarray(beta, dtype=np.float64).ravel()
    s = problem.A @ beta - problem.b
    act = [i for i in range(problem.n_constraints)
           if i < problem.n_eq or s[i] <= active_tol]
    grad = problem.D @ beta - problem.d
    if not act:
        return float(np.abs(grad).max()), 0.0
    At = problem.A[act].T
    lam, *_ = np.linalg.lstsq(At, grad, rcond=None)
    resid = float(np.abs(grad - At @ lam).max())
    ineq = [lam[j] for j, i in enumerate(act) if i >= problem.n_eq]
    return resid, (float(min(ineq)) if ineq else 0.0)

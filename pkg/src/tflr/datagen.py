"""Dirichlet simulation of independent and dependent regression scenarios.

Draws use the gamma-ratio construction (independent gammas renormalized per
row) so that per-row concentration vectors cost nothing extra. Entries below
1e-300 are flushed to zero before the row is re-closed, keeping denormals out
of downstream arithmetic. All randomness flows from the scenario seed through
named sub-streams, so regenerating with the same seed is bit-identical and
does not depend on how many draws other streams consumed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .compositional import CoefficientMatrix, CompositionMatrix, closure
from .errors import InvalidAlpha, InvalidSpec, ZeroRowSum

_FLUSH = 1e-300

# sub-stream tags appended to the scenario seed
_STREAM_X, _STREAM_Y, _STREAM_B, _STREAM_Y_GIVEN_X = 0, 1, 2, 3


@dataclass(frozen=True)
class ScenarioSpec:
    """One simulation scenario: sizes, dependence kind and concentrations.

    For the dependent kind, a true coefficient matrix is drawn once per seed
    and each response row comes from Dirichlet(phi * x_i B_true), so the
    conditional mean is exactly X B_true and phi controls the noise level.
    """

    n: int
    d_p: int
    d_r: int
    kind: str
    alpha_x: tuple[float, ...] | None = None
    phi: float = 50.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("independent", "dependent"):
            raise InvalidSpec(f"kind must be 'independent' or 'dependent', got {self.kind!r}")
        if self.n < 1 or self.d_p < 2 or self.d_r < 2:
            raise InvalidSpec(
                f"need n >= 1, d_p >= 2, d_r >= 2, got ({self.n}, {self.d_p}, {self.d_r})"
            )
        if not self.phi > 0:
            raise InvalidSpec(f"phi must be positive, got {self.phi}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise InvalidSpec(f"seed must be a non-negative integer, got {self.seed!r}")
        if self.alpha_x is not None:
            alpha = tuple(float(a) for a in self.alpha_x)
            if len(alpha) != self.d_p or any(a <= 0 for a in alpha):
                raise InvalidSpec(f"alpha_x must be {self.d_p} positive reals")
            object.__setattr__(self, "alpha_x", alpha)

    def alpha_x_values(self) -> np.ndarray:
        if self.alpha_x is None:
            return np.ones(self.d_p)
        return np.asarray(self.alpha_x, dtype=np.float64)


def _gamma_rows(rng: np.random.Generator, shapes: np.ndarray) -> np.ndarray:
    """Gamma draws with denormal flushing; rows that flush to all zeros are redrawn."""
    g = rng.standard_gamma(shapes)
    g[g < _FLUSH] = 0.0
    sums = g.sum(axis=1)
    for _ in range(100):
        bad = sums <= 0.0
        if not bad.any():
            return g
        g[bad] = rng.standard_gamma(shapes[bad] if shapes.ndim == 2 else shapes)
        g[g < _FLUSH] = 0.0
        sums = g.sum(axis=1)
    raise ZeroRowSum("gamma draws kept underflowing to all-zero rows")


def sample_dirichlet(alpha, n: int, seed) -> CompositionMatrix:
    """n independent Dirichlet(alpha) rows, deterministic for a given seed."""
    alpha = np.asarray(alpha, dtype=np.float64).ravel()
    if alpha.size < 2 or (alpha <= 0).any() or not np.isfinite(alpha).all():
        raise InvalidAlpha(f"alpha must be >= 2 positive finite reals, got {alpha}")
    if n < 1:
        raise InvalidAlpha(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    g = _gamma_rows(rng, np.broadcast_to(alpha, (n, alpha.size)).copy())
    return closure(np.maximum(g, 0.0))


def generate(spec: ScenarioSpec) -> tuple[CompositionMatrix, CompositionMatrix, CoefficientMatrix | None]:
    """Build (X, Y, B_true) for a scenario; B_true is None for the independent kind."""
    X = sample_dirichlet(spec.alpha_x_values(), spec.n, [spec.seed, _STREAM_X])
    if spec.kind == "independent":
        Y = sample_dirichlet(np.ones(spec.d_r), spec.n, [spec.seed, _STREAM_Y])
        return X, Y, None
    B_draw = sample_dirichlet(np.ones(spec.d_r), spec.d_p, [spec.seed, _STREAM_B])
    B_true = CoefficientMatrix(B_draw.values)
    mean = X.values @ B_true.values
    rng = np.random.default_rng([spec.seed, _STREAM_Y_GIVEN_X])
    g = _gamma_rows(rng, spec.phi * mean)
    Y = closure(np.maximum(g, 0.0))
    return X, Y, B_true

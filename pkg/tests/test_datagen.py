import numpy as np
import pytest

from tflr import (
    SolverConfig,
    ScenarioSpec,
    fit_cirls,
    generate,
    kld,
    sample_dirichlet,
    validate_composition,
)
from tflr.errors import InvalidAlpha, InvalidSpec


class TestScenarioSpec:
    def test_defaults(self):
        spec = ScenarioSpec(n=10, d_p=3, d_r=3, kind="independent", seed=1)
        assert spec.phi == 50.0
        assert np.array_equal(spec.alpha_x_values(), np.ones(3))

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"n": 0},
            {"d_p": 1},
            {"d_r": 1},
            {"kind": "weird"},
            {"phi": 0.0},
            {"seed": -1},
            {"alpha_x": (1.0, 1.0)},          # wrong length for d_p=3
            {"alpha_x": (1.0, -1.0, 1.0)},    # non-positive
        ],
    )
    def test_rejects_invalid(self, kwargs):
        base = dict(n=10, d_p=3, d_r=3, kind="independent", seed=1)
        base.update(kwargs)
        with pytest.raises(InvalidSpec):
            ScenarioSpec(**base)


class TestSampleDirichlet:
    def test_mean_two_components(self):
        m = sample_dirichlet([1.0, 1.0], 10_000, 1).values
        assert np.abs(m.mean(axis=0) - 0.5).max() <= 0.015

    def test_mean_three_components(self):
        m = sample_dirichlet([2.0, 2.0, 2.0], 10_000, 2).values
        assert np.abs(m.mean(axis=0) - 1.0 / 3).max() <= 0.015

    def test_deterministic(self):
        a = sample_dirichlet([1.0, 2.0, 0.5], 50, 123).values
        b = sample_dirichlet([1.0, 2.0, 0.5], 50, 123).values
        assert np.array_equal(a, b)

    def test_rows_validate(self):
        m = sample_dirichlet([0.3, 0.7, 1.5], 200, 7)
        validate_composition(m.values, tol=1e-8)

    def test_invalid_alpha(self):
        with pytest.raises(InvalidAlpha):
            sample_dirichlet([1.0, 0.0], 5, 1)
        with pytest.raises(InvalidAlpha):
            sample_dirichlet([1.0], 5, 1)


class TestGenerate:
    def test_independent_shapes(self):
        X, Y, B = generate(ScenarioSpec(n=100, d_p=5, d_r=3, kind="independent", seed=3))
        assert X.values.shape == (100, 5)
        assert Y.values.shape == (100, 3)
        assert B is None
        validate_composition(X.values)
        validate_composition(Y.values)

    def test_dependent_returns_true_coefficients(self):
        X, Y, B = generate(ScenarioSpec(n=100, d_p=4, d_r=3, kind="dependent", seed=4))
        assert B is not None
        assert B.values.shape == (4, 3)
        assert np.abs(B.values.sum(axis=1) - 1.0).max() <= 1e-12

    def test_deterministic(self):
        spec = ScenarioSpec(n=60, d_p=3, d_r=4, kind="dependent", seed=99)
        X1, Y1, B1 = generate(spec)
        X2, Y2, B2 = generate(spec)
        assert np.array_equal(X1.values, X2.values)
        assert np.array_equal(Y1.values, Y2.values)
        assert np.array_equal(B1.values, B2.values)

    def test_high_phi_concentrates_on_mean(self):
        spec = ScenarioSpec(n=200, d_p=4, d_r=3, kind="dependent", phi=1e6, seed=5)
        X, Y, B = generate(spec)
        assert kld(Y.values, X.values @ B.values, 1e-8) < 0.01

    def test_fit_recovers_signal_with_growing_n(self):
        # per-row divergence between fitted values at the estimate and at the
        # truth must decrease as n grows (consistency trend)
        gaps = []
        for n in (500, 2000, 8000):
            spec = ScenarioSpec(n=n, d_p=5, d_r=3, kind="dependent", seed=6)
            X, Y, B_true = generate(spec)
            B_hat = fit_cirls(X, Y).B
            gap = kld(X.values @ B_hat.values, X.values @ B_true.values, 1e-12) / n
            gaps.append(gap)
        assert gaps[0] > gaps[1] > gaps[2]

    def test_independent_fit_approaches_response_mean(self):
        spec = ScenarioSpec(n=10_000, d_p=5, d_r=3, kind="independent", seed=8)
        X, Y, _ = generate(spec)
        res = fit_cirls(X, Y)
        fitted_mean = (X.values @ res.B.values).mean(axis=0)
        assert np.abs(fitted_mean - Y.values.mean(axis=0)).max() <= 0.02

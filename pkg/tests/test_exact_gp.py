"""Tests for the exact GP predictive, evidence, and hyperparameter fitting."""

import math

import numpy as np
import pytest

from osgpcp.exact_gp import (
    SearchConfig,
    TrainingBuffer,
    candidate_grid,
    fit_hyperparams,
    gp_predict,
    log_marginal_likelihood,
)
from osgpcp.kernels import KernelHyperparams, rbf_eval
from osgpcp.stream import gen_iid

EMPTY = TrainingBuffer(inputs=np.empty((0, 1)), targets=np.empty(0))


def dense_gp_predict(buffer, params, x):
    """Independent re-implementation: explicit Gram inversion, no Cholesky."""
    t = len(buffer)
    K = np.array([[rbf_eval(a, b, params) for b in buffer.inputs] for a in buffer.inputs])
    A_inv = np.linalg.inv(K + params.sigma_n2 * np.eye(t))
    k = np.array([rbf_eval(a, x, params) for a in buffer.inputs])
    mean = k @ A_inv @ buffer.targets
    var = params.sigma_theta2 - k @ A_inv @ k + params.sigma_n2
    return mean, var


def _buffer(rng, t, d=1, noise=0.1):
    X = rng.uniform(0, 10, (t, d))
    y = np.sin(X[:, 0]) + noise * rng.standard_normal(t)
    return TrainingBuffer(inputs=X, targets=y)


class TestGpPredict:
    def test_empty_buffer_prior(self):
        params = KernelHyperparams(2.0, 1.0, 0.5)
        pred = gp_predict(EMPTY, params, [3.0])
        assert pred.mean == 0.0
        assert pred.variance == pytest.approx(2.5, abs=0.0)

    def test_single_point_closed_form(self):
        # t=1, x = x1, sigma_theta2 = sigma_n2 = 1, y = 2:
        # mean = 1 * (1 + 1)^-1 * 2 = 1, var = 1 - 1/2 + 1 = 1.5
        params = KernelHyperparams(1.0, 1.0, 1.0)
        buf = TrainingBuffer(inputs=np.array([[0.3]]), targets=np.array([2.0]))
        pred = gp_predict(buf, params, [0.3])
        # tolerance reflects the 1e-10 * sigma_theta2 stabilizing jitter
        assert pred.mean == pytest.approx(1.0, abs=1e-9)
        assert pred.variance == pytest.approx(1.5, abs=1e-9)

    def test_far_input_reverts_to_prior(self):
        params = KernelHyperparams(1.5, 1.0, 0.25)
        buf = TrainingBuffer(inputs=np.array([[0.0], [1.0]]), targets=np.array([5.0, -5.0]))
        pred = gp_predict(buf, params, [1e4])
        assert pred.mean == pytest.approx(0.0, abs=1e-10)
        assert pred.variance == pytest.approx(params.sigma_theta2 + params.sigma_n2, rel=1e-10)

    def test_matches_dense_inverse_oracle(self):
        rng = np.random.default_rng(7)
        params = KernelHyperparams(1.2, 2.0, 0.04)
        for t in (1, 5, 20):
            buf = _buffer(rng, t)
            for _ in range(5):
                x = rng.uniform(0, 10, 1)
                pred = gp_predict(buf, params, x)
                mean, var = dense_gp_predict(buf, params, x)
                assert pred.mean == pytest.approx(mean, abs=1e-8)
                assert pred.variance == pytest.approx(var, abs=1e-8)

    def test_variance_bounds(self):
        rng = np.random.default_rng(8)
        params = KernelHyperparams(1.0, 0.5, 0.01)
        buf = _buffer(rng, 30)
        for _ in range(30):
            pred = gp_predict(buf, params, rng.uniform(-2, 12, 1))
            assert params.sigma_n2 <= pred.variance <= params.sigma_theta2 + params.sigma_n2

    def test_conditioning_never_inflates_variance(self):
        rng = np.random.default_rng(9)
        params = KernelHyperparams(1.0, 1.0, 0.05)
        buf = _buffer(rng, 12)
        x = rng.uniform(0, 10, 1)
        before = gp_predict(buf, params, x)
        grown = TrainingBuffer(
            inputs=np.vstack([buf.inputs, x[None, :]]),
            targets=np.append(buf.targets, before.mean),
        )
        after = gp_predict(grown, params, x)
        assert after.variance <= before.variance + 1e-12

    def test_dimension_mismatch(self):
        buf = TrainingBuffer(inputs=np.zeros((2, 2)), targets=np.zeros(2))
        with pytest.raises(ValueError):
            gp_predict(buf, KernelHyperparams(1, 1, 1), [0.0])

    def test_length_mismatch_in_buffer(self):
        with pytest.raises(ValueError):
            TrainingBuffer(inputs=np.zeros((3, 1)), targets=np.zeros(2))


class TestLogMarginalLikelihood:
    def test_empty_buffer_is_zero(self):
        assert log_marginal_likelihood(EMPTY, KernelHyperparams(1, 1, 1)) == 0.0

    def test_scalar_evidence_zero_target(self):
        # kappa(x,x) + sigma_n2 = 2, y = 0: -log(2)/2 - log(2 pi)/2
        params = KernelHyperparams(1.0, 1.0, 1.0)
        buf = TrainingBuffer(inputs=np.array([[0.0]]), targets=np.array([0.0]))
        expected = -0.5 * math.log(2.0) - 0.5 * math.log(2.0 * math.pi)
        assert log_marginal_likelihood(buf, params) == pytest.approx(expected, abs=1e-10)
        assert expected == pytest.approx(-1.26552, abs=1e-5)

    def test_scalar_evidence_unit_target(self):
        params = KernelHyperparams(1.0, 1.0, 1.0)
        buf = TrainingBuffer(inputs=np.array([[0.0]]), targets=np.array([1.0]))
        expected = -0.25 - 0.5 * math.log(2.0) - 0.5 * math.log(2.0 * math.pi)
        assert log_marginal_likelihood(buf, params) == pytest.approx(expected, abs=1e-10)
        assert expected == pytest.approx(-1.51552, abs=1e-5)


class TestFitHyperparams:
    def test_empty_buffer_rejected(self):
        with pytest.raises(ValueError):
            fit_hyperparams(EMPTY)

    def test_result_positive_and_beats_grid(self):
        rng = np.random.default_rng(10)
        buf = _buffer(rng, 40)
        search = SearchConfig(grid_points=5, log_span=2.0, refine_iters=2)
        fitted = fit_hyperparams(buf, search)
        assert fitted.sigma_theta2 > 0 and fitted.sigma_l2 > 0 and fitted.sigma_n2 > 0
        best_lml = log_marginal_likelihood(buf, fitted)
        for cand in candidate_grid(buf, search):
            try:
                lml = log_marginal_likelihood(buf, cand)
            except np.linalg.LinAlgError:
                continue
            assert best_lml >= lml - 1e-9

    def test_recovers_noise_scale_on_sin_stream(self):
        recs = gen_iid(10000, seed=2)[:100]
        buf = TrainingBuffer(
            inputs=np.stack([r.x for r in recs]),
            targets=np.array([r.y for r in recs]),
        )
        fitted = fit_hyperparams(buf)
        assert 0.033 <= math.sqrt(fitted.sigma_n2) <= 0.3

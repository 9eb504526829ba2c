"""Exact (cubic-cost) GP predictive and evidence-based hyperparameter fitting.

This is the small-scale reference model: it is used to fit hyperparameters
on the warm-up prefix of a stream (after which they are frozen for the whole
run) and as an oracle against which the random feature approximation is
checked.  It is never run inside the online loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .kernels import KernelHyperparams
from .osgp import PredictiveGaussian

# Jitter ladder: start at 1e-10 * sigma_theta2, escalate x10 up to 1e-6.
_JITTER_START = 1e-10
_JITTER_MAX = 1e-6


@dataclass(frozen=True)
class TrainingBuffer:
    """An in-memory batch of t training pairs; inputs shape (t, d)."""

    inputs: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        inputs = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        targets = np.asarray(self.targets, dtype=float).ravel()
        if inputs.size == 0:
            inputs = inputs.reshape(0, max(1, inputs.shape[-1] if inputs.ndim else 1))
        if inputs.shape[0] != targets.shape[0]:
            raise ValueError(f"{inputs.shape[0]} inputs but {targets.shape[0]} targets")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)

    def __len__(self) -> int:
        return self.targets.shape[0]


@dataclass(frozen=True)
class SearchConfig:
    """Grid-plus-refinement settings for evidence maximization.

    The grid places ``grid_points`` log-spaced multipliers spanning
    ``10**(-log_span) .. 10**(+log_span)`` around a data-scale heuristic for
    each axis.  The refinement pass then hill-climbs each axis in log space,
    halving the step each iteration.
    """

    grid_points: int = 7
    log_span: float = 3.0
    refine_iters: int = 8


def _sq_dists(X: np.ndarray, Z: np.ndarray) -> np.ndarray:
    d2 = np.sum(X**2, axis=1)[:, None] + np.sum(Z**2, axis=1)[None, :] - 2.0 * X @ Z.T
    return np.maximum(d2, 0.0)


def _gram(X: np.ndarray, params: KernelHyperparams) -> np.ndarray:
    return params.sigma_theta2 * np.exp(-_sq_dists(X, X) / params.sigma_l2)


def _chol_with_jitter(A: np.ndarray, scale: float):
    """Cholesky of A + jitter*I, escalating jitter; raises LinAlgError if all fail."""
    jitter = _JITTER_START
    while True:
        try:
            return cho_factor(A + (jitter * scale) * np.eye(A.shape[0]), lower=True)
        except np.linalg.LinAlgError:
            if jitter >= _JITTER_MAX:
                raise np.linalg.LinAlgError(
                    f"Gram matrix not positive definite even with jitter {jitter * scale:g}"
                )
            jitter *= 10.0


def gp_predict(buffer: TrainingBuffer, params: KernelHyperparams, x) -> PredictiveGaussian:
    """Exact GP predictive mean and variance at a test input.

    mean = k^T (K + sigma_n2 I)^{-1} y
    var  = kappa(x, x) - k^T (K + sigma_n2 I)^{-1} k + sigma_n2

    An empty buffer returns the prior predictive (0, sigma_theta2 + sigma_n2).
    The variance is clamped into [sigma_n2, sigma_theta2 + sigma_n2], the
    range it occupies in exact arithmetic.
    """
    prior_var = params.sigma_theta2 + params.sigma_n2
    if len(buffer) == 0:
        return PredictiveGaussian(mean=0.0, variance=prior_var)
    x = np.asarray(x, dtype=float).ravel()
    if x.size != buffer.inputs.shape[1]:
        raise ValueError(f"test input dimension {x.size} does not match buffer dimension {buffer.inputs.shape[1]}")
    K = _gram(buffer.inputs, params) + params.sigma_n2 * np.eye(len(buffer))
    k = params.sigma_theta2 * np.exp(-_sq_dists(buffer.inputs, x[None, :]) / params.sigma_l2).ravel()
    factor = _chol_with_jitter(K, params.sigma_theta2)
    alpha = cho_solve(factor, buffer.targets)
    v = cho_solve(factor, k)
    mean = float(k @ alpha)
    var = params.sigma_theta2 - float(k @ v) + params.sigma_n2
    var = min(max(var, params.sigma_n2), prior_var)
    return PredictiveGaussian(mean=mean, variance=var)


def log_marginal_likelihood(buffer: TrainingBuffer, params: KernelHyperparams) -> float:
    """Gaussian evidence log p(y | X, params); an empty buffer gives 0."""
    t = len(buffer)
    if t == 0:
        return 0.0
    K = _gram(buffer.inputs, params) + params.sigma_n2 * np.eye(t)
    factor = _chol_with_jitter(K, params.sigma_theta2)
    alpha = cho_solve(factor, buffer.targets)
    log_det_half = float(np.sum(np.log(np.diag(factor[0]))))
    return -0.5 * float(buffer.targets @ alpha) - log_det_half - 0.5 * t * math.log(2.0 * math.pi)


def _axis_scales(buffer: TrainingBuffer) -> tuple[float, float, float]:
    """Data-scale heuristics for (sigma_theta2, sigma_l2, sigma_n2) grids."""
    y_var = float(np.var(buffer.targets))
    if not (math.isfinite(y_var) and y_var > 0.0):
        y_var = 1.0
    X = buffer.inputs
    if len(buffer) > 1:
        d2 = _sq_dists(X, X)
        med = float(np.median(d2[np.triu_indices(len(buffer), k=1)]))
    else:
        med = 0.0
    l_scale = med if med > 0.0 else 1.0
    return y_var, l_scale, y_var


def candidate_grid(buffer: TrainingBuffer, search: SearchConfig) -> list[KernelHyperparams]:
    """The deterministic evidence grid the fit evaluates before refining."""
    s_theta, s_l, s_n = _axis_scales(buffer)
    mults = np.logspace(-search.log_span, search.log_span, search.grid_points)
    grid = []
    for mt in mults:
        for ml in mults:
            for mn in mults:
                grid.append(KernelHyperparams(s_theta * mt, s_l * ml, s_n * mn))
    return grid


def _safe_lml(buffer: TrainingBuffer, params: KernelHyperparams) -> float:
    try:
        return log_marginal_likelihood(buffer, params)
    except np.linalg.LinAlgError:
        return -math.inf


def fit_hyperparams(buffer: TrainingBuffer, search: SearchConfig | None = None) -> KernelHyperparams:
    """Maximize the evidence over a log-space grid, then refine coordinatewise.

    Derivative-free and fully deterministic: a coarse grid pick (candidates
    that fail to factorize score -inf) followed by ``refine_iters`` rounds of
    per-axis hill climbing with a log-step that starts at the grid spacing
    and halves each round.

    Raises
    ------
    ValueError
        If the buffer is empty.
    """
    if len(buffer) == 0:
        raise ValueError("cannot fit hyperparameters on an empty buffer")
    search = search or SearchConfig()

    best: KernelHyperparams | None = None
    best_lml = -math.inf
    for cand in candidate_grid(buffer, search):
        lml = _safe_lml(buffer, cand)
        if lml > best_lml:
            best, best_lml = cand, lml
    if best is None:
        raise np.linalg.LinAlgError("no hyperparameter candidate produced a positive definite Gram matrix")

    grid_step = 2.0 * search.log_span / max(search.grid_points - 1, 1)
    step = grid_step / 2.0
    fields = ("sigma_theta2", "sigma_l2", "sigma_n2")
    for _ in range(search.refine_iters):
        for name in fields:
            moved = True
            while moved:
                moved = False
                current = getattr(best, name)
                for factor in (10.0**step, 10.0**-step):
                    values = {f: getattr(best, f) for f in fields}
                    values[name] = current * factor
                    cand = KernelHyperparams(**values)
                    lml = _safe_lml(buffer, cand)
                    if lml > best_lml:
                        best, best_lml = cand, lml
                        moved = True
        step /= 2.0
    return best

"""Online scalable GP: recursive Gaussian posterior over the feature weights.

The random feature map turns the GP into the linear model
``y = phi(x) . theta + noise`` with prior ``theta ~ N(0, sigma_theta2 * I)``,
so the posterior stays Gaussian and is propagated slot by slot:

    mean:       y_hat = phi . theta_hat
    variance:   s2    = phi . Sigma . phi + sigma_n2
    theta_hat <- theta_hat + Sigma phi (y - y_hat) / s2
    Sigma     <- Sigma - (Sigma phi)(Sigma phi)^T / s2

Per-slot cost is O((2D)^2), independent of how many observations have been
absorbed; the state never stores data.  All operations are pure: ``update``
returns a fresh state and never mutates its argument.  The arithmetic runs
on the backend selected in :mod:`osgpcp.backends`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backends
from .kernels import KernelHyperparams

_VAR_FLOOR = 1.0 + 1e-12


@dataclass(frozen=True)
class PredictiveGaussian:
    """One-slot predictive distribution N(mean, variance), variance > sigma_n2."""

    mean: float
    variance: float


@dataclass(frozen=True)
class PosteriorState:
    """Gaussian posterior over the 2D feature weights after t observations."""

    theta_hat: np.ndarray
    sigma: np.ndarray
    t: int

    @property
    def dim(self) -> int:
        return self.theta_hat.shape[0]

    @property
    def num_features(self) -> int:
        return self.dim // 2


def init_state(params: KernelHyperparams, D: int) -> PosteriorState:
    """Prior state: zero mean, isotropic covariance sigma_theta2 * I_{2D}."""
    if D < 1:
        raise ValueError(f"D must be >= 1, got {D}")
    n = 2 * D
    return PosteriorState(
        theta_hat=np.zeros(n),
        sigma=params.sigma_theta2 * np.eye(n),
        t=0,
    )


def _check_phi(state: PosteriorState, phi) -> np.ndarray:
    phi = np.ascontiguousarray(phi, dtype=float)
    if phi.ndim != 1 or phi.shape[0] != state.dim:
        raise ValueError(f"feature vector length {phi.shape} does not match state dimension {state.dim}")
    return phi


def predict(state: PosteriorState, phi, sigma_n2: float) -> PredictiveGaussian:
    """Predictive Gaussian at a feature vector: (phi.theta_hat, phi.Sigma.phi + sigma_n2).

    The variance is clamped to sigma_n2 * (1 + 1e-12) if round-off ever
    drives it to sigma_n2 or below, keeping downstream scores finite.
    """
    phi = _check_phi(state, phi)
    mean, var = backends.active().predict(state.theta_hat, state.sigma, phi, sigma_n2)
    if var <= sigma_n2:
        var = sigma_n2 * _VAR_FLOOR
    return PredictiveGaussian(mean=mean, variance=var)


def update(state: PosteriorState, phi, y: float, sigma_n2: float) -> PosteriorState:
    """Absorb one observation (phi, y) and return the next posterior state."""
    phi = _check_phi(state, phi)
    y = float(y)
    if not math.isfinite(y):
        raise ValueError(f"target must be finite, got {y!r}")
    theta_new, sigma_new = backends.active().update(state.theta_hat, state.sigma, phi, y, sigma_n2)
    return PosteriorState(theta_hat=theta_new, sigma=sigma_new, t=state.t + 1)


def save_state(state: PosteriorState, path, seed: int | None = None) -> None:
    """Checkpoint (theta_hat, Sigma, t, D, seed) so a long stream can resume."""
    np.savez(
        path,
        theta_hat=state.theta_hat,
        sigma=state.sigma,
        t=state.t,
        num_features=state.num_features,
        seed=-1 if seed is None else int(seed),
    )


def load_state(path) -> tuple[PosteriorState, int | None]:
    """Load a checkpoint written by :func:`save_state`; returns (state, seed)."""
    with np.load(path) as data:
        state = PosteriorState(
            theta_hat=np.ascontiguousarray(data["theta_hat"], dtype=float),
            sigma=np.ascontiguousarray(data["sigma"], dtype=float),
            t=int(data["t"]),
        )
        seed = int(data["seed"])
    return state, (None if seed < 0 else seed)

"""RBF kernel, spectral frequency sampling, and the random feature map.

The kernel convention used throughout is

    kappa(x, x') = sigma_theta2 * exp(-||x - x'||^2 / sigma_l2)

i.e. the squared lengthscale divides the squared distance directly, with no
factor of 1/2 in the exponent.  Libraries that use the ``exp(-r^2 / (2 l^2))``
convention must map ``l^2 = sigma_l2 / 2`` when comparing.

The normalized kernel ``exp(-r^2 / sigma_l2)`` is the characteristic function
of a Gaussian, so its spectral density is ``N(0, (2 / sigma_l2) * I_d)``:
matching ``E[exp(j v.r)] = exp(-r.Sigma.r / 2)`` against the kernel forces
``Sigma = (2 / sigma_l2) I``.  Frequencies are sampled from that density and
combined into the interleaved sin/cos feature map

    phi(x) = (1/sqrt(D)) [sin(v_1.x), cos(v_1.x), ..., sin(v_D.x), cos(v_D.x)]

whose inner products approximate the normalized kernel:
``phi(x).phi(x') ~= exp(-||x - x'||^2 / sigma_l2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .rng import make_rng, standard_normals


@dataclass(frozen=True)
class KernelHyperparams:
    """RBF kernel hyperparameters: magnitude, squared lengthscale, noise variance.

    All three must be strictly positive and finite.
    """

    sigma_theta2: float
    sigma_l2: float
    sigma_n2: float

    def __post_init__(self):
        for name in ("sigma_theta2", "sigma_l2", "sigma_n2"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"{name} must be strictly positive and finite, got {value!r}")


@dataclass(frozen=True)
class RFMap:
    """Sampled spectral frequencies defining one random feature map.

    ``frequencies`` has shape (num_features, input_dim); row i is the sampled
    frequency v_i.  Regenerating with the same (hyperparams, D, seed) yields
    an identical matrix.
    """

    frequencies: np.ndarray
    num_features: int
    seed: int

    @property
    def input_dim(self) -> int:
        return self.frequencies.shape[1]


def rbf_eval(x, x_prime, params: KernelHyperparams) -> float:
    """Evaluate kappa(x, x') = sigma_theta2 * exp(-||x - x'||^2 / sigma_l2).

    Parameters
    ----------
    x, x_prime : array-like
        Input vectors of equal dimension d >= 1.
    params : KernelHyperparams
        Kernel hyperparameters.

    Returns
    -------
    float
        Kernel value in (0, sigma_theta2].
    """
    x = np.asarray(x, dtype=float).ravel()
    x_prime = np.asarray(x_prime, dtype=float).ravel()
    if x.shape != x_prime.shape or x.size < 1:
        raise ValueError(f"input dimensions differ: {x.shape} vs {x_prime.shape}")
    sq_dist = float(np.sum((x - x_prime) ** 2))
    return params.sigma_theta2 * math.exp(-sq_dist / params.sigma_l2)


def sample_frequencies(params: KernelHyperparams, D: int, seed: int, input_dim: int = 1) -> RFMap:
    """Sample D spectral frequencies of the normalized RBF kernel.

    Each row is drawn i.i.d. from N(0, (2 / sigma_l2) * I_d) using the
    package's documented inverse-CDF normal transform, so the result is a
    pure function of (params, D, seed).

    Parameters
    ----------
    params : KernelHyperparams
        Kernel hyperparameters; only ``sigma_l2`` matters here.
    D : int
        Number of spectral features, >= 1.
    seed : int
        Seed for the frequency stream (independent of any data stream).
    input_dim : int
        Dimension d of the inputs the map will be applied to.

    Returns
    -------
    RFMap
    """
    if D < 1:
        raise ValueError(f"D must be >= 1, got {D}")
    if input_dim < 1:
        raise ValueError(f"input_dim must be >= 1, got {input_dim}")
    rng = make_rng(seed)
    scale = math.sqrt(2.0 / params.sigma_l2)
    freqs = scale * standard_normals(rng, (D, input_dim))
    return RFMap(frequencies=freqs, num_features=D, seed=int(seed))


def feature_map(x, rf_map: RFMap) -> np.ndarray:
    """Map an input to its 2D-dimensional random feature vector.

    Entries are interleaved as (sin(v_1.x), cos(v_1.x), sin(v_2.x), ...)
    scaled by 1/sqrt(D), so the squared norm is exactly 1 for every input.

    Parameters
    ----------
    x : array-like
        Input vector whose dimension matches ``rf_map.input_dim``.
    rf_map : RFMap
        Sampled frequencies.

    Returns
    -------
    numpy.ndarray of shape (2 * D,)
    """
    x = np.asarray(x, dtype=float).ravel()
    if x.size != rf_map.input_dim:
        raise ValueError(f"input dimension {x.size} does not match feature map dimension {rf_map.input_dim}")
    z = rf_map.frequencies @ x
    out = np.empty(2 * rf_map.num_features)
    scale = 1.0 / math.sqrt(rf_map.num_features)
    out[0::2] = np.sin(z) * scale
    out[1::2] = np.cos(z) * scale
    return out


def save_rfmap(rf_map: RFMap, path) -> None:
    """Write an RFMap to a CSV sidecar: one header line ``D,d,seed`` then the
    frequency matrix row-major, full float precision."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(f"{rf_map.num_features},{rf_map.input_dim},{rf_map.seed}\n")
        for row in rf_map.frequencies:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def load_rfmap(path) -> RFMap:
    """Read an RFMap written by :func:`save_rfmap`."""
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if len(header) != 3:
            raise ValueError(f"malformed RFMap header in {path}")
        D, d, seed = (int(v) for v in header)
        freqs = np.array([[float(v) for v in line.strip().split(",")] for line in fh if line.strip()])
    if freqs.shape != (D, d):
        raise ValueError(f"RFMap body shape {freqs.shape} does not match header ({D}, {d})")
    return RFMap(frequencies=freqs, num_features=D, seed=seed)

"""Selectable compute backends for the per-slot posterior recursion.

The Gaussian posterior update is the hot loop of every experiment: each of
the ~10^4 stream slots touches the full (2D x 2D) covariance.  Two
implementations of the same two kernels are provided:

* ``"compiled"`` -- Cython extension ``osgpcp._core`` built on BLAS
  (dsymv/dsyr), keeping the covariance exactly symmetric by updating one
  triangle and mirroring it.
* ``"python"``   -- plain numpy fallback, always available.

The compiled backend is selected at import when the extension built; set
``OSGPCP_BACKEND=python`` (or ``compiled``) to force one, or call
:func:`use` at runtime.  Both backends implement identical formulas; see
``benchmarks/backend_bench.py`` for a speed comparison.
"""

from __future__ import annotations

import os

import numpy as np

_VAR_FLOOR = 1.0 + 1e-12  # clamp factor when round-off drives variance <= sigma_n2


def _predict_py(theta, sigma, phi, sigma_n2):
    w = sigma @ phi
    return float(theta @ phi), float(phi @ w + sigma_n2)


def _update_py(theta, sigma, phi, y, sigma_n2):
    w = sigma @ phi
    s2 = float(phi @ w + sigma_n2)
    if s2 <= sigma_n2:
        s2 = sigma_n2 * _VAR_FLOOR
    theta_new = theta + (y - float(theta @ phi)) / s2 * w
    sigma_new = sigma - np.outer(w, w) / s2
    sigma_new = (sigma_new + sigma_new.T) / 2.0
    return theta_new, sigma_new


class _PythonBackend:
    name = "python"
    predict = staticmethod(_predict_py)
    update = staticmethod(_update_py)


try:
    from . import _core as _compiled
except ImportError:
    _compiled = None


class _CompiledBackend:
    name = "compiled"

    @staticmethod
    def predict(theta, sigma, phi, sigma_n2):
        return _compiled.predict(theta, sigma, phi, sigma_n2)

    @staticmethod
    def update(theta, sigma, phi, y, sigma_n2):
        return _compiled.update(theta, sigma, phi, y, sigma_n2)


_BACKENDS = {"python": _PythonBackend}
if _compiled is not None:
    _BACKENDS["compiled"] = _CompiledBackend


def available() -> tuple[str, ...]:
    """Names of the backends importable in this environment."""
    return tuple(sorted(_BACKENDS))


def use(name: str):
    """Select the active backend by name; returns the backend object."""
    global _active
    try:
        _active = _BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown backend {name!r}; available: {available()}") from None
    return _active


def active():
    """The currently selected backend object (has .name, .predict, .update)."""
    return _active


_env = os.environ.get("OSGPCP_BACKEND", "").strip().lower()
if _env:
    _active = use(_env)
else:
    _active = _BACKENDS.get("compiled", _PythonBackend)

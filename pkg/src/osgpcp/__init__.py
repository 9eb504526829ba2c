"""Online scalable Gaussian process regression with conformal prediction.

A streaming regression library producing prediction intervals whose
coverage is adaptively tuned online, robust to model mis-specification and
distribution shift.  The GP is made scalable through random spectral
features (a linear parametric model with a recursive Gaussian posterior,
constant cost per slot) and wrapped with conformal prediction whose
threshold is adjusted from coverage feedback.
"""

from . import backends, bench, conformal, exact_gp, kernels, osgp, stream

__version__ = "0.1.0"

__all__ = ["backends", "bench", "conformal", "exact_gp", "kernels", "osgp", "stream", "__version__"]

# cython: boundscheck=False, wraparound=False, cdivision=True
"""BLAS-backed kernels for the Gaussian posterior recursion.

Same contracts as the numpy fallback in ``osgpcp.backends``: ``predict``
returns the raw predictive (mean, variance) and ``update`` returns fresh
(theta, sigma) arrays for one observation.  The covariance is C-contiguous
and symmetric, so it can be handed to Fortran-order BLAS directly; the
rank-1 downdate touches one triangle via ``dsyr`` and is mirrored, keeping
the stored matrix exactly symmetric.
"""

import numpy as np

from scipy.linalg.cython_blas cimport daxpy, dcopy, ddot, dsymv, dsyr

DEF VAR_FLOOR = 1e-12


def predict(double[::1] theta, double[:, ::1] sigma, double[::1] phi, double sigma_n2):
    cdef int n = theta.shape[0]
    cdef int inc = 1
    cdef double one = 1.0, zero = 0.0
    cdef double[::1] w = np.empty(n)
    dsymv("L", &n, &one, &sigma[0, 0], &n, &phi[0], &inc, &zero, &w[0], &inc)
    cdef double mean = ddot(&n, &theta[0], &inc, &phi[0], &inc)
    cdef double var = ddot(&n, &phi[0], &inc, &w[0], &inc) + sigma_n2
    return mean, var


def update(double[::1] theta, double[:, ::1] sigma, double[::1] phi, double y, double sigma_n2):
    cdef int n = theta.shape[0]
    cdef int nn = n * n
    cdef int inc = 1
    cdef double one = 1.0, zero = 0.0
    cdef double s2, gain, neg_inv_s2
    cdef Py_ssize_t i, j

    theta_out_arr = np.empty(n)
    sigma_out_arr = np.empty((n, n))
    cdef double[::1] theta_out = theta_out_arr
    cdef double[:, ::1] sigma_out = sigma_out_arr
    cdef double[::1] w = np.empty(n)

    dsymv("L", &n, &one, &sigma[0, 0], &n, &phi[0], &inc, &zero, &w[0], &inc)
    s2 = ddot(&n, &phi[0], &inc, &w[0], &inc) + sigma_n2
    if s2 <= sigma_n2:
        s2 = sigma_n2 * (1.0 + VAR_FLOOR)

    gain = (y - ddot(&n, &theta[0], &inc, &phi[0], &inc)) / s2
    dcopy(&n, &theta[0], &inc, &theta_out[0], &inc)
    daxpy(&n, &gain, &w[0], &inc, &theta_out[0], &inc)

    dcopy(&nn, &sigma[0, 0], &inc, &sigma_out[0, 0], &inc)
    neg_inv_s2 = -1.0 / s2
    # Fortran-lower triangle of the C-order buffer is its upper triangle.
    dsyr("L", &n, &neg_inv_s2, &w[0], &inc, &sigma_out[0, 0], &n)
    for i in range(n):
        for j in range(i):
            sigma_out[i, j] = sigma_out[j, i]

    return theta_out_arr, sigma_out_arr

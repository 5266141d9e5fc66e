# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: quadrature sums and the Nystrom operator apply.

Must match _pykernels.py exactly; the Python versions are the fallback
when this extension is unavailable.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt, tanh

cnp.import_array()

DEF TANH_CLAMP = 20.0


cdef inline double _ratio(double xi, double y, double t) noexcept nogil:
    cdef double s = sqrt(xi * xi + y)
    cdef double z
    if t == 0.0:
        return 1.0 / s
    z = s / (2.0 * t)
    if z > TANH_CLAMP:
        return 1.0 / s
    return tanh(z) / s


cdef inline double _phi(double xi, double u, double t) noexcept nogil:
    cdef double s = sqrt(xi * xi + u * u)
    cdef double z
    if t == 0.0:
        return u / s
    z = s / (2.0 * t)
    if z > TANH_CLAMP:
        return u / s
    return u * tanh(z) / s


def ratio_values(cnp.ndarray nodes_in, double y, double t):
    cdef const double[::1] nodes = np.ascontiguousarray(nodes_in, dtype=np.float64)
    cdef Py_ssize_t n = nodes.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t j
    with nogil:
        for j in range(n):
            out[j] = _ratio(nodes[j], y, t)
    return out_arr


def weighted_sum(nodes_in, weights_in, wvals_in, double y, double t):
    cdef const double[::1] nodes = np.ascontiguousarray(nodes_in, dtype=np.float64)
    cdef const double[::1] weights = np.ascontiguousarray(weights_in, dtype=np.float64)
    cdef const double[::1] wvals
    cdef Py_ssize_t n = nodes.shape[0]
    cdef Py_ssize_t j
    cdef double acc = 0.0
    if wvals_in is None:
        with nogil:
            for j in range(n):
                acc += weights[j] * _ratio(nodes[j], y, t)
    else:
        wvals = np.ascontiguousarray(wvals_in, dtype=np.float64)
        with nogil:
            for j in range(n):
                acc += weights[j] * wvals[j] * _ratio(nodes[j], y, t)
    return acc


def phi_values(nodes_in, u_in, double t):
    cdef const double[::1] nodes = np.ascontiguousarray(nodes_in, dtype=np.float64)
    cdef const double[::1] u = np.ascontiguousarray(u_in, dtype=np.float64)
    cdef Py_ssize_t n = nodes.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t j
    with nogil:
        for j in range(n):
            out[j] = _phi(nodes[j], u[j], t)
    return out_arr


def nystrom_apply(kmat_in, nodes_in, weights_in, u_in, double t):
    cdef const double[:, ::1] kmat = np.ascontiguousarray(kmat_in, dtype=np.float64)
    cdef const double[::1] nodes = np.ascontiguousarray(nodes_in, dtype=np.float64)
    cdef const double[::1] weights = np.ascontiguousarray(weights_in, dtype=np.float64)
    cdef const double[::1] u = np.ascontiguousarray(u_in, dtype=np.float64)
    cdef Py_ssize_t n = nodes.shape[0]
    cdef Py_ssize_t i, j
    cdef double acc
    wphi_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] wphi = wphi_arr
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    with nogil:
        for j in range(n):
            wphi[j] = weights[j] * _phi(nodes[j], u[j], t)
        for i in range(n):
            acc = 0.0
            for j in range(n):
                acc += kmat[i, j] * wphi[j]
            out[i] = acc
    return out_arr

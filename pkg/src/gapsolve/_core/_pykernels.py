"""Pure-numpy implementations of the hot kernels.

These mirror the compiled versions in _ckernels.pyx one to one; the
backend chosen at import must never change results beyond floating-point
library differences in tanh.
"""

import numpy as np

#: tanh(z) for z above this is 1 to double precision; skip the libm call.
TANH_CLAMP = 20.0


def ratio_values(nodes, y, t):
    """tanh(sqrt(xi^2+y)/(2t)) / sqrt(xi^2+y) at each node; t == 0 takes the
    limit value 1/sqrt(xi^2+y)."""
    nodes = np.asarray(nodes, dtype=np.float64)
    s = np.sqrt(nodes * nodes + y)
    if t == 0.0:
        return 1.0 / s
    z = s / (2.0 * t)
    th = np.where(z > TANH_CLAMP, 1.0, np.tanh(np.minimum(z, TANH_CLAMP)))
    return th / s


def weighted_sum(nodes, weights, wvals, y, t):
    """Quadrature sum  sum_j weights_j * wvals_j * ratio(nodes_j; y, t)."""
    r = ratio_values(nodes, y, t)
    if wvals is None:
        return float(np.dot(weights, r))
    return float(np.dot(weights * wvals, r))


def phi_values(nodes, u, t):
    """u_j / sqrt(xi_j^2 + u_j^2) * tanh(sqrt(xi_j^2 + u_j^2)/(2t)); the
    integrand factor of the gap operator.  Zero where u_j == 0."""
    nodes = np.asarray(nodes, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    s = np.sqrt(nodes * nodes + u * u)
    if t == 0.0:
        return u / s
    z = s / (2.0 * t)
    th = np.where(z > TANH_CLAMP, 1.0, np.tanh(np.minimum(z, TANH_CLAMP)))
    return u * th / s


def nystrom_apply(kmat, nodes, weights, u, t):
    """One application of the discrete gap operator:
    out_i = sum_j kmat[i, j] * weights_j * phi(nodes_j, u_j; t)."""
    return kmat @ (np.asarray(weights) * phi_values(nodes, u, t))

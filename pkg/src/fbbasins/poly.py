"""Dense univariate complex polynomials (ascending coefficient arrays).

Degree is capped at 64 wherever construction searches run; the cap is
enforced by callers via `check_degree`.
"""

import numpy as np

from .errors import DegreeCapExceeded

DEGREE_CAP = 64


def aspoly(c):
    c = np.atleast_1d(np.asarray(c, dtype=complex))
    return c


def trim(c, tol=0.0):
    c = aspoly(c)
    nz = np.nonzero(np.abs(c) > tol)[0]
    if len(nz) == 0:
        return np.zeros(1, dtype=complex)
    return c[: nz[-1] + 1]


def degree(c):
    return len(trim(c)) - 1


def check_degree(c, cap=DEGREE_CAP):
    if degree(c) > cap:
        raise DegreeCapExceeded(f"degree {degree(c)} exceeds cap {cap}")
    return c


def polyval(c, x):
    """Horner evaluation, vectorized over x."""
    c = aspoly(c)
    x = np.asarray(x, dtype=complex)
    r = np.zeros_like(x)
    for coef in c[::-1]:
        r = r * x + coef
    return r


def polyder(c):
    c = aspoly(c)
    if len(c) <= 1:
        return np.zeros(1, dtype=complex)
    return c[1:] * np.arange(1, len(c))


def polymul(a, b):
    return np.convolve(aspoly(a), aspoly(b))


def polyadd(a, b):
    a, b = aspoly(a), aspoly(b)
    n = max(len(a), len(b))
    out = np.zeros(n, dtype=complex)
    out[: len(a)] += a
    out[: len(b)] += b
    return out


def polypow(a, n):
    out = np.ones(1, dtype=complex)
    for _ in range(int(n)):
        out = polymul(out, a)
    return out


def _scaled_vandermonde(nodes, ncols, scale):
    v = np.vander(nodes / scale, N=ncols, increasing=True)
    return v


def lagrange_fit(nodes, values):
    """Interpolating polynomial through (nodes, values), complex, exact at nodes.

    Nodes are rescaled internally to tame Vandermonde conditioning.
    """
    nodes = np.asarray(nodes, dtype=complex)
    values = np.asarray(values, dtype=complex)
    n = len(nodes)
    if n == 0:
        return np.zeros(1, dtype=complex)
    scale = max(np.max(np.abs(nodes)), 1e-9)
    v = _scaled_vandermonde(nodes, n, scale)
    coeffs = np.linalg.solve(v, values)
    return coeffs / scale ** np.arange(n)


def hermite_fit(nodes, values, derivs):
    """Polynomial matching value and first derivative at each node (degree 2m-1)."""
    nodes = np.asarray(nodes, dtype=complex)
    values = np.asarray(values, dtype=complex)
    derivs = np.asarray(derivs, dtype=complex)
    m = len(nodes)
    if m == 0:
        return np.zeros(1, dtype=complex)
    scale = max(np.max(np.abs(nodes)), 1e-9)
    x = nodes / scale
    ncols = 2 * m
    v = np.zeros((ncols, ncols), dtype=complex)
    rhs = np.zeros(ncols, dtype=complex)
    for i in range(m):
        v[2 * i] = x[i] ** np.arange(ncols)
        v[2 * i + 1, 1:] = np.arange(1, ncols) * x[i] ** np.arange(ncols - 1)
        rhs[2 * i] = values[i]
        rhs[2 * i + 1] = derivs[i] * scale
    coeffs = np.linalg.solve(v, rhs)
    return coeffs / scale ** np.arange(ncols)

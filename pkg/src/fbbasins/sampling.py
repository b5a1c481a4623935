"""Low-discrepancy sampling of balls and spheres in C^k (viewed as R^{2k}).

Suprema and infima over balls are estimated on radial shells (radii
rho * i / n_shells) with quasi-uniform directions, so boundary extrema
are not missed.
"""

import numpy as np
from scipy.stats import norm, qmc


def real_to_complex(x):
    """(..., 2k) real -> (..., k) complex, pairing consecutive coordinates."""
    x = np.asarray(x, dtype=float)
    return x[..., 0::2] + 1j * x[..., 1::2]


def complex_to_real(z):
    """(..., k) complex -> (..., 2k) real."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape[:-1] + (2 * z.shape[-1],), dtype=float)
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out


def unit_directions(n, cdim, seed=0):
    """n quasi-uniform directions on the unit sphere of C^cdim (= S^{2*cdim-1})."""
    sampler = qmc.Halton(d=2 * cdim, scramble=True, seed=seed)
    u = sampler.random(n)
    g = norm.ppf(np.clip(u, 1e-12, 1.0 - 1e-12))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return real_to_complex(g)


def ball_points(center, rho, n, seed=0, n_shells=24):
    """Quasi-uniform points of B_rho(center) \\ {center}: shell radii rho*i/n_shells."""
    center = np.asarray(center, dtype=complex)
    dirs = unit_directions(n, center.shape[-1], seed=seed)
    shells = rho * (1.0 + np.arange(n) % n_shells) / n_shells
    return center + dirs * shells[:, None]


def sphere_points(center, rho, n, seed=0):
    """Quasi-uniform points on the boundary sphere of B_rho(center)."""
    center = np.asarray(center, dtype=complex)
    dirs = unit_directions(n, center.shape[-1], seed=seed)
    return center + rho * dirs


def disk_points(center, rho, n, seed=0, n_shells=16):
    """Quasi-uniform points of a planar disk (complex scalars)."""
    pts = ball_points(np.array([center], dtype=complex), rho, n, seed=seed,
                      n_shells=n_shells)
    return pts[:, 0]

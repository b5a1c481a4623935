"""Exact polynomial automorphisms of C^k with inverses, Jacobians, and
the quantitative contraction data (s, r, C, delta) that certifies
sequence-attracting basins.

All map variants act on complex arrays of shape (..., k) and are immutable
after construction, so they are safe to share across workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import poly, sampling
from .errors import (
    CertificateViolated,
    DimensionMismatch,
    FixedPointViolated,
    SingularDifferential,
)
from .serialize import cmat, cmat_from, cnum, cnum_from, cvec, cvec_from

SAFETY_WIDENING = 0.05  # sampled extrema widened by 5% before certification
DEFAULT_BRACKET = (0.4, 0.6)  # for perturbations of the half-scale map: 0.36 < 0.4


def _as_points(z, dim):
    z = np.asarray(z, dtype=complex)
    if z.shape[-1] != dim:
        raise DimensionMismatch(f"point dim {z.shape[-1]} != map dim {dim}")
    return z


@dataclass(frozen=True, eq=False)
class HalfScale:
    """z -> z/2 in every coordinate."""

    dim: int = 2

    def apply(self, z):
        return 0.5 * _as_points(z, self.dim)

    def apply_inverse(self, z):
        return 2.0 * _as_points(z, self.dim)

    def jacobian(self, z):
        return 0.5 * np.eye(self.dim, dtype=complex)

    def to_obj(self):
        return {"type": "halfscale", "dim": self.dim}


@dataclass(frozen=True, eq=False)
class Affine:
    """z -> M z + b with M nonsingular."""

    matrix: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        b = np.asarray(self.offset, dtype=complex)
        if m.shape != (len(b), len(b)):
            raise DimensionMismatch("matrix/offset shapes disagree")
        if abs(np.linalg.det(m)) < 1e-300:
            raise SingularDifferential("affine matrix is singular")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "offset", b)

    @property
    def dim(self):
        return len(self.offset)

    def apply(self, z):
        z = _as_points(z, self.dim)
        return z @ self.matrix.T + self.offset

    def apply_inverse(self, z):
        z = _as_points(z, self.dim)
        return np.linalg.solve(self.matrix, (z - self.offset)[..., None])[..., 0]

    def jacobian(self, z):
        return self.matrix.copy()

    def to_obj(self):
        return {"type": "affine", "matrix": cmat(self.matrix),
                "offset": cvec(self.offset)}


@dataclass(frozen=True, eq=False)
class Shear:
    """z_axis -> z_axis + g(z_source), all other coordinates fixed."""

    axis: int
    g: np.ndarray
    source: int = -1
    dim: int = 2

    def __post_init__(self):
        object.__setattr__(self, "g", poly.aspoly(self.g))
        src = self.source
        if src < 0:
            if self.dim != 2:
                raise DimensionMismatch("shear source must be given for dim != 2")
            src = 1 - self.axis
        if src == self.axis or not (0 <= src < self.dim) or not (0 <= self.axis < self.dim):
            raise DimensionMismatch("bad shear axes")
        object.__setattr__(self, "source", src)

    def apply(self, z):
        z = _as_points(z, self.dim).copy()
        z[..., self.axis] += poly.polyval(self.g, z[..., self.source])
        return z

    def apply_inverse(self, z):
        z = _as_points(z, self.dim).copy()
        z[..., self.axis] -= poly.polyval(self.g, z[..., self.source])
        return z

    def jacobian(self, z):
        z = _as_points(z, self.dim)
        j = np.eye(self.dim, dtype=complex)
        j[self.axis, self.source] = poly.polyval(poly.polyder(self.g), z[self.source])
        return j

    def to_obj(self):
        return {"type": "shear", "dim": self.dim, "axis": self.axis,
                "source": self.source, "g": [cnum(c) for c in self.g]}


@dataclass(frozen=True, eq=False)
class Overshear:
    """z_axis -> exp(h(z_source)) * z_axis + g(z_source)."""

    axis: int
    h: np.ndarray
    g: np.ndarray
    source: int = -1
    dim: int = 2

    def __post_init__(self):
        object.__setattr__(self, "h", poly.aspoly(self.h))
        object.__setattr__(self, "g", poly.aspoly(self.g))
        src = self.source
        if src < 0:
            if self.dim != 2:
                raise DimensionMismatch("overshear source must be given for dim != 2")
            src = 1 - self.axis
        if src == self.axis or not (0 <= src < self.dim) or not (0 <= self.axis < self.dim):
            raise DimensionMismatch("bad overshear axes")
        object.__setattr__(self, "source", src)

    def apply(self, z):
        z = _as_points(z, self.dim).copy()
        s = z[..., self.source]
        z[..., self.axis] = (np.exp(poly.polyval(self.h, s)) * z[..., self.axis]
                             + poly.polyval(self.g, s))
        return z

    def apply_inverse(self, z):
        z = _as_points(z, self.dim).copy()
        s = z[..., self.source]
        z[..., self.axis] = ((z[..., self.axis] - poly.polyval(self.g, s))
                             * np.exp(-poly.polyval(self.h, s)))
        return z

    def jacobian(self, z):
        z = _as_points(z, self.dim)
        s = z[self.source]
        e = np.exp(poly.polyval(self.h, s))
        j = np.eye(self.dim, dtype=complex)
        j[self.axis, self.axis] = e
        j[self.axis, self.source] = (poly.polyval(poly.polyder(self.h), s) * e
                                     * z[self.axis]
                                     + poly.polyval(poly.polyder(self.g), s))
        return j

    def to_obj(self):
        return {"type": "overshear", "dim": self.dim, "axis": self.axis,
                "source": self.source, "h": [cnum(c) for c in self.h],
                "g": [cnum(c) for c in self.g]}


@dataclass(frozen=True, eq=False)
class Henon:
    """(z, w) -> (z^2 + c - a w, z), a != 0."""

    a: complex
    c: complex
    dim: int = field(default=2, init=False)

    def __post_init__(self):
        if self.a == 0:
            raise SingularDifferential("henon parameter a must be nonzero")

    def apply(self, z):
        z = _as_points(z, 2)
        out = np.empty_like(z)
        out[..., 0] = z[..., 0] ** 2 + self.c - self.a * z[..., 1]
        out[..., 1] = z[..., 0]
        return out

    def apply_inverse(self, z):
        z = _as_points(z, 2)
        out = np.empty_like(z)
        out[..., 0] = z[..., 1]
        out[..., 1] = (z[..., 1] ** 2 + self.c - z[..., 0]) / self.a
        return out

    def jacobian(self, z):
        z = _as_points(z, 2)
        return np.array([[2 * z[0], -self.a], [1.0, 0.0]], dtype=complex)

    def to_obj(self):
        return {"type": "henon", "a": cnum(self.a), "c": cnum(self.c)}


@dataclass(frozen=True, eq=False)
class Composition:
    """Ordered composition: maps[0] is applied first."""

    maps: tuple
    dim: int = 2

    def __post_init__(self):
        ms = tuple(self.maps)
        object.__setattr__(self, "maps", ms)
        if ms:
            d = ms[0].dim
            if any(m.dim != d for m in ms):
                raise DimensionMismatch("composition parts disagree on dim")
            object.__setattr__(self, "dim", d)

    def apply(self, z):
        z = _as_points(z, self.dim)
        for m in self.maps:
            z = m.apply(z)
        return z

    def apply_inverse(self, z):
        z = _as_points(z, self.dim)
        for m in reversed(self.maps):
            z = m.apply_inverse(z)
        return z

    def jacobian(self, z):
        z = _as_points(z, self.dim)
        j = np.eye(self.dim, dtype=complex)
        for m in self.maps:
            j = m.jacobian(z) @ j
            z = m.apply(z)
        return j

    def to_obj(self):
        return {"type": "composition", "dim": self.dim,
                "maps": [m.to_obj() for m in self.maps]}


def identity(dim=2):
    return Composition((), dim=dim)


def apply(m, z):
    """Image of z under m; broadcasts over leading axes of z."""
    return m.apply(z)


def apply_inverse(m, z):
    return m.apply_inverse(z)


def jacobian_at(m, z):
    """Exact complex Jacobian of m at a single point z."""
    return m.jacobian(np.asarray(z, dtype=complex))


def compose_range(maps, i, j, dim=None):
    """Partial composition of maps i..j (1-based, i applied first).

    i > j yields the identity.
    """
    if i < 1:
        raise IndexError("compose_range start must be >= 1")
    if i > j:
        d = dim if dim is not None else (maps[0].dim if maps else 2)
        return Composition((), dim=d)
    if j > len(maps):
        raise IndexError(f"compose_range end {j} out of range (have {len(maps)})")
    return Composition(tuple(maps[i - 1: j]))


def from_obj(obj):
    """Rebuild an AutoMap from its JSON dict form."""
    t = obj["type"]
    if t == "halfscale":
        return HalfScale(dim=obj["dim"])
    if t == "shear":
        return Shear(axis=obj["axis"], g=[cnum_from(c) for c in obj["g"]],
                     source=obj["source"], dim=obj["dim"])
    if t == "overshear":
        return Overshear(axis=obj["axis"], h=[cnum_from(c) for c in obj["h"]],
                         g=[cnum_from(c) for c in obj["g"]],
                         source=obj["source"], dim=obj["dim"])
    if t == "henon":
        return Henon(a=cnum_from(obj["a"]), c=cnum_from(obj["c"]))
    if t == "affine":
        return Affine(matrix=cmat_from(obj["matrix"]), offset=cvec_from(obj["offset"]))
    if t == "composition":
        return Composition(tuple(from_obj(o) for o in obj["maps"]), dim=obj["dim"])
    raise ValueError(f"unknown map type {t!r}")


# ---------------------------------------------------------------------------
# contraction certification
# ---------------------------------------------------------------------------

def _check_fixes(m, p, tol=1e-12):
    p = np.asarray(p, dtype=complex)
    err = np.linalg.norm(m.apply(p) - p)
    if err > tol * (1.0 + np.linalg.norm(p)):
        raise FixedPointViolated(f"map moves p by {err:.3e}")
    return p


def adapted_basis(m, p, cond_cap=1e6):
    """Eigenbasis of dF(p), normalized columns; identity when ill-conditioned.

    Contraction ratios are measured in the norm ||B^-1 (z - p)||: for maps
    whose differential is non-normal (e.g. Henon), the Euclidean one-step
    ratios straddle the eigenvalue moduli, while the adapted norm recovers
    them up to O(rho).
    """
    j = jacobian_at(m, p)
    w, v = np.linalg.eig(j)
    v = v / np.linalg.norm(v, axis=0, keepdims=True)
    if not np.all(np.isfinite(v)) or np.linalg.cond(v) > cond_cap:
        return np.eye(m.dim, dtype=complex)
    return v


@dataclass(frozen=True, eq=False)
class ContractionProfile:
    s_raw: float
    r_raw: float
    s_hat: float
    r_hat: float
    basis: np.ndarray


def contraction_profile(m, p, rho, n_samples, seed=0, basis=None):
    """Sampled one-step contraction extrema of m on B_rho(p) in the given norm.

    Extrema are taken over two sample densities and widened by 5%.
    """
    if n_samples < 1000:
        raise ValueError("n_samples must be >= 1000")
    p = _check_fixes(m, p)
    if basis is None:
        basis = adapted_basis(m, p)
    binv = np.linalg.inv(basis)

    ratios = []
    for n, sd in ((n_samples, seed), (max(n_samples // 2, 500), seed + 1)):
        z = p + sampling.ball_points(np.zeros_like(p), rho, n, seed=sd) @ basis.T
        d0 = np.linalg.norm((z - p) @ binv.T, axis=-1)
        d1 = np.linalg.norm((m.apply(z) - p) @ binv.T, axis=-1)
        ratios.append(d1 / d0)
    ratios = np.concatenate(ratios)
    s_raw, r_raw = float(ratios.min()), float(ratios.max())
    return ContractionProfile(s_raw=s_raw, r_raw=r_raw,
                              s_hat=s_raw * (1.0 - SAFETY_WIDENING),
                              r_hat=r_raw * (1.0 + SAFETY_WIDENING),
                              basis=basis)


def contraction_bounds(m, p, rho, n_samples, seed=0, basis=None):
    """(s_hat, r_hat): widened sampled bounds on ||F(z)-p|| / ||z-p|| over B_rho(p)."""
    prof = contraction_profile(m, p, rho, n_samples, seed=seed, basis=basis)
    return prof.s_hat, prof.r_hat


def quadratic_defect_constant(m, p, rho, n_samples, seed=0):
    """Widened sampled sup of ||dF(p)^-1 (F(z)-p) - (z-p)|| / ||z-p||^2 on B_rho(p).

    This is the constant in the second-order bound that drives the limit-map
    convergence rate; it vanishes for linear maps.
    """
    p = _check_fixes(m, p)
    a = jacobian_at(m, p)
    if abs(np.linalg.det(a)) < 1e-300 or np.linalg.cond(a) > 1e12:
        raise SingularDifferential("differential at p is (near) singular")
    sup = 0.0
    for n, sd in ((n_samples, seed), (max(n_samples // 2, 500), seed + 1)):
        z = sampling.ball_points(p, rho, n, seed=sd)
        u = z - p
        w = np.linalg.solve(a, (m.apply(z) - p).T).T - u
        vals = np.linalg.norm(w, axis=-1) / np.linalg.norm(u, axis=-1) ** 2
        sup = max(sup, float(vals.max()))
    return sup * (1.0 + SAFETY_WIDENING)


def schwarz_delta(rho, s, r):
    """Perturbation margin delta(rho) = rho * min(r - 1/2, 1/2 - s).

    Guarantee: any holomorphic F fixing the center with ||F - A|| < delta on
    B_rho (A the half-scale map) has one-step ratios within [s, r] there,
    because G = F - A vanishes at the center and the Schwarz lemma gives
    ||G(z)|| <= (delta/rho) ||z||.  The formula is one valid choice; only
    existence of some delta(rho) is forced.
    """
    if not (0.0 < s < 0.5 < r < 1.0):
        raise ValueError(f"bracket must satisfy 0 < s < 1/2 < r < 1, got ({s}, {r})")
    if r * r >= s:
        raise ValueError(f"bracket must satisfy r^2 < s, got r^2={r * r} >= s={s}")
    return rho * min(r - 0.5, 0.5 - s)


@dataclass(frozen=True, eq=False)
class ContractionCertificate:
    """(p, rho, s, r, delta, quad_C) under which basin convergence is certified.

    Distances are measured in the norm ||basis^-1 (z - p)||; `basis` defaults
    to the identity and to the adapted eigenbasis for sampled certificates.
    Requires 0 < s < r < 1 and r^2 < s unless built with unsafe=True
    (experimentation only; convergence is then not certified).
    """

    p: np.ndarray
    rho: float
    s: float
    r: float
    delta: float
    quad_C: float = 0.0
    basis: np.ndarray = None
    unsafe: bool = False

    def __post_init__(self):
        p = np.asarray(self.p, dtype=complex)
        object.__setattr__(self, "p", p)
        b = self.basis
        if b is None:
            b = np.eye(len(p), dtype=complex)
        b = np.asarray(b, dtype=complex)
        object.__setattr__(self, "basis", b)
        object.__setattr__(self, "_binv", np.linalg.inv(b))
        if not (0.0 < self.s < self.r < 1.0):
            raise CertificateViolated(f"need 0 < s < r < 1, got ({self.s}, {self.r})")
        if self.r ** 2 >= self.s and not self.unsafe:
            raise CertificateViolated(
                f"need r^2 < s (got {self.r ** 2:.4f} >= {self.s:.4f}); "
                "pass unsafe=True for non-certified experimentation")
        if not (0.0 < self.delta <= self.rho):
            raise CertificateViolated("need 0 < delta <= rho")

    @property
    def dim(self):
        return len(self.p)

    def distance(self, z):
        """Certificate-norm distance of points z from p."""
        z = np.asarray(z, dtype=complex)
        return np.linalg.norm((z - self.p) @ self._binv.T, axis=-1)

    def ball_points(self, n, radius=None, seed=0):
        """Quasi-uniform samples of the certificate ball of given radius."""
        rad = self.rho if radius is None else radius
        u = sampling.ball_points(np.zeros(self.dim, dtype=complex), rad, n, seed=seed)
        return self.p + u @ self.basis.T

    def to_obj(self):
        return {"p": cvec(self.p), "rho": self.rho, "s": self.s, "r": self.r,
                "delta": self.delta, "quad_c": self.quad_C,
                "basis": cmat(self.basis), "unsafe": self.unsafe}

    @classmethod
    def from_obj(cls, obj):
        return cls(p=cvec_from(obj["p"]), rho=obj["rho"], s=obj["s"], r=obj["r"],
                   delta=obj["delta"], quad_C=obj.get("quad_c", 0.0),
                   basis=cmat_from(obj["basis"]), unsafe=obj.get("unsafe", False))


def certificate_for_half_scale_perturbations(p, rho, bracket=DEFAULT_BRACKET,
                                             quad_C=0.0):
    """Certificate for sequences of delta(rho)-perturbations of the half-scale map."""
    s, r = bracket
    return ContractionCertificate(p=p, rho=rho, s=s, r=r,
                                  delta=schwarz_delta(rho, s, r), quad_C=quad_C)


def certificate_from_sampling(m, p, rho, n_samples=4096, seed=0, unsafe=False):
    """Measured certificate for a self-map: sampled bracket in the adapted norm.

    delta is fixed at rho/2: entry of an orbit into the delta-ball certifies
    attraction since the bracket holds on the full rho-ball.
    """
    prof = contraction_profile(m, p, rho, n_samples, seed=seed)
    c_hat = quadratic_defect_constant(m, p, rho, n_samples, seed=seed)
    return ContractionCertificate(p=np.asarray(p, dtype=complex), rho=rho,
                                  s=prof.s_hat, r=prof.r_hat, delta=rho / 2.0,
                                  quad_C=c_hat, basis=prof.basis, unsafe=unsafe)

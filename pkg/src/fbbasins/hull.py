"""Planar polynomial convexity on a raster: hulls by bounded-complement
filling, avoiding-path construction, and polynomial certificates for
keeping probe points out of hulls of ball-union/line configurations.

In the plane the polynomial hull of a compact set is the set plus the
bounded components of its complement, which flood fill computes exactly at
grid resolution.  Sets use 4-connectivity and complements 8-connectivity
(the standard digital-topology pairing).
"""

from __future__ import annotations

import io
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import poly, sampling
from .errors import CertificateSearchExhausted, NoPathAtResolution, QTooCloseToK
from .serialize import cvec

DEFAULT_RESOLUTION = 256  # cells per unit

_CROSS = ndimage.generate_binary_structure(2, 1)  # 4-connectivity
_BOX = ndimage.generate_binary_structure(2, 2)    # 8-connectivity


@dataclass(eq=False)
class PlanarCompact:
    """Rasterized compact subset of C: bbox (x0, y0, x1, y1), cells per unit,
    and an occupancy mask indexed [iy, ix].  Occupied cells keep a one-cell
    margin inside the bbox so the border ring always belongs to the
    unbounded complement component.
    """

    bbox: tuple
    resolution: int
    mask: np.ndarray

    def __post_init__(self):
        self.mask = np.asarray(self.mask, dtype=bool)
        x0, y0, x1, y1 = self.bbox
        if x1 <= x0 or y1 <= y0 or self.resolution <= 0:
            raise ValueError("bad bbox/resolution")
        if not self.mask.any():
            raise ValueError("mask must be nonempty")
        border = np.concatenate([self.mask[0], self.mask[-1],
                                 self.mask[:, 0], self.mask[:, -1]])
        if border.any():
            raise ValueError("occupied cells must stay one cell inside the bbox")

    @property
    def shape(self):
        return self.mask.shape

    def cell_of(self, z):
        """(iy, ix) of the cell containing the complex point z."""
        x0, y0, _, _ = self.bbox
        ix = int(np.floor((z.real - x0) * self.resolution))
        iy = int(np.floor((z.imag - y0) * self.resolution))
        ny, nx = self.mask.shape
        if not (0 <= ix < nx and 0 <= iy < ny):
            raise ValueError(f"point {z} outside bbox")
        return iy, ix

    def center_of(self, iy, ix):
        x0, y0, _, _ = self.bbox
        return complex(x0 + (ix + 0.5) / self.resolution,
                       y0 + (iy + 0.5) / self.resolution)

    def contains(self, z):
        try:
            iy, ix = self.cell_of(z)
        except ValueError:
            return False
        return bool(self.mask[iy, ix])

    def with_mask(self, mask):
        return PlanarCompact(bbox=self.bbox, resolution=self.resolution, mask=mask)

    def occupied_points(self):
        """Complex centers of all occupied cells."""
        iy, ix = np.nonzero(self.mask)
        x0, y0, _, _ = self.bbox
        return (x0 + (ix + 0.5) / self.resolution) + 1j * (
            y0 + (iy + 0.5) / self.resolution)

    def area(self):
        return float(self.mask.sum()) / self.resolution ** 2

    # -- serialization: PGM (P5) raster plus JSON sidecar ---------------------

    def to_pgm(self):
        ny, nx = self.mask.shape
        header = f"P5\n{nx} {ny}\n255\n".encode()
        body = np.where(self.mask, 255, 0).astype(np.uint8).tobytes()
        return header + body

    def sidecar(self):
        x0, y0, x1, y1 = self.bbox
        return {"bbox": [x0, y0, x1, y1], "resolution": self.resolution}

    @classmethod
    def from_pgm(cls, data, sidecar):
        buf = io.BytesIO(data)
        magic = buf.readline().strip()
        if magic != b"P5":
            raise ValueError("not a binary PGM")
        dims = buf.readline().split()
        nx, ny = int(dims[0]), int(dims[1])
        maxval = int(buf.readline())
        raw = np.frombuffer(buf.read(nx * ny), dtype=np.uint8).reshape(ny, nx)
        return cls(bbox=tuple(sidecar["bbox"]), resolution=sidecar["resolution"],
                   mask=raw > maxval // 2)


def _grid_for(zmin, zmax, resolution, pad):
    x0, y0 = zmin.real - pad, zmin.imag - pad
    x1, y1 = zmax.real + pad, zmax.imag + pad
    nx = max(int(np.ceil((x1 - x0) * resolution)), 8)
    ny = max(int(np.ceil((y1 - y0) * resolution)), 8)
    return (x0, y0, x0 + nx / resolution, y0 + ny / resolution), (ny, nx)


def _cell_centers(bbox, shape, resolution):
    x0, y0, _, _ = bbox
    ny, nx = shape
    xs = x0 + (np.arange(nx) + 0.5) / resolution
    ys = y0 + (np.arange(ny) + 0.5) / resolution
    return xs[None, :] + 1j * ys[:, None]


def from_disks(disks, resolution=DEFAULT_RESOLUTION, pad=0.5):
    """Raster of a union of closed disks [(center, radius), ...]."""
    centers = np.array([c for c, _ in disks], dtype=complex)
    radii = np.array([r for _, r in disks], dtype=float)
    zmin = complex((centers.real - radii).min(), (centers.imag - radii).min())
    zmax = complex((centers.real + radii).max(), (centers.imag + radii).max())
    bbox, shape = _grid_for(zmin, zmax, resolution, pad)
    cc = _cell_centers(bbox, shape, resolution)
    mask = np.zeros(shape, dtype=bool)
    for c, r in zip(centers, radii):
        mask |= np.abs(cc - c) <= r
    return PlanarCompact(bbox=bbox, resolution=resolution, mask=mask)


def from_points(points, resolution=DEFAULT_RESOLUTION, pad=0.5, thicken=1):
    """Raster of a finite point set, optionally dilated by `thicken` cells."""
    pts = np.asarray(points, dtype=complex).ravel()
    zmin = complex(pts.real.min(), pts.imag.min())
    zmax = complex(pts.real.max(), pts.imag.max())
    bbox, shape = _grid_for(zmin, zmax, resolution, pad)
    x0, y0, _, _ = bbox
    mask = np.zeros(shape, dtype=bool)
    ix = np.floor((pts.real - x0) * resolution).astype(int)
    iy = np.floor((pts.imag - y0) * resolution).astype(int)
    mask[iy, ix] = True
    if thicken:
        mask = ndimage.binary_dilation(mask, _CROSS, iterations=thicken)
    return PlanarCompact(bbox=bbox, resolution=resolution, mask=mask)


# ---------------------------------------------------------------------------
# hulls
# ---------------------------------------------------------------------------

def _bounded_complement(mask):
    """Cells of complement components (8-connected) not touching the border."""
    labels, _ = ndimage.label(~mask, structure=_BOX)
    border_labels = np.unique(np.concatenate([
        labels[0], labels[-1], labels[:, 0], labels[:, -1]]))
    border_labels = border_labels[border_labels != 0]
    return ~mask & ~np.isin(labels, border_labels)


def poly_hull(k: PlanarCompact) -> PlanarCompact:
    """K plus the bounded components of its complement; idempotent."""
    return k.with_mask(k.mask | _bounded_complement(k.mask))


def is_poly_convex(k: PlanarCompact) -> bool:
    return not _bounded_complement(k.mask).any()


# ---------------------------------------------------------------------------
# avoiding paths
# ---------------------------------------------------------------------------

def _bfs_distance(free, starts):
    """Vectorized BFS distance field over 4-connected free cells (-1 unreachable)."""
    dist = np.full(free.shape, -1, dtype=np.int32)
    frontier = starts & free
    d = 0
    reached = frontier.copy()
    while frontier.any():
        dist[frontier] = d
        grown = np.zeros_like(frontier)
        grown[1:, :] |= frontier[:-1, :]
        grown[:-1, :] |= frontier[1:, :]
        grown[:, 1:] |= frontier[:, :-1]
        grown[:, :-1] |= frontier[:, 1:]
        frontier = grown & free & ~reached
        reached |= frontier
        d += 1
    return dist


def _walk_down(dist, start):
    """Follow decreasing BFS distance from start back to a zero cell."""
    path = [start]
    iy, ix = start
    d = dist[iy, ix]
    ny, nx = dist.shape
    while d > 0:
        for dy, dx in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            jy, jx = iy + dy, ix + dx
            if 0 <= jy < ny and 0 <= jx < nx and dist[jy, jx] == d - 1:
                iy, ix, d = jy, jx, d - 1
                path.append((iy, ix))
                break
        else:
            raise RuntimeError("broken distance field")
    return path


def _border_mask(shape):
    m = np.zeros(shape, dtype=bool)
    m[0] = m[-1] = True
    m[:, 0] = m[:, -1] = True
    return m


def _escape_corridor(k_mask, q_cell):
    """8-connected chain of free cells from q's cell to the border, avoiding K.

    Tries straight axis rays first, then falls back to a BFS route.  An
    8-connected chain of forbidden cells cannot be crossed by a 4-connected
    path, so corridors block the avoiding path from encircling q.
    """
    ny, nx = k_mask.shape
    iy, ix = q_cell
    rays = [[(iy, j) for j in range(ix, -1, -1)],
            [(iy, j) for j in range(ix, nx)],
            [(j, ix) for j in range(iy, -1, -1)],
            [(j, ix) for j in range(iy, ny)]]
    for ray in rays:
        if not any(k_mask[c] for c in ray):
            return ray
    dist = _bfs_distance(~k_mask, _border_mask(k_mask.shape) & ~k_mask)
    if dist[iy, ix] < 0:
        return None
    return _walk_down(dist, (iy, ix))  # runs q -> border by construction


def connect_avoiding(k: PlanarCompact, p1, p2, q_points=(), max_attempts=4):
    """Grow K to a polynomially convex K' joining p1 and p2 while excluding Q.

    Routes escape corridors from every q to the border through the complement
    of K, then finds a shortest 4-connected path from p1 to p2 through cells
    off Q and off the corridors (crossing K is allowed), thickens it by one
    cell, and hulls the union.  Because the corridors survive into the
    complement of the result, no q can be swallowed by the fill; all three
    postconditions are re-verified before returning.
    """
    p1, p2 = complex(p1), complex(p2)
    q_points = [complex(q) for q in q_points]
    if not k.contains(p1) or not k.contains(p2):
        raise ValueError("p1 and p2 must lie in K")
    if not is_poly_convex(k):
        warnings.warn("K is not polynomially convex; hulling it first")
        k = poly_hull(k)

    q_cells = []
    for q in q_points:
        try:
            cell = k.cell_of(q)
        except ValueError:
            continue  # outside the frame: already in the unbounded component
        if k.mask[cell]:
            raise QTooCloseToK(f"avoided point {q} occupies a K cell")
        q_cells.append(cell)

    labels, _ = ndimage.label(k.mask, structure=_CROSS)
    c1, c2 = k.cell_of(p1), k.cell_of(p2)
    if labels[c1] == labels[c2]:
        return k  # already joined; nothing to do

    q_mask = np.zeros(k.shape, dtype=bool)
    for cell in q_cells:
        q_mask[cell] = True

    for attempt in range(max_attempts):
        corridor = np.zeros(k.shape, dtype=bool)
        ok = True
        for cell in q_cells:
            chain = _escape_corridor(k.mask | (corridor if attempt else False),
                                     cell)
            if chain is None:
                ok = False
                break
            for c in chain:
                corridor[c] = True
        if not ok:
            raise NoPathAtResolution(
                "an avoided point has no escape corridor; refine the resolution")

        free = ~(q_mask | corridor)
        start = np.zeros(k.shape, dtype=bool)
        start[c1] = True
        dist = _bfs_distance(free, start)
        if dist[c2] < 0:
            continue  # corridors blocked the route; re-plan
        path = np.zeros(k.shape, dtype=bool)
        for cell in _walk_down(dist, c2):
            path[cell] = True
        thick = ndimage.binary_dilation(path, _CROSS) & free
        thick[0] = thick[-1] = False
        thick[:, 0] = thick[:, -1] = False
        candidate = poly_hull(k.with_mask(k.mask | thick))

        labels2, _ = ndimage.label(candidate.mask, structure=_CROSS)
        joined = labels2[c1] == labels2[c2]
        clean = not any(candidate.mask[c] for c in q_cells)
        if joined and clean and is_poly_convex(candidate):
            return candidate
    raise NoPathAtResolution(
        "no avoiding path found at this resolution; refine the resolution")


# ---------------------------------------------------------------------------
# certificates against hulls of ball unions plus a line
# ---------------------------------------------------------------------------

@dataclass
class ProbeResult:
    probe: tuple          # ambient point, or the line parameter for on-line probes
    status: str           # "certified" | "in_hull" | "off_hull_on_line"
    exponent: int = 0
    margin: float = 0.0   # |g(probe)| / sup_C |g|

    def to_obj(self):
        return {"probe": cvec(self.probe), "status": self.status,
                "exponent": self.exponent, "margin": self.margin}


@dataclass
class LineCheckReport:
    results: list
    evidence_grade: bool = True  # sampled certificates, not proofs

    @property
    def all_consistent(self):
        return all(r.status in ("certified", "in_hull", "off_hull_on_line")
                   for r in self.results)

    def to_obj(self):
        return {"evidence_grade": self.evidence_grade,
                "results": [r.to_obj() for r in self.results]}


def _ball_sup(f, balls, n=512):
    """Sampled sup of |f| over each ball boundary (max modulus), 5% widened."""
    sups = []
    for i, (c, r) in enumerate(balls):
        pts = sampling.sphere_points(np.asarray(c, dtype=complex), r, n, seed=17 + i)
        sups.append(float(np.abs(f(pts)).max()) * 1.05)
    return sups


def line_certificate_check(balls, line_origin, line_direction, k_prime: PlanarCompact,
                           probes, degree_cap=poly.DEGREE_CAP):
    """Per-probe polynomial certificates that the probe avoids the hull of
    (ball union) u (compact on the line).

    For a probe q off the line, searches for g = h * f^k with h a linear form
    vanishing on the line and f separating q from the ball union, reporting
    the exponent k and the sampled margin |g(q)| / sup |g|.  Probes on the
    line are settled by the planar hull oracle on the line's own coordinates
    (the hull of the union traces exactly the planar hull there), with no
    polynomial certificate attempted.  Probes inside the ball union are
    rejected.  Raises CertificateSearchExhausted at the degree cap.
    """
    o = np.asarray(line_origin, dtype=complex)
    d = np.asarray(line_direction, dtype=complex)
    if np.linalg.norm(d) < 1e-12:
        raise ValueError("degenerate line direction")
    balls = [(np.asarray(c, dtype=complex), float(r)) for c, r in balls]
    hulled = poly_hull(k_prime)

    def h_form(z):
        # determinant form vanishing exactly on the affine line o + t d
        return (z[..., 0] - o[0]) * d[1] - (z[..., 1] - o[1]) * d[0]

    results = []
    for probe in probes:
        q = np.asarray(probe, dtype=complex)
        for c, r in balls:
            if np.linalg.norm(q - c) <= r:
                raise ValueError(f"probe {q} lies inside the ball union")
        t = np.vdot(d, q - o) / np.vdot(d, d)  # line parameter of the projection
        on_line = np.linalg.norm(o + t * d - q) < 1e-9 * (1 + np.linalg.norm(q))
        if on_line:
            inside = hulled.contains(complex(t))
            results.append(ProbeResult(
                probe=(complex(t),),
                status="in_hull" if inside else "off_hull_on_line"))
            continue
        results.append(_search_certificate(q, balls, h_form, degree_cap))
    return LineCheckReport(results=results)


def _candidate_separators(q, balls):
    """Holomorphic f with f(q) = 1, hopefully |f| < 1 on the ball union."""
    prods = []

    def product_form(z):
        out = np.ones(z.shape[:-1], dtype=complex)
        for c, _ in balls:
            u = q - c
            out *= ((z - c) @ u.conj()) / (u @ u.conj())
        return out

    prods.append((product_form, len(balls)))

    centroid = np.mean([c for c, _ in balls], axis=0)

    def linear_form(z):
        u = q - centroid
        return ((z - centroid) @ u.conj()) / (u @ u.conj())

    prods.append((linear_form, 1))
    return prods


def _search_certificate(q, balls, h_form, degree_cap):
    hq = abs(complex(h_form(q[None, :])[0]))
    h_sups = _ball_sup(lambda z: h_form(z), balls)
    for f, fdeg in _candidate_separators(q, balls):
        f_sups = _ball_sup(f, balls)
        fq = abs(complex(f(q[None, :])[0]))
        if fq <= max(f_sups) * 1.02:
            continue  # no separation margin; try the next candidate
        # smallest k with |h(q)| |f(q)|^k > 1.05 * max_i sup|h| sup|f|^k
        k = 1
        while 1 + k * fdeg <= degree_cap:
            lhs = hq * fq ** k
            rhs = max(hs * fs ** k for hs, fs in zip(h_sups, f_sups))
            if lhs > 1.05 * rhs:
                return ProbeResult(probe=tuple(q), status="certified",
                                   exponent=k, margin=float(lhs / rhs))
            k += 1
    raise CertificateSearchExhausted(
        f"no certificate for probe {q} within degree cap {degree_cap}")

"""Sequence-attracting basins: membership classification, the limit
biholomorphism, and empirical verification of the quantitative
convergence claims behind it.

A sequence {F_j} sharing one contraction certificate at p defines partial
compositions F(j) = F_j o ... o F_1 and the basin of points whose orbits
converge to p.  The normalized compositions Phi_j = A(j)^-1 F(j), with
A(j) the product of differentials at p, converge geometrically at rate
r^2/s on the certificate ball; their limit is the basin's uniformizing
map.  Only attraction is ever certified -- entering the delta-ball is
permanent because the certified one-step ratio stays below r < 1.
Escape verdicts are heuristic.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import automaps, sampling
from .automaps import ContractionCertificate
from .errors import (
    CertificateViolated,
    NoConvergenceWithinBudget,
    NotInBasin,
    RatioViolation,
    SupplierBoundViolated,
)

_EPS = np.finfo(float).eps
# sampled orbit values become meaningless past this; frozen, treated as escaped
_FREEZE = 1e120


class Verdict(Enum):
    ATTRACTED = "attracted"
    ESCAPED = "escaped"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class BasinVerdict:
    status: Verdict
    stage: int  # entry stage / escape stage / exhausted budget
    basin: int = 0  # index of the capturing center (multi-center sweeps)

    @property
    def is_attracted(self):
        return self.status is Verdict.ATTRACTED

    @property
    def is_escaped(self):
        return self.status is Verdict.ESCAPED

    @property
    def is_decided(self):
        return self.status is not Verdict.UNDECIDED


@dataclass(eq=False)
class AutoSequence:
    """Ordered automorphisms sharing one contraction certificate at cert.p.

    With cyclic=True the finite list repeats as a block, so constant and
    periodic sequences are the one-map / short-list cases.  Construction
    verifies (sampled) that every map fixes p and contracts within the
    certified bracket on the certificate ball; pass check=False only when
    the caller re-verifies through other gates.
    """

    maps: list
    cert: ContractionCertificate
    cyclic: bool = False
    check: bool = True
    n_check: int = 512

    def __post_init__(self):
        self.maps = list(self.maps)
        if not self.maps:
            raise ValueError("sequence needs at least one map")
        if any(m.dim != self.cert.dim for m in self.maps):
            raise CertificateViolated("map/certificate dimension mismatch")
        self._diff_cache = {}
        if self.check:
            self.verify_certificate(self.n_check)

    def verify_certificate(self, n_samples=512, seed=7):
        """Re-check the construction invariants; raises CertificateViolated."""
        cert = self.cert
        p = cert.p
        pn = 1.0 + np.linalg.norm(p)
        z = cert.ball_points(max(n_samples, 64), seed=seed)
        d0 = cert.distance(z)
        for idx, m in enumerate(self.maps):
            err = np.linalg.norm(m.apply(p) - p)
            if err > 1e-12 * pn:
                raise CertificateViolated(f"map {idx + 1} moves p by {err:.3e}")
            ratios = cert.distance(m.apply(z)) / d0
            lo, hi = float(ratios.min()), float(ratios.max())
            if lo < cert.s or hi > cert.r:
                raise CertificateViolated(
                    f"map {idx + 1} sampled ratios [{lo:.4f}, {hi:.4f}] escape "
                    f"certified bracket [{cert.s:.4f}, {cert.r:.4f}]")
        return True

    def available(self, budget):
        """Number of stages usable for a given budget."""
        return budget if self.cyclic else min(budget, len(self.maps))

    def map_at(self, j):
        """F_j, 1-based."""
        if j < 1:
            raise IndexError("stage index is 1-based")
        if self.cyclic:
            return self.maps[(j - 1) % len(self.maps)]
        return self.maps[j - 1]

    def diff_at(self, j):
        """dF_j(p); cached per underlying map object."""
        m = self.map_at(j)
        key = id(m)
        if key not in self._diff_cache:
            self._diff_cache[key] = automaps.jacobian_at(m, self.cert.p)
        return self._diff_cache[key]

    def to_obj(self):
        return {"cert": self.cert.to_obj(), "cyclic": self.cyclic,
                "maps": [m.to_obj() for m in self.maps]}

    @classmethod
    def from_obj(cls, obj, check=True):
        return cls(maps=[automaps.from_obj(o) for o in obj["maps"]],
                   cert=ContractionCertificate.from_obj(obj["cert"]),
                   cyclic=obj.get("cyclic", False), check=check)


# ---------------------------------------------------------------------------
# vectorized orbit sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CenterSpec:
    """Entry target for a sweep: certified from stage `birth` onwards."""

    p: np.ndarray
    delta: float
    binv: np.ndarray
    birth: int = 0

    @classmethod
    def from_cert(cls, cert, birth=0):
        return cls(p=cert.p, delta=cert.delta, binv=np.linalg.inv(cert.basis),
                   birth=birth)

    def distance(self, z):
        return np.linalg.norm((z - self.p) @ self.binv.T, axis=-1)


def sweep(seq, points, budget, escape_radius, centers=None):
    """Classify an array of points; returns (status, stage, basin) int arrays.

    status: 0 undecided, 1 attracted, 2 escaped.  Entry into a center's
    delta-ball is checked only from that center's birth stage on (stage maps
    before the birth carry no contraction guarantee there).
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if centers is None:
        centers = [CenterSpec.from_cert(seq.cert)]
    if escape_radius <= max(np.linalg.norm(c.p) + seq.cert.rho for c in centers):
        raise ValueError("escape_radius must exceed ||p|| + rho")

    pts = np.asarray(points, dtype=complex).reshape(-1, seq.cert.dim)
    n = len(pts)
    status = np.zeros(n, dtype=np.int8)
    stage = np.zeros(n, dtype=np.int64)
    basin = np.full(n, -1, dtype=np.int64)

    w = pts.copy()
    active = np.ones(n, dtype=bool)
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        for j in range(0, seq.available(budget) + 1):
            if j > 0:
                w[active] = seq.map_at(j).apply(w[active])
            if not active.any():
                break
            wa = w[active]
            finite = np.isfinite(wa).all(axis=-1)
            big = ~finite | (np.linalg.norm(np.where(np.isfinite(wa), wa, 0.0),
                                            axis=-1) > escape_radius)
            captured = np.zeros(len(wa), dtype=bool)
            cap_basin = np.full(len(wa), -1, dtype=np.int64)
            for ci, c in enumerate(centers):
                if j < c.birth:
                    continue
                hit = ~captured & finite & (c.distance(wa) < c.delta)
                captured |= hit
                cap_basin[hit] = ci
            idx = np.flatnonzero(active)
            att = idx[captured]
            esc = idx[big & ~captured]
            status[att] = 1
            stage[att] = j
            basin[att] = cap_basin[captured]
            status[esc] = 2
            stage[esc] = j
            active[att] = False
            active[esc] = False
            # freeze runaway values so later stages do not overflow to nan
            w[~active] = 0.0
    stage[active] = seq.available(budget)
    return status, stage, basin


def classify(seq, z, budget=10_000, escape_radius=1e3):
    """Basin verdict for one point.

    Attracted (certified, permanent) once the orbit enters the delta-ball;
    Escaped (heuristic) once it leaves the escape radius; Undecided otherwise.
    """
    status, stage, basin = sweep(seq, np.asarray(z, dtype=complex)[None, :],
                                 budget, escape_radius)
    st = [Verdict.UNDECIDED, Verdict.ATTRACTED, Verdict.ESCAPED][int(status[0])]
    return BasinVerdict(status=st, stage=int(stage[0]), basin=int(basin[0]))


# ---------------------------------------------------------------------------
# the limit map
# ---------------------------------------------------------------------------

def _noise_floor(seq, min_sv, scale=200.0):
    return scale * _EPS * (1.0 + np.linalg.norm(seq.cert.p)) / max(min_sv, 1e-300)


def phi_eval(seq, z, tol=1e-9, j_max=200):
    """Limit-map value at a basin point, with the achieved stage tolerance.

    Evaluation is factored: the orbit is first iterated into the delta-ball
    (k stages), the normalized tail is run there at unit scale, and the head
    differentials are undone by k triangular solves at the end.  This keeps
    the growing inverse products away from the small tail values until one
    well-conditioned final solve chain.
    """
    cert = seq.cert
    p = cert.p
    z = np.asarray(z, dtype=complex)
    head = []
    w = z.copy()
    k = 0
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        while not cert.distance(w) < cert.delta:
            if not np.all(np.isfinite(w)):
                raise NotInBasin("orbit diverged before entering the delta-ball")
            if k >= seq.available(j_max):
                raise NotInBasin("orbit did not enter the delta-ball within budget")
            k += 1
            head.append(seq.diff_at(k))
            w = seq.map_at(k).apply(w)

    # tail: u_j = A(k+1,j)^-1 (F(k+1,j)(w) - p), geometric Cauchy decay
    u_prev = w - p
    v = w.copy()
    m_acc = np.eye(cert.dim, dtype=complex)
    achieved = np.inf
    j = k
    converged = False
    while j < seq.available(j_max):
        j += 1
        v = seq.map_at(j).apply(v)
        m_acc = seq.diff_at(j) @ m_acc
        u = np.linalg.solve(m_acc, v - p)
        diff = float(np.linalg.norm(u - u_prev))
        u_prev = u
        floor = _noise_floor(seq, np.linalg.svd(m_acc, compute_uv=False)[-1])
        achieved = max(diff, floor)
        if diff <= tol or diff <= 2.0 * floor:
            converged = True
            break
    if not converged:
        raise NoConvergenceWithinBudget(
            f"tail stage differences still {achieved:.3e} at stage {j}")

    out = u_prev
    for a in reversed(head):
        out = np.linalg.solve(a, out)
    return p + out, achieved


def dphi_at_p(seq, h=1e-5, tol=1e-11, j_max=200):
    """Central finite-difference differential of the limit map at p (contract: I)."""
    if not (1e-7 <= h <= 1e-4):
        raise ValueError("h must be in [1e-7, 1e-4]")
    cert = seq.cert
    dim = cert.dim
    out = np.zeros((dim, dim), dtype=complex)
    for m in range(dim):
        e = np.zeros(dim, dtype=complex)
        e[m] = h
        plus, _ = phi_eval(seq, cert.p + e, tol=tol, j_max=j_max)
        minus, _ = phi_eval(seq, cert.p - e, tol=tol, j_max=j_max)
        out[:, m] = (plus - minus) / (2.0 * h)
    return out


# ---------------------------------------------------------------------------
# convergence verification
# ---------------------------------------------------------------------------

@dataclass
class ConvergenceReport:
    """Measured Cauchy decay of the normalized compositions on the delta-ball.

    stage_diffs[j-1] = sup over samples of ||Phi_{j+1} - Phi_j|| (certificate
    norm).  Stages whose differences fall below the floating-point noise
    floor (inverse differential products amplify rounding) are excluded from
    the geometric fit; `used_stages` records which stages were fitted.
    """

    stage_diffs: list
    fitted_ratio: float
    predicted_ratio: float
    observed_R: float
    observed_eps: float
    exact: bool = False
    used_stages: list = field(default_factory=list)
    noise_floor: list = field(default_factory=list)

    def to_obj(self):
        return {"stage_diffs": self.stage_diffs, "fitted_ratio": self.fitted_ratio,
                "predicted_ratio": self.predicted_ratio,
                "observed_R": self.observed_R, "observed_eps": self.observed_eps,
                "exact": self.exact, "used_stages": self.used_stages,
                "noise_floor": self.noise_floor}

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["stage", "sup_diff", "noise_floor", "used"])
        for i, d in enumerate(self.stage_diffs):
            w.writerow([i + 1, repr(d), repr(self.noise_floor[i]),
                        int((i + 1) in self.used_stages)])
        return buf.getvalue()


def _tail_eval(seq, w_pts, k, j_max, tol):
    """Tail limit values Phi^k at points w_pts already inside the delta-ball."""
    p = seq.cert.p
    u_prev = w_pts - p
    v = w_pts.copy()
    m_acc = np.eye(seq.cert.dim, dtype=complex)
    for j in range(k + 1, seq.available(j_max) + 1):
        v = seq.map_at(j).apply(v)
        m_acc = seq.diff_at(j) @ m_acc
        u = np.linalg.solve(m_acc, (v - p).T).T
        diff = float(np.max(np.linalg.norm(u - u_prev, axis=-1)))
        u_prev = u
        floor = _noise_floor(seq, np.linalg.svd(m_acc, compute_uv=False)[-1])
        if diff <= tol or diff <= 2.0 * floor:
            break
    return p + u_prev


def convergence_report(seq, n_samples=256, j_max=20, seed=11, raise_on_violation=True):
    """Measure stage differences of Phi_j over delta-ball samples and fit the rate.

    The certified prediction is r^2/s; the fit must stay within 1.1x of it.
    Also reports observed_R (max norm of tail images over sampled stages) and
    observed_eps (sampled lower bound for the inradius of the tail images,
    min boundary-image distance minus a Lipschitz * covering-gap correction).
    """
    if n_samples < 100:
        raise ValueError("n_samples must be >= 100")
    cert = seq.cert
    p = cert.p
    z = cert.ball_points(n_samples, radius=cert.delta * 0.999, seed=seed)

    diffs = []
    floors = []
    v = z.copy()
    m_acc = np.eye(cert.dim, dtype=complex)
    u_prev = z - p
    for j in range(1, seq.available(j_max) + 1):
        v = seq.map_at(j).apply(v)
        m_acc = seq.diff_at(j) @ m_acc
        u = np.linalg.solve(m_acc, (v - p).T).T
        diffs.append(float(np.max(np.linalg.norm(u - u_prev, axis=-1))))
        floors.append(_noise_floor(seq, np.linalg.svd(m_acc, compute_uv=False)[-1]))
        u_prev = u

    predicted = cert.r ** 2 / cert.s
    used = [j for j, (d, f) in enumerate(zip(diffs, floors), start=1) if d > f]
    if not used:
        report_fit, exact = 0.0, True
    else:
        exact = False
        xs = np.array(used, dtype=float)
        ys = np.log([diffs[j - 1] for j in used])
        if len(used) == 1:
            report_fit = 0.0
        else:
            slope = np.polyfit(xs, ys, 1)[0]
            report_fit = float(np.exp(slope))

    # devices behind surjectivity: tail images stay in a ball (R) and contain
    # one (eps); inradius geometry is measured in the certificate norm
    binv = np.linalg.inv(cert.basis)
    sphere = p + (sampling.sphere_points(np.zeros(cert.dim, dtype=complex),
                                         cert.delta * 0.999, max(n_samples, 128),
                                         seed=seed + 1) @ cert.basis.T)
    src_n = (sphere - p) @ binv.T
    gap = _max_nearest_gap(src_n)
    obs_r = 0.0
    obs_eps = np.inf
    ks = sorted(set(list(range(0, seq.available(j_max), max(1, j_max // 8))) +
                    [seq.available(j_max) - 1]))
    for k in ks:
        img = _tail_eval(seq, sphere, k, k + j_max, tol=1e-12)
        obs_r = max(obs_r, float(np.max(np.linalg.norm(img, axis=-1))))
        img_n = (img - p) @ binv.T
        d_im = np.linalg.norm(img_n, axis=-1)
        lip = _pairwise_lipschitz(src_n, img_n)
        obs_eps = min(obs_eps, max(float(d_im.min() - lip * gap), 0.0))

    report = ConvergenceReport(stage_diffs=diffs, fitted_ratio=report_fit,
                               predicted_ratio=predicted, observed_R=obs_r,
                               observed_eps=float(obs_eps), exact=exact,
                               used_stages=used, noise_floor=floors)
    if raise_on_violation and not exact and report_fit > predicted * 1.1:
        raise RatioViolation(
            f"fitted ratio {report_fit:.4f} exceeds predicted "
            f"{predicted:.4f} * 1.1", report=report)
    return report


def _max_nearest_gap(pts):
    x = sampling.complex_to_real(pts)
    d2 = np.sum((x[:, None, :] - x[None, :, :]) ** 2, axis=-1)
    np.fill_diagonal(d2, np.inf)
    return float(np.sqrt(d2.min(axis=1).max()))


def _pairwise_lipschitz(src, img):
    x = sampling.complex_to_real(src)
    d2 = np.sum((x[:, None, :] - x[None, :, :]) ** 2, axis=-1)
    np.fill_diagonal(d2, np.inf)
    nbr = d2.argmin(axis=1)
    num = np.linalg.norm(img - img[nbr], axis=-1)
    den = np.sqrt(d2[np.arange(len(src)), nbr])
    return float(np.max(num / den))


# ---------------------------------------------------------------------------
# dual-route checks
# ---------------------------------------------------------------------------

@dataclass
class UnionFormulaReport:
    total: int
    decided: int
    attracted: int
    disagreements: list

    @property
    def ok(self):
        return not self.disagreements

    def to_obj(self):
        return {"total": self.total, "decided": self.decided,
                "attracted": self.attracted, "disagreements": self.disagreements}

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["point_index", "disagrees"])
        for i in self.disagreements:
            w.writerow([i, 1])
        return buf.getvalue()


def union_formula_check(seq, grid, budget=500, escape_radius=1e3):
    """Cross-check classify against direct delta-ball pullback membership.

    Route A is the short-circuiting classifier; route B iterates the full
    composition over every stage without early exit and records whether the
    orbit ever visits the delta-ball.  Decided points must agree exactly.
    """
    pts = np.asarray(grid, dtype=complex).reshape(-1, seq.cert.dim)
    status, stage, _ = sweep(seq, pts, budget, escape_radius)

    cert = seq.cert
    ever = cert.distance(pts) < cert.delta
    w = pts.copy()
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        for j in range(1, seq.available(budget) + 1):
            w = seq.map_at(j).apply(w)
            bad = ~np.isfinite(w).all(axis=-1) | (
                np.linalg.norm(np.where(np.isfinite(w), w, 0.0), axis=-1) > _FREEZE)
            w[bad] = _FREEZE  # frozen far away; cannot re-enter
            ever |= cert.distance(w) < cert.delta

    disagreements = []
    for i in range(len(pts)):
        if status[i] == 1 and not ever[i]:
            disagreements.append(int(i))
        elif status[i] == 2 and ever[i]:
            disagreements.append(int(i))
        elif status[i] == 0 and ever[i]:
            disagreements.append(int(i))
    return UnionFormulaReport(total=len(pts), decided=int((status != 0).sum()),
                              attracted=int((status == 1).sum()),
                              disagreements=disagreements)


@dataclass
class EquivalenceReport:
    total: int
    compared: int
    matching: int
    mismatches: list = field(default_factory=list)

    @property
    def fraction(self):
        return 1.0 if self.compared == 0 else self.matching / self.compared

    def to_obj(self):
        return {"total": self.total, "compared": self.compared,
                "matching": self.matching, "fraction": self.fraction,
                "mismatches": self.mismatches}

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["point_index", "matches"])
        for i in self.mismatches:
            w.writerow([i, 0])
        return buf.getvalue()


def sequence_equiv_check(seq1, seq2, grid, budget=500, escape_radius=1e3):
    """Fraction of grid points with identical decided verdicts under both sequences."""
    if seq1.cert.dim != seq2.cert.dim:
        raise ValueError("sequences act on different dimensions")
    pts = np.asarray(grid, dtype=complex).reshape(-1, seq1.cert.dim)
    s1, _, _ = sweep(seq1, pts, budget, escape_radius)
    s2, _, _ = sweep(seq2, pts, budget, escape_radius)
    both = (s1 != 0) & (s2 != 0)
    mismatches = np.flatnonzero(both & (s1 != s2)).tolist()
    return EquivalenceReport(total=len(pts), compared=int(both.sum()),
                             matching=int((s1[both] == s2[both]).sum()),
                             mismatches=mismatches)


# ---------------------------------------------------------------------------
# increasing limits of staged biholomorphisms
# ---------------------------------------------------------------------------

@dataclass
class StagedSupplier:
    """Stage evaluator with its verification sets.

    forward/inverse: callables on (n, k) complex arrays.
    domain_samples: points where consecutive forward maps must stay within
    the stage bound; ball_radius: radius of the origin ball where the
    inverse bound must hold.
    """

    forward: object
    inverse: object
    domain_samples: np.ndarray
    ball_radius: float


class IncreasingLimit:
    """Telescoping limit of verified staged biholomorphisms."""

    def __init__(self, suppliers, rho_schedule, tail_bound):
        self._suppliers = suppliers
        self.rho_schedule = list(rho_schedule)
        self.tail_bound = tail_bound

    def forward(self, z):
        """(value, error bound): last stage evaluation plus the summable tail."""
        return self._suppliers[-1].forward(np.asarray(z, dtype=complex)), self.tail_bound

    def inverse(self, z):
        return self._suppliers[-1].inverse(np.asarray(z, dtype=complex)), self.tail_bound


def increasing_limit_driver(suppliers, rho_schedule, dim=2, seed=3,
                            n_ball=256, injectivity_pairs=200):
    """Build the increasing-limit evaluator after verifying every stage bound.

    Checks, for each consecutive pair, that the forward maps differ by less
    than the scheduled bound on the stage's domain samples and the inverses
    differ by less than the same bound on the stage ball.  The schedule must
    decay geometrically (fitted ratio < 1) so the tail sum is certified.
    """
    suppliers = list(suppliers)
    rho_schedule = [float(r) for r in rho_schedule]
    if len(rho_schedule) < len(suppliers) - 1:
        raise ValueError("need a bound for every consecutive supplier pair")
    if any(r <= 0 for r in rho_schedule):
        raise ValueError("stage bounds must be positive")

    qs = [rho_schedule[i + 1] / rho_schedule[i] for i in range(len(rho_schedule) - 1)]
    q = float(np.median(qs)) if qs else 0.5
    if q >= 1.0:
        raise ValueError(
            f"stage bounds do not decay (fitted ratio {q:.3f} >= 1); "
            "tail sum cannot be certified")
    tail = rho_schedule[-1] * q / (1.0 - q)

    for k in range(len(suppliers) - 1):
        a, b = suppliers[k], suppliers[k + 1]
        bound = rho_schedule[k]
        dom = np.asarray(a.domain_samples, dtype=complex).reshape(-1, dim)
        dfwd = float(np.max(np.linalg.norm(b.forward(dom) - a.forward(dom), axis=-1)))
        if dfwd >= bound:
            raise SupplierBoundViolated(
                f"forward bound {bound:.3e} violated at stage {k + 1}: {dfwd:.3e}",
                stage=k + 1)
        ball = sampling.ball_points(np.zeros(dim, dtype=complex), a.ball_radius,
                                    n_ball, seed=seed + k)
        dinv = float(np.max(np.linalg.norm(b.inverse(ball) - a.inverse(ball), axis=-1)))
        if dinv >= bound:
            raise SupplierBoundViolated(
                f"inverse bound {bound:.3e} violated at stage {k + 1}: {dinv:.3e}",
                stage=k + 1)

    # injectivity spot check on the last stage
    last = suppliers[-1]
    dom = np.asarray(last.domain_samples, dtype=complex).reshape(-1, dim)
    rng = np.random.default_rng(seed)
    if len(dom) >= 2:
        ia = rng.integers(0, len(dom), size=injectivity_pairs)
        ib = rng.integers(0, len(dom), size=injectivity_pairs)
        sep = np.linalg.norm(dom[ia] - dom[ib], axis=-1) > 1e-6
        fa, fb = last.forward(dom[ia]), last.forward(dom[ib])
        if np.any(np.linalg.norm(fa - fb, axis=-1)[sep] < 1e-10):
            raise SupplierBoundViolated("injectivity spot check failed", stage=len(suppliers))

    return IncreasingLimit(suppliers, rho_schedule, tail)

"""Finite-stage builders for three basin constructions in C^2:

* disjoint basins whose witnesses crowd every uncaptured region
  (`build_disjoint_basins`),
* a basin meeting prescribed complex lines in connected sets while missing
  chosen points on them (`build_line_intersector`),
* a basin swallowing prescribed subvarieties while excluding a point
  (`build_variety_container`).

Each stage composes verified movers/contractors with the half-scale map,
re-verifies its induction invariants from scratch before committing, and
aborts with a full state dump otherwise.  All randomness is seeded; reruns
are byte-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import automaps, basin, hull, mover, poly, sampling
from .automaps import (
    Composition,
    HalfScale,
    Overshear,
    Shear,
    certificate_for_half_scale_perturbations,
    schwarz_delta,
)
from .errors import (
    DegreeCapExceeded,
    GeneralPositionViolated,
    MoverFailed,
    NoPathAtResolution,
    StageFailed,
)
from .serialize import cnum_from, cvec, cvec_from

BRACKET = automaps.DEFAULT_BRACKET  # (0.4, 0.6), r^2 = 0.36 < 0.4
SEPARATION_FACTOR = 3.0  # stand-in predicate for ball-union polynomial convexity


# ---------------------------------------------------------------------------
# stage state
# ---------------------------------------------------------------------------

@dataclass
class Witness:
    stage: int
    basin: int
    point: np.ndarray       # original-space point
    image: np.ndarray       # its image after the committing stage

    def to_obj(self):
        return {"stage": self.stage, "basin": self.basin,
                "point": cvec(self.point), "image": cvec(self.image)}


@dataclass
class StageState:
    """Induction record shared by the three builders.

    maps are the committed stage maps F_1..F_j; `factors` the certificate
    factor list actually stored in the emitted sequence (equal to `maps`
    for the disjoint-basin builder, the half-scale factorization for the
    tuck builders).  Invariants are re-verified from scratch, never
    incrementally.
    """

    kind: str
    maps: list = field(default_factory=list)
    factors: list = field(default_factory=list)
    centers: list = field(default_factory=list)
    preimages: list = field(default_factory=list)
    radii: list = field(default_factory=list)
    births: list = field(default_factory=list)
    witnesses: list = field(default_factory=list)
    excluded: list = field(default_factory=list)
    excluded_births: list = field(default_factory=list)
    eps_schedule: list = field(default_factory=list)
    stage: int = 0
    notes: list = field(default_factory=list)

    def composed(self, upto=None):
        ms = self.maps if upto is None else self.maps[:upto]
        return Composition(tuple(ms))

    def deltas(self):
        return [schwarz_delta(r, *BRACKET) for r in self.radii]

    def to_obj(self):
        return {"kind": self.kind, "stage": self.stage,
                "maps": [m.to_obj() for m in self.maps],
                "factors": [m.to_obj() for m in self.factors],
                "centers": [cvec(c) for c in self.centers],
                "preimages": [cvec(p) for p in self.preimages],
                "radii": list(self.radii), "births": list(self.births),
                "witnesses": [w.to_obj() for w in self.witnesses],
                "excluded": [cvec(q) for q in self.excluded],
                "excluded_births": list(self.excluded_births),
                "eps_schedule": list(self.eps_schedule),
                "notes": list(self.notes)}

    @classmethod
    def from_obj(cls, obj):
        st = cls(kind=obj["kind"])
        st.stage = obj["stage"]
        st.maps = [automaps.from_obj(o) for o in obj["maps"]]
        st.factors = [automaps.from_obj(o) for o in obj["factors"]]
        st.centers = [cvec_from(c) for c in obj["centers"]]
        st.preimages = [cvec_from(p) for p in obj["preimages"]]
        st.radii = list(obj["radii"])
        st.births = list(obj["births"])
        st.witnesses = [Witness(stage=w["stage"], basin=w["basin"],
                                point=cvec_from(w["point"]),
                                image=cvec_from(w["image"]))
                        for w in obj["witnesses"]]
        st.excluded = [cvec_from(q) for q in obj["excluded"]]
        st.excluded_births = list(obj.get("excluded_births", []))
        st.eps_schedule = list(obj["eps_schedule"])
        st.notes = list(obj["notes"])
        return st


def verify_stage_invariants(state: StageState, n_samples=600, seed=5):
    """Full from-scratch re-verification; returns a list of named violations."""
    bad = []
    deltas = state.deltas()
    for i in range(len(state.centers)):
        for k in range(i + 1, len(state.centers)):
            gap = np.linalg.norm(state.centers[i] - state.centers[k])
            if gap < SEPARATION_FACTOR * (state.radii[i] + state.radii[k]):
                bad.append(f"(a) separation: centers {i},{k} too close")
    comp = state.composed()
    for i, (p, q) in enumerate(zip(state.preimages, state.centers)):
        # p_i is the inverse image of q_i by definition, and (c) extends the
        # identity F(j)(p_i) = q_i exactly one stage at a time; the forward
        # float check is only meaningful while the preimage orbit is
        # well-conditioned (far pullbacks condition like ||p||^degree)
        if np.linalg.norm(p) > 1e2:
            continue
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            fwd = comp.apply(p)
        err = np.linalg.norm(fwd - q) if np.all(np.isfinite(fwd)) else np.inf
        if err > 1e-9 * (1 + np.linalg.norm(q)):
            bad.append(f"(b) preimage {i} misses its center by {err:.2e}")
    for j, m in enumerate(state.maps, start=1):
        for i, q in enumerate(state.centers):
            if j < state.births[i]:
                continue
            err = np.linalg.norm(m.apply(q) - q)
            if err > 1e-9 * (1 + np.linalg.norm(q)):
                bad.append(f"(c) map {j} moves center {i} by {err:.2e}")
            z = sampling.ball_points(q, state.radii[i], n_samples, seed=seed + i)
            with np.errstate(over="ignore", invalid="ignore", under="ignore"):
                dev = np.linalg.norm(m.apply(z) - (q + (z - q) / 2), axis=-1)
            worst = float(dev.max()) if np.all(np.isfinite(dev)) else np.inf
            if worst >= deltas[i]:
                bad.append(f"(d) map {j} deviates {worst:.2e} on ball {i}")
    for w in state.witnesses:
        q = state.centers[w.basin]
        if np.linalg.norm(state.composed(w.stage).apply(w.point) - q) \
                > state.radii[w.basin]:
            bad.append(f"(i) witness at stage {w.stage} missed ball {w.basin}")
    return bad


def center_sequences(state: StageState, check=True):
    """Per-center basin sequences: maps from each center's birth stage on."""
    seqs = []
    for i, q in enumerate(state.centers):
        cert = certificate_for_half_scale_perturbations(q, state.radii[i])
        start = max(state.births[i] - 1, 0)
        seqs.append(basin.AutoSequence(state.factors[start:]
                                       if state.kind != "disjoint"
                                       else state.maps[start:],
                                       cert, check=check))
    return seqs


def center_specs(state: StageState):
    """CenterSpec list for multi-center sweeps over the committed maps."""
    specs = []
    for i, q in enumerate(state.centers):
        cert = certificate_for_half_scale_perturbations(q, state.radii[i])
        specs.append(basin.CenterSpec.from_cert(cert, birth=max(state.births[i] - 1, 0)))
    return specs


# ---------------------------------------------------------------------------
# disjoint basins
# ---------------------------------------------------------------------------

@dataclass
class DisjointConfig:
    m: int = 3
    stages: int = 8
    seed: int = 42
    eps_schedule: tuple = None     # default eps_j = 2^-j
    extent: float = 4.0            # witness/guard slice half-width (z-plane)
    witness_grid: int = 21         # witness grid per axis on the slice
    guard_grid: int = 200          # escape-guard grid per axis on the slice
    witness_budget: int = 3        # captures per basin per stage
    guard_cap: float = 20.0        # max tracked orbit norm per stage
    rho_first: float = 0.5         # radius of the origin ball
    rho_new: float = 0.22          # radius cap for newly born balls
    crescent: float = 0.15         # off-center shift of the damping disk
    max_stage_retries: int = 4

    def __post_init__(self):
        if not (2 <= self.m <= 4):
            raise ValueError("m must be between 2 and 4")
        if self.stages > 12:
            raise ValueError("stages capped at 12 (desk scale)")
        if self.eps_schedule is None:
            self.eps_schedule = tuple(2.0 ** -(j + 1) for j in range(self.stages))
        else:
            self.eps_schedule = tuple(self.eps_schedule)
            if len(self.eps_schedule) < self.stages:
                raise ValueError("eps schedule shorter than stage count")

    def to_obj(self):
        return {"m": self.m, "stages": self.stages, "seed": self.seed,
                "eps_schedule": list(self.eps_schedule), "extent": self.extent,
                "witness_grid": self.witness_grid, "guard_grid": self.guard_grid,
                "witness_budget": self.witness_budget, "guard_cap": self.guard_cap,
                "center_ring": self.center_ring, "rho_new": self.rho_new}

    @classmethod
    def from_obj(cls, obj):
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: (tuple(v) if k == "eps_schedule" and v is not None else v)
                      for k, v in obj.items() if k in known})


def slice_grid(extent, n):
    """n x n points of the first-coordinate complex plane through the origin."""
    xs = np.linspace(-extent, extent, n)
    return np.array([[complex(x, y), 0.0] for x in xs for y in xs], dtype=complex)


# real spanning directions of the default slice for the disjoint-basin
# builder: generic (coordinate-skew), so both coordinate projections of the
# slice are two-dimensional and shear/overshear localization can separate
# points near any center
GENERIC_SLICE_AXES = (np.array([1.0, 0.55 + 0.20j], dtype=complex),
                      np.array([1.0j, -0.35 + 0.85j], dtype=complex))


def generic_slice_grid(extent, n, axes=GENERIC_SLICE_AXES):
    """n x n points of a generic real 2-plane through the origin in C^2."""
    d1, d2 = axes
    xs = np.linspace(-extent, extent, n)
    u, v = np.meshgrid(xs, xs, indexing="ij")
    pts = u.ravel()[:, None] * d1[None, :] + v.ravel()[:, None] * d2[None, :]
    return pts.astype(complex)


def build_disjoint_basins(cfg: DisjointConfig):
    """Stagewise construction of m mutually disjoint basins.

    Stage 1 is the half-scale map with the first center at the origin.  Each
    stage map is a single damped multi-center contractor: near the plain
    half-scale map on an (off-center) disk covering the tracked slice
    orbits, with exact value/half-scale jets at every center outside it.
    New centers are born adjacent to actual orbit points on the cloud rim,
    so their capture annulus pokes out of the damped zone and witnesses ride
    the contractor's own jet into the new ball -- no relocation shear is
    needed and tracked orbits can never blow up (escape-guarded per stage,
    so decided-non-attracted points cannot appear on the guard grid).
    """
    rng = np.random.default_rng(cfg.seed)
    state = StageState(kind="disjoint", eps_schedule=list(cfg.eps_schedule))
    state.centers = [np.zeros(2, dtype=complex)]
    state.preimages = [np.zeros(2, dtype=complex)]
    state.radii = [cfg.rho_first]
    state.births = [1]
    state.maps = [HalfScale(2)]
    state.factors = state.maps
    state.stage = 1

    wit_grid = generic_slice_grid(cfg.extent, cfg.witness_grid)
    guard = generic_slice_grid(cfg.extent, cfg.guard_grid)
    wit_orbit = HalfScale(2).apply(wit_grid)
    guard_orbit = HalfScale(2).apply(guard)
    used_witness = np.zeros(len(wit_grid), dtype=bool)

    for stage in range(2, cfg.stages + 1):
        committed = False
        for retry in range(cfg.max_stage_retries):
            try:
                new_map, new_wits, born, new_radii = _disjoint_stage(
                    cfg, state, stage, wit_grid, wit_orbit, used_witness,
                    guard_orbit, rng_seed=cfg.seed * 1000 + stage * 10 + retry,
                    witness_budget=cfg.witness_budget if retry < 2 else 1)
            except (MoverFailed, StageFailed, GeneralPositionViolated) as err:
                state.notes.append(f"stage {stage} retry {retry}: {err}")
                continue
            # escape guard on the tracked slice orbits
            with np.errstate(over="ignore", invalid="ignore", under="ignore"):
                cand_guard = new_map.apply(guard_orbit)
            worst = float(np.linalg.norm(cand_guard, axis=-1).max())
            if not np.isfinite(worst) or worst > cfg.guard_cap:
                state.notes.append(
                    f"stage {stage} retry {retry}: guard {worst:.1f}")
                continue
            trial = _committed_state(state, new_map, new_wits, born, stage,
                                     new_radii)
            bad = verify_stage_invariants(trial, seed=cfg.seed + stage)
            if bad:
                state.notes.append(f"stage {stage} retry {retry}: {bad[0]}")
                continue
            state = trial
            guard_orbit = cand_guard
            wit_orbit = new_map.apply(wit_orbit)
            for w in new_wits:
                if w["grid_index"] >= 0:
                    used_witness[w["grid_index"]] = True
            committed = True
            break
        if not committed:
            raise StageFailed(stage, "no committable stage after retries",
                              state_dump=state.to_obj())

    cert = certificate_for_half_scale_perturbations(state.centers[0],
                                                    state.radii[0])
    seq = basin.AutoSequence(state.maps, cert)
    return seq, state


def _committed_state(state, new_map, new_wits, born, stage, new_radii):
    trial = StageState(kind="disjoint",
                       maps=state.maps + [new_map],
                       centers=list(state.centers),
                       preimages=list(state.preimages),
                       radii=list(state.radii),
                       births=list(state.births),
                       witnesses=list(state.witnesses),
                       excluded=list(state.excluded),
                       excluded_births=list(state.excluded_births),
                       eps_schedule=list(state.eps_schedule),
                       notes=list(state.notes), stage=stage)
    trial.factors = trial.maps
    if born is not None:
        q, p, rho = born
        trial.centers.append(q)
        trial.preimages.append(p)
        trial.radii.append(rho)
        trial.births.append(stage)
    # the contractor may have shrunk ball radii (halving, recorded)
    trial.radii = list(new_radii)
    comp = trial.composed()
    for w in new_wits:
        trial.witnesses.append(Witness(stage=stage, basin=w["basin"],
                                       point=w["point"],
                                       image=comp.apply(w["point"])))
    return trial


def _damped_contractor(centers, disks, quiet_frac=0.012):
    """Two overshear layers with constant factor 1/2: exact value and
    half-scale-jet data at every center, suppressed toward the plain
    half-scale map on the per-axis damping disks.

    Each layer's polynomial is a sum of per-center bump terms

        (val + w (xi - b)) * ((xi - c)/(b - c))^N_i * prod_k ((xi-b_k)/(b-b_k))^2

    with w zeroing the derivative at the center's node b.  A bump carries
    exact value/flat data at b, double zeros at every other node, and its
    exponent N_i escalates independently until the term is quiet on the
    damping disk -- inner centers get small exponents, so their terms stay
    tame at nodes farther out.  Non-origin centers must project outside the
    disk feeding their layer.
    """
    layers = []
    for axis in (0, 1):
        src = 1 - axis
        c_d, r_d = disks[src]
        g = np.zeros(1, dtype=complex)
        nodes = [q[src] for q in centers]
        for i, q in enumerate(centers):
            b = q[src]
            val = q[axis] / 2.0
            if abs(val) < 1e-15:
                continue
            if abs(b - c_d) < r_d * 1.05:
                raise GeneralPositionViolated(
                    "a center projects into the damping disk")
            cross = np.ones(1, dtype=complex)
            cross_logder = 0.0
            for k, bk in enumerate(nodes):
                if k == i:
                    continue
                if abs(b - bk) < 1e-9 * (1 + abs(b)):
                    raise GeneralPositionViolated(
                        "two centers share an axis projection")
                cross = poly.polymul(cross, poly.polypow(
                    np.array([-complex(bk), 1.0], dtype=complex) / (b - bk), 2))
                cross_logder += 2.0 / (b - bk)
            base = np.array([-complex(c_d), 1.0], dtype=complex) / (b - c_d)
            term = None
            for n_i in range(1, poly.DEGREE_CAP):
                bump = poly.polymul(poly.polypow(base, n_i), cross)
                if poly.degree(bump) + 1 > poly.DEGREE_CAP:
                    break
                w = -val * (n_i / (b - c_d) + cross_logder)
                cand = poly.polymul(
                    np.array([val - w * b, w], dtype=complex), bump)
                if mover._disk_sup(cand, c_d, r_d) <= quiet_frac * r_d:
                    term = cand
                    break
            if term is None:
                raise DegreeCapExceeded(
                    "no quiet bump for a center within the degree cap")
            g = poly.polyadd(g, term)
        poly.check_degree(g)
        if any(abs(n) < 1e-12 for n in nodes):
            # an origin-projected center: its double zero makes the constant
            # and linear coefficients vanish up to rounding; pin them exactly
            g[0] = 0.0
            if len(g) > 1:
                g[1] = 0.0
        layers.append(Overshear(axis=axis, h=[mover.LOG_HALF], g=g,
                                source=src, dim=2))
    return Composition(tuple(layers))


def _fit_contractor(cfg, centers, radii, guard_orbit, rng_seed):
    """Damped contractor fitting this stage's geometry, or None.

    Builds per-axis damping disks over the tracked cloud projections (center
    shifted away from the newest ball when that buys node clearance), then
    escalates the damping exponent until the disks are quiet and every
    certificate ball meets its (d)-budget.
    """
    deltas = [schwarz_delta(r, *BRACKET) for r in radii]
    pts = guard_orbit
    disks = []
    for axis in (0, 1):
        c0, r0 = bounding_disk(pts[:, axis], pad=0.02)
        best = None
        newest = centers[-1][axis]
        u_a = (newest - c0) / max(abs(newest - c0), 1e-9)
        for shift in (0.0, 0.1, 0.2, 0.3):
            c_a = c0 - shift * r0 * u_a
            r_a = float(np.abs(pts[:, axis] - c_a).max()) * 1.02
            # the quiet zone must always contain the origin ball: its
            # certificate behavior IS the damped half-scale map
            r_a = max(r_a, radii[0] * 1.1 + abs(c_a))
            for q, rho in zip(centers, radii):
                if np.linalg.norm(q) < 1e-12:
                    continue
                gap = abs(q[axis] - c_a) - rho * 1.15
                if gap < r_a:
                    r_a = gap
            if r_a < 0.15:
                continue
            ratio = min(abs(q[axis] - c_a) / r_a
                        for q in centers if np.linalg.norm(q) > 1e-12) \
                if len(centers) > 1 else 10.0
            if best is None or ratio > best[0]:
                best = (ratio, (c_a, r_a))
        # thin clearance would demand exponents whose expanded coefficients
        # cancel catastrophically at the other nodes
        if best is None or best[0] < 1.8:
            return None
        disks.append(best[1])
    disks = tuple(disks)

    centers_arr = np.array(centers)
    try:
        cand = _damped_contractor(centers_arr, disks)
    except (DegreeCapExceeded, GeneralPositionViolated):
        return None
    # measured exactness at the nodes rejects cancellation-fragile fits
    fix_err = float(np.max(np.linalg.norm(
        cand.apply(centers_arr) - centers_arr, axis=-1)))
    jet_err = max(float(np.abs(automaps.jacobian_at(cand, q)
                               - 0.5 * np.eye(2)).max())
                  for q in centers)
    if fix_err > 1e-10 or jet_err > 1e-8:
        return None
    for q, rho, dlt in zip(centers, radii, deltas):
        z = sampling.ball_points(q, rho, 800, seed=rng_seed + 5)
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            dev = np.linalg.norm(cand.apply(z) - (q + (z - q) / 2), axis=-1)
        worst = float(dev.max()) if np.all(np.isfinite(dev)) else np.inf
        if worst > dlt / 2:
            return None
    return cand


def _disjoint_stage(cfg, state, stage, wit_grid, wit_orbit, used_witness,
                    guard_orbit, rng_seed, witness_budget):
    rng = np.random.default_rng(rng_seed)
    centers = list(state.centers)
    radii = list(state.radii)

    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        norms = np.linalg.norm(guard_orbit, axis=-1)
    cloud_r = float(norms.max())

    # birth: a new center well outside the tracked cloud, on a seeded
    # direction spread; the radius cascades down until the damping curvature
    # at its node is compatible with the ball's own (d)-budget
    # birth: probe a seeded ring of original-space points; where a probe's
    # current image clears the damped cloud with headroom, place the new
    # ball so the image sits in its capture annulus.  The probe itself is a
    # fully trackable witness, and its pullback bookkeeping is exact.
    working = state.composed()
    cloud_disks = [bounding_disk(guard_orbit[:, a], pad=0.02) for a in (0, 1)]
    birth_probes = None
    if len(centers) < cfg.m:
        n_probe = 64
        x_ring = sampling.sphere_points(np.zeros(2, dtype=complex), 1.0,
                                        n_probe, seed=rng_seed + 17)
        birth_probes = []
        for scale in (6.0, 9.0, 13.0, 19.0, 28.0):
            pts = scale * x_ring
            with np.errstate(over="ignore", invalid="ignore", under="ignore"):
                imgs = working.apply(pts)
            for x, y in zip(pts, imgs):
                if not np.all(np.isfinite(y)) or np.linalg.norm(y) > 40:
                    continue
                if all(abs(y[a] - c) >= 3.2 * r
                       for a, (c, r) in enumerate(cloud_disks)):
                    birth_probes.append((x, y))
        if not birth_probes:
            raise StageFailed(stage, "no probe image clears the damped cloud")
        rng.shuffle(birth_probes)

    phi = None
    born = None
    witness_x = None
    rho_cascade = [cfg.rho_new * 4.0 ** -k for k in range(8)] \
        if birth_probes is not None else [None]
    for rho_new in rho_cascade:
        if phi is not None:
            break
        for probe in (birth_probes[:16] if birth_probes is not None else [None]):
            trial_centers = list(centers)
            trial_radii = list(radii)
            q_new = None
            if rho_new is not None:
                x, y = probe
                q_new = y * (1 + 1.35 * rho_new / np.linalg.norm(y))
                if not all(np.linalg.norm(q_new - c) >= SEPARATION_FACTOR
                           * (rho_new + rr) * 1.02
                           for c, rr in zip(centers, radii)):
                    continue
                trial_centers.append(q_new)
                trial_radii.append(rho_new)
            phi = _fit_contractor(cfg, trial_centers, trial_radii, guard_orbit,
                                  rng_seed)
            if phi is not None:
                centers, radii = trial_centers, trial_radii
                if q_new is not None:
                    with np.errstate(over="ignore", invalid="ignore",
                                     under="ignore"):
                        p_new = working.apply_inverse(q_new)
                    born = (q_new, p_new, rho_new)
                    witness_x = probe[0]
                break
    if phi is None:
        raise StageFailed(stage, "no tame contractor at this stage geometry")
    deltas = [schwarz_delta(r, *BRACKET) for r in radii]

    # witnesses: the birth probe rides the contractor's jet into the new
    # ball; the origin basin gets witness-grid points that the funnel pulls
    # into its ball this stage (tracked and cleanly classifiable)
    wits = []
    if witness_x is not None:
        wits.append({"basin": len(centers) - 1, "point": witness_x,
                     "source_image": working.apply(witness_x),
                     "grid_index": -1})
    cap = np.zeros(len(wit_grid), dtype=bool)
    for q, rho in zip(centers, radii):
        cap |= np.linalg.norm(wit_orbit - q, axis=-1) <= rho
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        nxt = phi.apply(wit_orbit)
    landing = np.linalg.norm(nxt - centers[0], axis=-1) <= radii[0] * 0.98
    for gi in np.flatnonzero(~cap & ~used_witness & landing)[:witness_budget]:
        wits.append({"basin": 0, "point": wit_grid[gi].copy(),
                     "source_image": wit_orbit[gi].copy(),
                     "grid_index": int(gi)})

    # witness capture check (i)
    for w in wits:
        bi = w["basin"]
        img = phi.apply(w["source_image"])
        if np.linalg.norm(img - centers[bi]) > radii[bi]:
            raise StageFailed(stage, f"witness for basin {bi} missed its ball")
    return phi, wits, born, radii


# ---------------------------------------------------------------------------
# shared tuck machinery (lines / varieties)
# ---------------------------------------------------------------------------

@dataclass
class TuckResult:
    map: object          # the stage map A^s o sigma
    factors: list        # certificate factor list
    s: int
    sigma_sup: float
    expel_final: np.ndarray


@dataclass(frozen=True)
class Protection:
    """Per-coordinate damping disks: sigma's shear polynomials are suppressed
    on these projection disks, so sigma is near the identity on everything
    whose projections they cover.  One disk per axis (multiplying nested
    damping factors would blow up at the larger disk's edge); each disk must
    contain the entry disk of radius base_radius, and is enlarged if not.
    """

    disk_z: tuple = None           # (center, radius) or None for the base disk
    disk_w: tuple = None
    base_radius: float = 0.75

    def chains(self):
        out = []
        for d in (self.disk_z, self.disk_w):
            if d is None:
                out.append(((0j, self.base_radius),))
                continue
            c, r = d
            if abs(c) + self.base_radius > r:
                r = abs(c) + self.base_radius  # grow to swallow the base disk
            out.append(((complex(c), float(r)),))
        return tuple(out)

    def clearance(self, point, ratio=1.2):
        """Do both projections of the point clear every damping disk?"""
        for axis, chain in enumerate(self.chains()):
            for c, r in chain:
                if abs(point[axis] - c) < r * ratio:
                    return False
        return True

    def max_radius(self):
        return max(r for chain in self.chains() for _, r in chain)


def bounding_disk(points, pad=0.05):
    """(center, radius) of a disk containing the complex projections."""
    pts = np.asarray(points, dtype=complex).ravel()
    center = complex(pts.mean())
    rad = float(np.abs(pts - center).max()) * (1 + pad) + 1e-9
    return (center, rad)


def _protected_boost_layer(sources, targets, protection: Protection, eps,
                           max_degree=poly.DEGREE_CAP):
    """One relocation layer (two shears) whose polynomials are damped on the
    protection chains.  Verified via the max-modulus disk bound: the
    returned sup bounds the true displacement on every protected disk."""
    chain_z, chain_w = protection.chains()
    disp = 0.0
    shears = []
    for axis, (nodes, values, chain) in enumerate((
            (sources[:, 0], targets[:, 1] - sources[:, 1], chain_z),
            (targets[:, 1], targets[:, 0] - sources[:, 0], chain_w))):
        if np.allclose(values, 0):
            continue
        # the origin is an exact zero node: the emitted maps must fix the
        # basin center, so the constant coefficient is forced to exactly 0
        nodes = np.concatenate([nodes, [0.0 + 0.0j]])
        values = np.concatenate([values, [0.0 + 0.0j]])
        n_exp = max(1, (max_degree - len(nodes)) // max(len(chain), 1))
        best = None
        for n in range(1, n_exp + 1):
            damp = np.ones(1, dtype=complex)
            for c, r in chain:
                damp = poly.polymul(damp, poly.polypow(
                    np.array([-c, 1.0], dtype=complex) / r, n))
            dvals = poly.polyval(damp, nodes)
            if np.any((np.abs(dvals) < 1e-9) & (np.abs(values) > 0)):
                raise GeneralPositionViolated(
                    "a boosted point projects into a protected disk")
            q_vals = np.where(np.abs(values) > 0, values / dvals, 0.0)
            g = poly.polymul(poly.lagrange_fit(nodes, q_vals), damp)
            if poly.degree(g) > max_degree:
                break
            g[0] = 0.0
            sup = max(_disk_sup_chain(g, chain), 1e-300)
            if best is None or sup < best[1]:
                best = (g, sup)
            if sup * 1.05 <= eps:
                break
        if best is None or best[1] * 1.05 > eps:
            raise MoverFailed("protected boost exceeded its budget",
                              diagnostic={"sup": None if best is None
                                          else best[1], "eps": eps})
        shears.append(Shear(axis=1 - axis, g=best[0], source=axis, dim=2))
        disp += best[1]
    return Composition(tuple(shears)), disp


def _disk_sup_chain(g, chain):
    return max(mover._disk_sup(g, c, r) for c, r in chain)


def _axis_clear(value, chain, ratio=1.3):
    return all(abs(value - c) >= r * ratio for c, r in chain)


def _boost_targets(current, protection, target_comp, expel_norm, jitter, rng):
    """Per-point zigzag targets: a coordinate may only move when the layer's
    interpolation node for it clears the protected disks (step 1 moves w and
    is keyed on the z projection; step 2 moves z, keyed on the target w)."""
    chain_z, chain_w = protection.chains()
    factor = 2.5 if jitter < 4 else 1.7
    out = np.array(current, dtype=complex, copy=True)
    moved = False
    for i, (a, b) in enumerate(current):
        if np.hypot(abs(a), abs(b)) >= expel_norm:
            continue
        phase = np.exp(1j * (0.31 * jitter * (i + 1) + 0.1 * jitter ** 2))
        t_w = b
        if _axis_clear(a, chain_z) and abs(b) < target_comp:
            if abs(b) < 1e-9 or not _axis_clear(b, chain_w, 1.0):
                jump = max(r * 1.6 for _, r in chain_w)
                t_w = jump * phase
            else:
                t_w = b * min(factor, target_comp * 1.02 / abs(b))
        t_z = a
        if _axis_clear(t_w, chain_w) and abs(a) < target_comp:
            if abs(a) < 1e-9 or not _axis_clear(a, chain_z, 1.0):
                jump = max(r * 1.6 for _, r in chain_z)
                t_z = jump * phase
            else:
                t_z = a * min(factor, target_comp * 1.02 / abs(a))
        if t_z != a or t_w != b:
            moved = True
        out[i] = (t_z, t_w)
    return out if moved else None


def tuck_step(anchor_points, s=None, expel_points=(), expel_norm=None,
              eps=0.05, seed=0, protection: Protection = None, delta=0.05,
              rest_norm=None):
    """Stage map A^s o sigma.

    sigma is near the identity (within eps, certified by the max-modulus
    bound on every protection disk) wherever the protection chains cover,
    and boosts each expel point out to expel_norm through layered damped
    shears, zigzagging directions when a projection would collide with a
    protected disk.  With s=None the half-scale power is chosen so the
    measured anchors land inside 0.8*delta; factors pair sigma with the
    first half-scale so each one is a valid certificate factor.
    """
    rng = np.random.default_rng(seed)
    anchors = np.asarray(anchor_points, dtype=complex).reshape(-1, 2)
    expels = np.asarray(expel_points, dtype=complex).reshape(-1, 2)
    if protection is None:
        protection = Protection()
    chain_z, chain_w = protection.chains()
    for q in expels:
        if not (_axis_clear(q[0], chain_z) or _axis_clear(q[1], chain_w)):
            raise ValueError("an expelled point sits inside the protected "
                             "region on both axes; no shear can move it")

    if s is None:
        reach = float(np.linalg.norm(anchors, axis=-1).max()) if len(anchors) \
            else 1.0
        s = _tuck_scale(max(reach, protection.base_radius) + eps, delta)
    if s < 0:
        raise ValueError("s must be nonnegative")

    if expel_norm is None and len(expels):
        if rest_norm is None:
            rest_norm = max(2.0, protection.max_radius() * 2.0)
        expel_norm = rest_norm * 2.0 ** s * 1.05

    layers = []
    current = expels.copy()
    if len(expels) and expel_norm is not None:
        budget = eps / 2
        n_layer = 0
        target_comp = expel_norm / np.sqrt(2) * 1.02
        while float(np.linalg.norm(current, axis=-1).min()) < expel_norm:
            n_layer += 1
            if n_layer > 28:
                raise MoverFailed("expulsion did not reach its radius",
                                  diagnostic={"reached": float(
                                      np.linalg.norm(current, axis=-1).min())})
            layer = None
            for jitter in range(8):
                targets = _boost_targets(current, protection, target_comp,
                                         expel_norm, jitter, rng)
                if targets is None:
                    continue
                try:
                    layer, _ = _protected_boost_layer(current, targets,
                                                      protection, budget)
                    break
                except (GeneralPositionViolated, MoverFailed):
                    continue
            if layer is None:
                raise MoverFailed("expulsion layer construction failed",
                                  diagnostic={"layer": n_layer,
                                              "positions": [
                                                  [abs(c[0]), abs(c[1])]
                                                  for c in current]})
            layers.append(layer)
            budget /= 2
            current = layer.apply(current)
    sigma = Composition(tuple(layers))

    stage_map = Composition((sigma,) + tuple(HalfScale(2) for _ in range(s)))
    factors = ([Composition(tuple(layers) + (HalfScale(2),))]
               + [HalfScale(2)] * (s - 1)) if s >= 1 else [sigma]

    # sampled identity check on the base ball plus bound re-check on anchors
    base = sampling.ball_points(np.zeros(2, dtype=complex),
                                protection.base_radius, 1200, seed=seed + 3)
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        d_base = np.linalg.norm(sigma.apply(base) - base, axis=-1)
        sup = float(d_base.max()) if np.all(np.isfinite(d_base)) else np.inf
        if len(anchors):
            d_anc = np.linalg.norm(sigma.apply(anchors) - anchors, axis=-1)
            sup = max(sup, float(d_anc.max())
                      if np.all(np.isfinite(d_anc)) else np.inf)
    if sup >= eps:
        raise MoverFailed("tuck sigma exceeded its identity budget",
                          diagnostic={"sup": sup, "eps": eps})
    return TuckResult(map=stage_map, factors=factors, s=s, sigma_sup=sup,
                      expel_final=current)


def _tuck_scale(max_norm, delta, floor=1):
    """Half-scale exponent pulling everything of the given norm into 0.8 delta."""
    return max(floor, int(np.ceil(np.log2(max(max_norm, 1e-9) / (0.8 * delta)))))


# ---------------------------------------------------------------------------
# lines
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LineSpec:
    """Affine complex line origin + t * direction in C^2."""

    origin: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        o = np.asarray(self.origin, dtype=complex)
        d = np.asarray(self.direction, dtype=complex)
        n = np.linalg.norm(d)
        if n < 1e-12:
            raise ValueError("degenerate line direction")
        object.__setattr__(self, "origin", o)
        object.__setattr__(self, "direction", d / n)

    def at(self, t):
        t = np.asarray(t, dtype=complex)
        return self.origin + t[..., None] * self.direction

    def param_of(self, z):
        d = self.direction
        return np.asarray((z - self.origin) @ d.conj(), dtype=complex)

    def contains(self, z, tol=1e-9):
        t = self.param_of(z)
        return np.linalg.norm(self.at(np.atleast_1d(t))[0] - z) < tol * (
            1 + np.linalg.norm(z))

    def to_obj(self):
        return {"origin": cvec(self.origin), "direction": cvec(self.direction)}

    @classmethod
    def from_obj(cls, obj):
        return cls(origin=cvec_from(obj["origin"]),
                   direction=cvec_from(obj["direction"]))


@dataclass
class LinesConfig:
    lines: tuple
    stages: int = 6
    seed: int = 7
    schedule_window: float = 2.5   # real-axis window carrying the dense schedule
    trace_resolution: int = 48     # raster cells per unit in line coordinates
    excluded_im: float = 1.2       # imaginary offset of the default excluded points
    eps_sigma: float = 0.05

    def __post_init__(self):
        self.lines = tuple(self.lines)
        if not (1 <= len(self.lines) <= 3):
            raise ValueError("between 1 and 3 lines")
        if self.stages > 10:
            raise ValueError("stages capped at 10 (desk scale)")


def build_line_intersector(cfg: LinesConfig, point_schedules=None):
    """Basin at the origin meeting each line in a growing connected trace.

    Per stage and line: the captured trace of the line is rasterized in its
    own coordinates, the next schedule point is joined to it with an
    avoiding path (dodging excluded points living on the line), the path is
    covered by keep balls and tucked into the entry ball by a half-scale
    power, while every excluded image is boosted outside the stage's safe
    radius.  Excluded points (one per line, chosen off the schedule axis)
    are verified non-captured at every stage.
    """
    rng = np.random.default_rng(cfg.seed)
    state = StageState(kind="lines")
    state.centers = [np.zeros(2, dtype=complex)]
    state.preimages = [np.zeros(2, dtype=complex)]
    state.radii = [0.5]
    state.births = [1]
    delta = schwarz_delta(0.5, *BRACKET)

    if point_schedules is None:
        point_schedules = []
        for li in range(len(cfg.lines)):
            # dense, seeded; the anchor point is the parameter nearest the
            # origin so the first induction step holds with the half-scale map
            pts = np.sort(rng.uniform(-cfg.schedule_window, cfg.schedule_window,
                                      cfg.stages + 2))
            anchor = pts[np.argmin(np.abs(pts))]
            rest = [p for p in pts if p != anchor]
            point_schedules.append([anchor] + rest)
    schedules = [list(map(complex, s)) for s in point_schedules]

    state.maps = [HalfScale(2)]
    state.factors = [HalfScale(2)]
    state.stage = 1
    active = [0 for _ in cfg.lines]
    path_log = []

    # first induction step: the anchor point of line 1 is already captured by
    # the half-scale map, so it must start inside the 2-ball
    anchor0 = cfg.lines[0].at(np.array([schedules[0][0]]))[0]
    if np.linalg.norm(anchor0) >= 2.0:
        raise StageFailed(1, "line 1's anchor point starts outside the 2-ball")
    active[0] = 1

    # excluded points: one per line, off the schedule axis and far enough out
    # that the expulsion shears can reach past the protected line tubes
    for li, line in enumerate(cfg.lines):
        sign = 1 if li % 2 == 0 else -1
        im_off = cfg.excluded_im
        tube = 0.75 + (np.linalg.norm(line.origin)
                       + 1.2 * cfg.schedule_window) / 2
        q = line.at(np.array([complex(0, sign * im_off)]))[0]
        while np.linalg.norm(q) <= max(3.2, 2.6 * tube):
            im_off *= 1.3
            q = line.at(np.array([complex(0, sign * im_off)]))[0]
        state.excluded.append(q)
        state.excluded_births.append(1)

    for stage in range(2, cfg.stages + 1):
        stage_factors = []
        stage_parts = []
        for li, line in enumerate(cfg.lines):
            target = min(stage - li, len(schedules[li]))
            if target <= active[li]:
                continue
            working = Composition(tuple(state.maps + stage_parts))
            tuck = _line_stage(cfg, state, line, schedules[li][:target],
                               working, delta, seed=cfg.seed * 100 + stage * 10 + li,
                               log=path_log, stage=stage)
            stage_parts.append(tuck.map)
            stage_factors.extend(tuck.factors)
            active[li] = target
        if not stage_parts:
            break
        stage_map = Composition(tuple(stage_parts))
        state.maps.append(stage_map)
        state.factors.extend(stage_factors)
        state.stage = stage
        _verify_line_invariants(cfg, state, schedules, active, delta, stage)

    cert = certificate_for_half_scale_perturbations(np.zeros(2, dtype=complex), 0.5)
    seq = basin.AutoSequence(state.factors, cert)
    return seq, state, path_log


def _line_stage(cfg, state, line, sched_params, working, delta, seed, log, stage):
    rng = np.random.default_rng(seed)
    res = cfg.trace_resolution
    win = cfg.schedule_window * 1.6

    # captured trace of the line in its own coordinates
    re = np.linspace(-win, win, int(2 * win * res))
    im = np.linspace(-0.6, 0.6, max(int(1.2 * res), 8))
    flat = (re[None, :] + 1j * im[:, None]).ravel()
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        img = working.apply(line.at(flat))
        norms = np.linalg.norm(np.where(np.isfinite(img), img, 1e60), axis=-1)
    captured = flat[norms <= 1.0]

    new_t = sched_params[-1]
    anchor_t = sched_params[0]
    base_pts = np.concatenate([captured, np.array(sched_params, dtype=complex)])
    k_raster = hull.from_points(base_pts, resolution=res, pad=0.8)
    k_raster = hull.poly_hull(k_raster)

    q_params = [complex(line.param_of(q)) for q in state.excluded
                if line.contains(q)]
    try:
        joined = hull.connect_avoiding(k_raster, new_t, anchor_t, q_params)
    except NoPathAtResolution:
        raise StageFailed(stage, f"no avoiding path on line at res {res}")
    log.append({"stage": stage, "line": line.to_obj(),
                "joined_params": [new_t.real, new_t.imag],
                "excluded_params": [[q.real, q.imag] for q in q_params],
                "planar_hull_excluded": True, "proof_grade": False})

    # anchors: the joined path cells plus the dense schedule window, all
    # mapped forward; the tuck protects their projection disks, so the whole
    # line tube between them is carried into the entry ball as one piece
    cells = joined.occupied_points()
    if len(cells) > 400:
        cells = cells[rng.choice(len(cells), 400, replace=False)]
    window = np.linspace(-cfg.schedule_window * 1.2, cfg.schedule_window * 1.2,
                         800).astype(complex)
    params = np.concatenate([np.asarray(cells), window,
                             np.array(sched_params, dtype=complex)])
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        anchors = working.apply(line.at(params))
    ok = np.isfinite(anchors).all(axis=-1)
    anchors = anchors[ok]

    protection = Protection(disk_z=bounding_disk(anchors[:, 0]),
                            disk_w=bounding_disk(anchors[:, 1]))
    expels = np.array([working.apply(q) for q in state.excluded])
    try:
        return tuck_step(anchors, s=None, expel_points=expels, eps=cfg.eps_sigma,
                         seed=seed + 5, protection=protection, delta=delta)
    except MoverFailed as err:
        raise StageFailed(stage, f"line tuck failed: {err}") from err


def _verify_line_invariants(cfg, state, schedules, active, delta, stage):
    comp = state.composed()
    for li, line in enumerate(cfg.lines):
        pts = line.at(np.array(schedules[li][: active[li]], dtype=complex))
        if len(pts) == 0:
            continue
        norms = np.linalg.norm(comp.apply(pts), axis=-1)
        if norms.max() >= 1.0:
            raise StageFailed(stage, f"(2) a schedule point of line {li} "
                                     f"left the unit ball: {norms.max():.3f}")
    for q in state.excluded:
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            img = comp.apply(q)
            n = float(np.linalg.norm(img)) if np.all(np.isfinite(img)) else np.inf
        if n <= 1.0:
            raise StageFailed(stage, "(4) an excluded point entered the ball")


# ---------------------------------------------------------------------------
# varieties
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VarietySpec:
    """Coordinate axis or polynomial-parametrized curve t -> (x(t), y(t))."""

    kind: str                  # "axis" | "curve"
    axis: int = 0
    x_poly: tuple = (0.0, 1.0)
    y_poly: tuple = (0.0,)

    def at(self, t):
        t = np.asarray(t, dtype=complex)
        if self.kind == "axis":
            out = np.zeros(t.shape + (2,), dtype=complex)
            out[..., self.axis] = t
            return out
        return np.stack([poly.polyval(np.asarray(self.x_poly, complex), t),
                         poly.polyval(np.asarray(self.y_poly, complex), t)],
                        axis=-1)

    def compact_samples(self, radius, n=220, seed=0):
        """Samples of (variety) intersect (closed ball of the given radius)."""
        t = sampling.disk_points(0, radius * 1.4, 4 * n, seed=seed)
        pts = self.at(t)
        keep = np.linalg.norm(pts, axis=-1) <= radius
        pts = pts[keep]
        if len(pts) > n:
            pts = pts[:n]
        if self.kind == "axis" or len(pts) >= 8:
            return pts
        raise ValueError("curve truncation produced too few samples")

    def contains(self, z, tol=1e-7, search_radius=20.0):
        if self.kind == "axis":
            return bool(abs(z[1 - self.axis]) < tol)
        t = sampling.disk_points(0, search_radius, 4000, seed=3)
        return bool(np.min(np.linalg.norm(self.at(t) - z, axis=-1)) < tol)

    def to_obj(self):
        from .serialize import cnum
        return {"kind": self.kind, "axis": self.axis,
                "x_poly": [cnum(c) for c in np.asarray(self.x_poly, complex)],
                "y_poly": [cnum(c) for c in np.asarray(self.y_poly, complex)]}

    @classmethod
    def from_obj(cls, obj):
        return cls(kind=obj["kind"], axis=obj["axis"],
                   x_poly=tuple(cnum_from(c) for c in obj["x_poly"]),
                   y_poly=tuple(cnum_from(c) for c in obj["y_poly"]))


@dataclass
class VarietiesConfig:
    varieties: tuple
    excluded_p: np.ndarray
    stages: int = 6
    seed: int = 9
    eps_sigma: float = 0.05
    samples_per_compact: int = 200

    def __post_init__(self):
        self.varieties = tuple(self.varieties)
        if not (1 <= len(self.varieties) <= 3):
            raise ValueError("between 1 and 3 varieties")
        if self.stages > 10:
            raise ValueError("stages capped at 10 (desk scale)")
        p = np.asarray(self.excluded_p, dtype=complex)
        if np.linalg.norm(p) <= 2.0:
            raise ValueError("excluded point must lie outside the closed 2-ball")
        for v in self.varieties:
            if v.contains(p):
                raise ValueError("excluded point must avoid every variety")
        self.excluded_p = p


def build_variety_container(cfg: VarietiesConfig):
    """Basin at the origin containing growing compacts of every variety.

    Stage j tucks the sampled compacts (variety k cut to the ball of radius
    j+1-k) into the entry ball with a half-scale power while boosting the
    excluded point's image outward; each stage re-verifies containment of
    all previously committed compact samples and the exclusion margin.
    """
    state = StageState(kind="varieties")
    state.centers = [np.zeros(2, dtype=complex)]
    state.preimages = [np.zeros(2, dtype=complex)]
    state.radii = [0.5]
    state.births = [1]
    state.excluded = [cfg.excluded_p]
    state.excluded_births = [1]
    delta = schwarz_delta(0.5, *BRACKET)

    committed_samples = [cfg.varieties[0].compact_samples(
        1.0, cfg.samples_per_compact, seed=cfg.seed)]
    state.maps = [HalfScale(2)]
    state.factors = [HalfScale(2)]
    state.stage = 1
    tuck_log = []

    # future material is protected from the start so its images contract
    # cleanly instead of being scrambled by earlier expulsion shears
    future_samples = []
    for k, v in enumerate(cfg.varieties):
        max_radius = float(cfg.stages - k)
        if max_radius >= 1:
            future_samples.append(v.compact_samples(
                max_radius, 2 * cfg.samples_per_compact, seed=cfg.seed + 7 * k))
    future = np.concatenate(future_samples)

    for stage in range(2, cfg.stages + 1):
        working = state.composed()
        new_samples = []
        for k, v in enumerate(cfg.varieties):
            if k >= stage:
                continue
            radius = float(stage - k)
            new_samples.append(v.compact_samples(
                radius, cfg.samples_per_compact, seed=cfg.seed + 17 * stage + k))
        all_samples = np.concatenate(committed_samples + new_samples)
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            imgs = working.apply(all_samples)
            shield = working.apply(future)
        protection = Protection(disk_z=bounding_disk(shield[:, 0]),
                                disk_w=bounding_disk(shield[:, 1]))
        expel = working.apply(cfg.excluded_p)[None, :]
        if not protection.clearance(expel[0]):
            raise StageFailed(stage, "the excluded point's projections fall "
                                     "inside the protected variety disks; "
                                     "place it further out",
                              state_dump=state.to_obj())
        tuck = tuck_step(imgs, s=None, expel_points=expel, eps=cfg.eps_sigma,
                         seed=cfg.seed * 100 + stage, protection=protection,
                         delta=delta)
        state.maps.append(tuck.map)
        state.factors.extend(tuck.factors)
        state.stage = stage
        committed_samples.extend(new_samples)
        tuck_log.append({"stage": stage, "s": tuck.s, "sigma_sup": tuck.sigma_sup,
                         "anchor_count": int(len(all_samples))})

        comp = state.composed()
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            post = comp.apply(np.concatenate(committed_samples))
            post_n = np.linalg.norm(np.where(np.isfinite(post), post, 1e60),
                                    axis=-1)
        if float(post_n.max()) >= 1.0:
            raise StageFailed(stage, f"(3) a committed compact sample left "
                                     f"the ball: {post_n.max():.3f}",
                              state_dump=state.to_obj())
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            img = comp.apply(cfg.excluded_p)
            n = float(np.linalg.norm(img)) if np.all(np.isfinite(img)) else np.inf
        if n <= 1.0:
            raise StageFailed(stage, "excluded point entered the ball",
                              state_dump=state.to_obj())

    cert = certificate_for_half_scale_perturbations(np.zeros(2, dtype=complex), 0.5)
    seq = basin.AutoSequence(state.factors, cert)
    return seq, state, tuck_log, committed_samples

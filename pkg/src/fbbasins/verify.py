"""Named verification suites behind the `verify` CLI subcommand.

Each suite re-runs an invariant family and returns (ok, report-dict); the
CLI maps failures to exit code 1 with the machine-readable report on stdout.
"""

from __future__ import annotations

import numpy as np

from . import basin, builders, hull, mover
from .errors import FBError, RatioViolation

SUITES = ("certificate", "convergence", "union-formula", "disjointness",
          "connectedness", "containment", "hull-props", "mover-props")


def run_suite(name, target=None, seed=0):
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {SUITES}")
    return _DISPATCH[name](target, seed)


def _need_sequence(target):
    if isinstance(target, basin.AutoSequence):
        return target
    return basin.AutoSequence.from_obj(target, check=False)


def _suite_certificate(target, seed):
    seq = _need_sequence(target)
    try:
        seq.verify_certificate(1000, seed=seed + 7)
    except FBError as err:
        return False, {"suite": "certificate", "ok": False, "error": str(err)}
    return True, {"suite": "certificate", "ok": True,
                  "maps": len(seq.maps), "bracket": [seq.cert.s, seq.cert.r]}


def _suite_convergence(target, seed):
    seq = _need_sequence(target)
    try:
        rep = basin.convergence_report(seq, n_samples=128, j_max=20,
                                       seed=seed + 11)
    except RatioViolation as err:
        return False, {"suite": "convergence", "ok": False,
                       "report": err.report.to_obj()}
    return True, {"suite": "convergence", "ok": True, "report": rep.to_obj()}


def _suite_union_formula(target, seed):
    seq = _need_sequence(target)
    rng = np.random.default_rng(seed)
    pts = seq.cert.p + (rng.uniform(-2, 2, (2000, seq.cert.dim))
                        + 1j * rng.uniform(-2, 2, (2000, seq.cert.dim)))
    rep = basin.union_formula_check(seq, pts, budget=300)
    return rep.ok, {"suite": "union-formula", "ok": rep.ok, **rep.to_obj()}


def _need_state(target):
    if isinstance(target, builders.StageState):
        return target
    return builders.StageState.from_obj(target)


def _suite_disjointness(target, seed):
    state = _need_state(target)
    bad = builders.verify_stage_invariants(state, seed=seed + 3)
    report = {"suite": "disjointness", "ok": not bad, "violations": bad}
    if bad:
        return False, report
    grid = builders.generic_slice_grid(4.0, 60)
    attracted = []
    for sq in builders.center_sequences(state, check=False):
        st, _, _ = basin.sweep(sq, grid, budget=200, escape_radius=1e3)
        attracted.append(st == 1)
    doubles = 0
    for i in range(len(attracted)):
        for k in range(i + 1, len(attracted)):
            doubles += int(np.sum(attracted[i] & attracted[k]))
    report["double_classified"] = doubles
    report["ok"] = doubles == 0
    return report["ok"], report


def _suite_connectedness(target, seed):
    state = _need_state(target)
    seq = basin.AutoSequence(
        state.factors,
        builders.certificate_for_half_scale_perturbations(
            np.zeros(2, dtype=complex), 0.5), check=False)
    runs = []
    ok = True
    for q in state.excluded:
        v = basin.classify(seq, q, budget=400)
        if v.is_attracted:
            ok = False
    report = {"suite": "connectedness", "ok": ok,
              "excluded_attracted": not ok, "runs": runs}
    return ok, report


def _suite_containment(target, seed):
    state = _need_state(target)
    seq = basin.AutoSequence(
        state.factors,
        builders.certificate_for_half_scale_perturbations(
            np.zeros(2, dtype=complex), 0.5), check=False)
    ok = True
    for q in state.excluded:
        if basin.classify(seq, q, budget=400).is_attracted:
            ok = False
    return ok, {"suite": "containment", "ok": ok}


def _suite_hull_props(target, seed):
    rng = np.random.default_rng(seed)
    failures = []
    for trial in range(30):
        mask = np.zeros((48, 48), dtype=bool)
        mask[1:-1, 1:-1] = rng.random((46, 46)) < 0.25
        if not mask.any():
            continue
        k = hull.PlanarCompact(bbox=(0, 0, 3, 3), resolution=16, mask=mask)
        h1 = hull.poly_hull(k)
        if not (hull.poly_hull(h1).mask == h1.mask).all():
            failures.append(f"idempotence {trial}")
        grow = k.mask | (rng.random(k.mask.shape) < 0.05)
        grow[0] = grow[-1] = False
        grow[:, 0] = grow[:, -1] = False
        if not (h1.mask <= hull.poly_hull(k.with_mask(grow)).mask).all():
            failures.append(f"monotonicity {trial}")
    return not failures, {"suite": "hull-props", "ok": not failures,
                          "failures": failures}


def _suite_mover_props(target, seed):
    rng = np.random.default_rng(seed)
    successes, attempts = 0, 20
    for trial in range(attempts):
        def rand_pt():
            while True:
                p = rng.uniform(-6, 6, 2) + 1j * rng.uniform(-6, 6, 2)
                if np.linalg.norm(p) >= 3:
                    return p
        req = mover.MoveRequest(keep_balls=[((0, 0), 1.0)],
                                sources=[rand_pt()], targets=[rand_pt()],
                                epsilon=0.05, seed=seed + trial,
                                n_samples=2000)
        try:
            m = mover.build_point_mover(req)
        except FBError:
            continue
        if mover.verify_point_mover(m, req, seed=seed + trial + 999)["passed"]:
            successes += 1
    ok = successes >= int(0.95 * attempts)
    return ok, {"suite": "mover-props", "ok": ok,
                "successes": successes, "attempts": attempts}


_DISPATCH = {
    "certificate": _suite_certificate,
    "convergence": _suite_convergence,
    "union-formula": _suite_union_formula,
    "disjointness": _suite_disjointness,
    "connectedness": _suite_connectedness,
    "containment": _suite_containment,
    "hull-props": _suite_hull_props,
    "mover-props": _suite_mover_props,
}

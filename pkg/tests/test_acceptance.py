"""Acceptance suite: every criterion at its stated tolerance, one test per
criterion, printing one pass/fail line each.

Run with `pytest tests/test_acceptance.py -v -s` for the lines.
"""

import json
import subprocess
import sys
import time

import numpy as np
import pytest

from fbbasins import automaps as am
from fbbasins import basin, builders, hull, mover
from fbbasins.errors import MoverFailed, NoPathAtResolution

from conftest import (
    henon_certificate,
    henon_map,
    reference_certificate,
    reference_map,
)


def _line(num, ok, detail):
    status = "PASS" if ok else "FAIL"
    print(f"\nACCEPTANCE {num:2d} {status}: {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def ref_seq():
    return basin.AutoSequence([reference_map()], reference_certificate(),
                              cyclic=True)


@pytest.fixture(scope="module")
def henon_seq():
    return basin.AutoSequence([henon_map()], henon_certificate(), cyclic=True)


@pytest.fixture(scope="module")
def disjoint_build():
    t0 = time.monotonic()
    cfg = builders.DisjointConfig(m=3, stages=8, seed=42)
    seq, state = builders.build_disjoint_basins(cfg)
    return cfg, seq, state, time.monotonic() - t0


def test_criterion_1_limit_rate(ref_seq, henon_seq):
    t0 = time.monotonic()
    rep = basin.convergence_report(ref_seq, n_samples=128, j_max=20)
    bound = 0.55 ** 2 / 0.45 * 1.1
    ok_ref = (not rep.exact) and rep.fitted_ratio <= bound
    rep_h = basin.convergence_report(henon_seq, n_samples=128, j_max=20)
    ok_hen = rep_h.fitted_ratio <= rep_h.predicted_ratio * 1.1
    elapsed = time.monotonic() - t0
    _line(1, ok_ref and ok_hen and elapsed < 10.0,
          f"geometric fit {rep.fitted_ratio:.3f} <= {bound:.3f} (reference), "
          f"{rep_h.fitted_ratio:.3f} <= {rep_h.predicted_ratio * 1.1:.3f} "
          f"(henon), {elapsed:.1f}s < 10s")


def test_criterion_2_functional_equation(ref_seq, henon_seq):
    worst = 0.0
    for seq, f in ((ref_seq, reference_map()), (henon_seq, henon_map())):
        cert = seq.cert
        a_c = am.jacobian_at(f, cert.p)
        pts = cert.ball_points(1000, radius=cert.delta * 0.999, seed=77)
        for z in pts[:1000]:
            phi_z, _ = basin.phi_eval(seq, z, tol=1e-11)
            phi_fz, _ = basin.phi_eval(seq, f.apply(z), tol=1e-11)
            lhs = cert.p + a_c @ (phi_z - cert.p)
            worst = max(worst, float(np.linalg.norm(lhs - phi_fz)))
    _line(2, worst < 1e-8,
          f"functional equation residual {worst:.2e} < 1e-8 on 1000 samples, "
          f"both test maps")


def test_criterion_3_unit_differential(ref_seq, henon_seq):
    worst = 0.0
    for seq in (ref_seq, henon_seq):
        d1 = basin.dphi_at_p(seq, h=1e-5)
        d2 = basin.dphi_at_p(seq, h=5e-6)
        extrap = (4 * d2 - d1) / 3
        worst = max(worst, float(np.abs(d1 - np.eye(2)).max()),
                    float(np.abs(extrap - np.eye(2)).max()))
    _line(3, worst < 1e-5,
          f"finite-difference differential within {worst:.2e} < 1e-5 of "
          f"identity (h=1e-5, Richardson-checked)")


def test_criterion_4_union_formula(henon_seq):
    xs = np.linspace(-2, 2, 200)
    grid = np.array([[complex(x, 0), complex(y, 0)] for x in xs for y in xs])
    rep = basin.union_formula_check(henon_seq, grid, budget=300)
    _line(4, rep.ok and rep.decided > 0,
          f"union formula: {len(rep.disagreements)} disagreements on a "
          f"200x200 grid ({rep.decided} decided)")


def test_criterion_5_hull_suite():
    t0 = time.monotonic()
    rng = np.random.default_rng(5)
    failures = []

    for trial in range(100):
        mask = np.zeros((48, 48), dtype=bool)
        mask[1:-1, 1:-1] = rng.random((46, 46)) < 0.25
        if not mask.any():
            mask[20, 20] = True
        k = hull.PlanarCompact(bbox=(0, 0, 3, 3), resolution=16, mask=mask)
        h1 = hull.poly_hull(k)
        if not (hull.poly_hull(h1).mask == h1.mask).all():
            failures.append(f"idempotence {trial}")
        grow = k.mask | (rng.random(k.mask.shape) < 0.05)
        grow[0] = grow[-1] = False
        grow[:, 0] = grow[:, -1] = False
        if not (h1.mask <= hull.poly_hull(k.with_mask(grow)).mask).all():
            failures.append(f"monotonicity {trial}")

    outer = hull.from_disks([(0, 1.0)], resolution=64)
    cc = hull._cell_centers(outer.bbox, outer.shape, 64)
    annulus = outer.with_mask(outer.mask & ~(np.abs(cc) < 0.5))
    if not (hull.poly_hull(annulus).mask == outer.mask).all():
        failures.append("annulus != disk")

    resolution_limited = 0
    for trial in range(100):
        n_disks = rng.integers(2, 5)
        centers = rng.uniform(-2.5, 2.5, n_disks) + 1j * rng.uniform(
            -2.5, 2.5, n_disks)
        k = hull.poly_hull(hull.from_disks([(c, 0.4) for c in centers],
                                           resolution=32))
        qs = []
        while len(qs) < rng.integers(0, 6):
            q = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
            if not k.contains(q) and all(abs(q - c) > 0.55 for c in centers):
                qs.append(q)
        try:
            out = hull.connect_avoiding(k, centers[0], centers[1], qs)
        except NoPathAtResolution:
            resolution_limited += 1
            continue
        from scipy import ndimage
        labels, _ = ndimage.label(out.mask, structure=hull._CROSS)
        if labels[out.cell_of(centers[0])] != labels[out.cell_of(centers[1])]:
            failures.append(f"connect join {trial}")
        if any(out.contains(q) for q in qs):
            failures.append(f"connect avoid {trial}")
        if not hull.is_poly_convex(out):
            failures.append(f"connect hull {trial}")
    elapsed = time.monotonic() - t0
    _line(5, not failures and elapsed < 60.0,
          f"hull suite: 0 failures ({len(failures)} observed), "
          f"{resolution_limited} resolution-limited runs excluded, "
          f"{elapsed:.1f}s < 60s")


def test_criterion_6_mover_suite():
    rng = np.random.default_rng(4242)
    successes = 0
    for trial in range(100):
        def rand_pt():
            while True:
                p = rng.uniform(-6, 6, 2) + 1j * rng.uniform(-6, 6, 2)
                if np.linalg.norm(p) >= 3:
                    return p
        req = mover.MoveRequest(keep_balls=[((0, 0), 1.0)],
                                sources=[rand_pt()], targets=[rand_pt()],
                                epsilon=0.05, seed=trial, n_samples=4000)
        try:
            m = mover.build_point_mover(req)
        except MoverFailed:
            continue
        if mover.verify_point_mover(m, req, seed=trial + 5000)["passed"]:
            successes += 1

    areq = mover.MoveRequest(keep_balls=[((0, 0), 1.0)], sources=[[3, 0]],
                             targets=[[3, 2]], epsilon=0.1)
    analytic = mover.build_point_mover(areq)
    g = analytic.maps[0].g
    analytic_ok = (len(g) - 1 == 3 and abs(g[-1] - 2 / 27) < 1e-12
                   and mover.verify_point_mover(analytic, areq,
                                                seed=31)["passed"])
    _line(6, successes >= 95 and analytic_ok,
          f"mover suite: {successes}/100 re-verified successes (needs >= 95); "
          f"analytic damping instance exponent 3, bound 2/27: "
          f"{'exact' if analytic_ok else 'failed'}")


def test_criterion_7_disjoint_basins(disjoint_build):
    cfg, seq, state, build_time = disjoint_build
    t0 = time.monotonic()
    grid = builders.generic_slice_grid(cfg.extent, 200)
    attracted = []
    escaped_total = 0
    for sq in builders.center_sequences(state):
        st, _, _ = basin.sweep(sq, grid, budget=200, escape_radius=1e3)
        attracted.append(st == 1)
        escaped_total += int((st == 2).sum())
    doubles = 0
    for i in range(len(attracted)):
        for k in range(i + 1, len(attracted)):
            doubles += int(np.sum(attracted[i] & attracted[k]))

    # density witnesses at every decided-non-attracted grid point: escape is
    # builder-guarded away, so the check runs over the (empty) escaped set
    eps_n = cfg.eps_schedule[cfg.stages - 1]
    any_attracted = np.any(attracted, axis=0)
    decided_non = np.zeros(len(grid), dtype=bool)
    specs = builders.center_specs(state)
    st_all, _, _ = basin.sweep(seq, grid, budget=200, escape_radius=1e3,
                               centers=specs)
    decided_non = (st_all == 2)
    witness_pts = {bi: np.array([w.point for w in state.witnesses
                                 if w.basin == bi]).reshape(-1, 2)
                   for bi in range(cfg.m)}
    density_ok = True
    for q in grid[decided_non]:
        for bi in range(cfg.m):
            pts = witness_pts[bi]
            if len(pts) == 0 or np.linalg.norm(pts - q, axis=-1).min() >= eps_n:
                density_ok = False
    elapsed = build_time + (time.monotonic() - t0)
    _line(7, doubles == 0 and density_ok and escaped_total == 0
          and elapsed < 300.0,
          f"disjoint basins m=3 stages=8 seed=42: {doubles} double-classified "
          f"pixels, {int(decided_non.sum())} decided-non-attracted points all "
          f"within eps_8={eps_n} of witnesses, {elapsed:.0f}s < 300s")


def test_criterion_8_line_intersections():
    l1 = builders.LineSpec(origin=[0, 0], direction=[1, 0.3])
    l2 = builders.LineSpec(origin=[0.5, 0.2], direction=[0.2, 1])
    cfg = builders.LinesConfig(lines=(l1, l2), stages=6, seed=7)
    seq, state, _ = builders.build_line_intersector(cfg)
    runs_ok = True
    for line in cfg.lines:
        ts = np.linspace(-2.5, 2.5, 1000).astype(complex)
        status, _, _ = basin.sweep(seq, line.at(ts), budget=400,
                                   escape_radius=1e3)
        idx = np.flatnonzero(status == 1)
        if len(idx) == 0 or np.any(np.diff(idx) > 1):
            runs_ok = False
    excluded_ok = all(not basin.classify(seq, q, budget=400).is_attracted
                      for q in state.excluded)
    _line(8, runs_ok and excluded_ok,
          "two transverse lines, 6 stages: decided-attracted samples form "
          "one connected run per line over 1000 samples; every excluded "
          "point classifies non-attracted")


def test_criterion_9_variety_containment():
    cfg = builders.VarietiesConfig(
        varieties=(builders.VarietySpec(kind="axis", axis=0),
                   builders.VarietySpec(kind="axis", axis=1)),
        excluded_p=np.array([9.0, 9.0], dtype=complex), stages=6, seed=9)
    seq, state, _, samples = builders.build_variety_container(cfg)
    pts = np.concatenate(samples)
    status, _, _ = basin.sweep(seq, pts, budget=400, escape_radius=1e3)
    frac = float((status == 1).sum()) / len(pts)
    excl = basin.classify(seq, cfg.excluded_p, budget=400)
    _line(9, frac == 1.0 and not excl.is_attracted,
          f"two coordinate axes, 6 stages: {100 * frac:.1f}% of "
          f"{len(pts)} sampled compact points attracted; excluded point "
          f"{excl.status.value} (non-attracted) within budget")


def test_criterion_10_determinism(tmp_path):
    cfg = {
        "sequence": basin.AutoSequence(
            [henon_map()], henon_certificate(), cyclic=True).to_obj(),
        "slice": {"origin": [[0.0, 0.0], [0.2, 0.0]],
                  "axes": [[[1.0, 0.0], [0.0, 0.0]],
                           [[0.0, 1.0], [0.0, 0.0]]],
                  "extent": [3.0, 3.0], "resolution": [128, 128]},
        "budget": 150, "escape_radius": 1000.0, "out": "slice.png"}
    cfg_path = tmp_path / "render.json"
    cfg_path.write_text(json.dumps(cfg))

    outputs = []
    for run in ("a", "b"):
        out = tmp_path / run
        proc = subprocess.run(
            [sys.executable, "-m", "fbbasins.cli", "--config", str(cfg_path),
             "--seed", "5", "--out", str(out), "render"],
            capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outputs.append(((out / "slice.png").read_bytes(),
                        (out / "slice.summary.json").read_bytes()))

    dj_outputs = []
    dj_cfg = tmp_path / "disjoint.json"
    dj_cfg.write_text(json.dumps({"m": 2, "stages": 4, "seed": 11}))
    for run in ("c", "d"):
        out = tmp_path / run
        proc = subprocess.run(
            [sys.executable, "-m", "fbbasins.cli", "--config", str(dj_cfg),
             "--out", str(out), "build", "disjoint"],
            capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        dj_outputs.append(tuple((out / f).read_bytes() for f in
                                ("sequence.json", "state.json",
                                 "witnesses.csv")))
    _line(10, outputs[0] == outputs[1] and dj_outputs[0] == dj_outputs[1],
          "render and build reruns with identical config+seed are "
          "byte-identical across all outputs")

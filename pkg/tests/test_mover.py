import numpy as np
import pytest

from fbbasins import automaps as am
from fbbasins import mover
from fbbasins.errors import GeneralPositionViolated, MoverFailed
from fbbasins.serialize import dumps


def cpt(*vals):
    return np.array(vals, dtype=complex)


# --- point mover -----------------------------------------------------------------

def test_unconstrained_move():
    req = mover.MoveRequest(keep_balls=(), sources=[[0, 0]], targets=[[1, 1]])
    m = mover.build_point_mover(req)
    assert np.allclose(am.apply(m, cpt(0, 0)), cpt(1, 1), atol=1e-12)
    assert len(m.maps) == 2  # one shear per axis


def test_sources_equal_targets_gives_identity():
    req = mover.MoveRequest(keep_balls=(), sources=[[1, 1]], targets=[[1, 1]])
    m = mover.build_point_mover(req)
    assert len(m.maps) == 0
    z = cpt(0.3, -2.0)
    assert np.allclose(am.apply(m, z), z)


def test_analytic_damped_instance():
    # keep B(0,1), move (3,0)->(3,2): exponent 3 gives sup 2/27 < 0.1/1.2
    req = mover.MoveRequest(keep_balls=[((0, 0), 1.0)], sources=[[3, 0]],
                            targets=[[3, 2]], epsilon=0.1)
    m = mover.build_point_mover(req)
    g = m.maps[0].g
    assert len(g) - 1 == 3
    assert abs(g[-1] - 2 / 27) < 1e-12
    assert np.allclose(g[:-1], 0)
    rep = mover.verify_point_mover(m, req, seed=123)
    assert rep["passed"]
    assert rep["sup"] <= 2 / 27 * 1.001


def test_mover_keeps_fixed_points_exactly():
    req = mover.MoveRequest(keep_balls=[((0, 0), 1.0)], sources=[[3, 0]],
                            targets=[[3, 2]], fixed_points=[[4, -4], [-5, 5]],
                            epsilon=0.1)
    m = mover.build_point_mover(req)
    for f in req.fixed_points:
        assert np.linalg.norm(am.apply(m, f) - f) <= 1e-9


def test_mover_is_exact_automorphism():
    req = mover.MoveRequest(keep_balls=[((0, 0), 1.0)], sources=[[3, 1]],
                            targets=[[4, -2]], epsilon=0.1, seed=5)
    m = mover.build_point_mover(req)
    rng = np.random.default_rng(0)
    for _ in range(20):
        z = cpt(*(rng.uniform(-3, 3, 2) + 1j * rng.uniform(-3, 3, 2)))
        back = am.apply_inverse(m, am.apply(m, z))
        assert np.linalg.norm(back - z) < 1e-10 * (1 + np.linalg.norm(z))


def test_mover_determinism():
    req = mover.MoveRequest(keep_balls=[((0, 0), 1.0)], sources=[[0.2, 4]],
                            targets=[[-3, 1]], epsilon=0.05, seed=11)
    m1 = mover.build_point_mover(req)
    m2 = mover.build_point_mover(req)
    assert dumps(m1.to_obj()) == dumps(m2.to_obj())


def test_mover_uses_unitary_retry_for_bad_projections():
    # source z-projection sits inside the keep disk projection; a rotation fixes it
    req = mover.MoveRequest(keep_balls=[((0, 0), 1.0)], sources=[[0.1, 5]],
                            targets=[[0.1, -5]], epsilon=0.1, seed=3)
    m = mover.build_point_mover(req)
    rep = mover.verify_point_mover(m, req, seed=77)
    assert rep["passed"]


def test_mover_failure_carries_diagnostics():
    # an impossible budget: move a point sitting just off the keep ball
    req = mover.MoveRequest(keep_balls=[((0, 0), 1.0)], sources=[[1.05, 0]],
                            targets=[[5, 5]], epsilon=1e-6, max_retries=2,
                            n_samples=1000)
    with pytest.raises(MoverFailed) as err:
        mover.build_point_mover(req)
    assert "best_sup" in err.value.diagnostic


def test_randomized_relocation_suite():
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
        # independent re-verification with margin 1.2 is part of success
        if mover.verify_point_mover(m, req, seed=trial + 5000)["passed"]:
            successes += 1
    assert successes >= 95


def test_request_validation():
    with pytest.raises(ValueError):
        mover.MoveRequest(keep_balls=[((0, 0), 1.0), ((1, 0), 1.0)],
                          sources=[[3, 0]], targets=[[3, 1]])  # overlapping keeps
    with pytest.raises(ValueError):
        mover.MoveRequest(keep_balls=[((0, 0), 1.0)], sources=[[0.5, 0]],
                          targets=[[3, 1]])  # source inside keep set


# --- multicenter contractor ---------------------------------------------------------

def test_single_center_origin_fast_path():
    req = mover.JetRequest(centers=[[0, 0]], rho_list=[0.5], delta_list=[0.05])
    res = mover.build_multicenter_contractor(req, epsilon=0.05)
    assert isinstance(res.map, am.HalfScale)
    assert res.rho_list == (0.5,)


def test_two_center_contractor_verified():
    req = mover.JetRequest(centers=[[0, 0], [4, 4]], rho_list=[0.2, 0.2],
                           delta_list=[0.02, 0.02])
    res = mover.build_multicenter_contractor(req, epsilon=0.02, seed=1)
    rep = mover.verify_multicenter(res.map, req.centers, res.rho_list,
                                   [min(0.02, d) for d in res.delta_list],
                                   seed=909)
    assert rep["passed"]
    assert max(res.sup_per_center) < 0.02
    for q in req.centers:
        assert np.linalg.norm(am.apply(res.map, q) - q) <= 1e-9
        assert np.abs(am.jacobian_at(res.map, q) - 0.5 * np.eye(2)).max() <= 1e-8


def test_contractor_collision_error_without_retries():
    req = mover.JetRequest(centers=[[0, 0], [0, 3]], rho_list=[0.2, 0.2],
                           delta_list=[0.02, 0.02])
    with pytest.raises(GeneralPositionViolated):
        mover.build_multicenter_contractor(req, epsilon=0.02, max_retries=1)


def test_contractor_collision_resolved_by_conjugation():
    req = mover.JetRequest(centers=[[0, 0], [0, 3]], rho_list=[0.2, 0.2],
                           delta_list=[0.02, 0.02])
    res = mover.build_multicenter_contractor(req, epsilon=0.02, seed=2)
    for q in req.centers:
        assert np.linalg.norm(am.apply(res.map, q) - q) <= 1e-9
        assert np.abs(am.jacobian_at(res.map, q) - 0.5 * np.eye(2)).max() <= 1e-8


def test_contractor_auto_shrink_records_radii():
    # centers close together force large interpolant curvature, so the
    # radii must shrink before the second-order error clears the bound
    req = mover.JetRequest(centers=[[0, 0], [1.1, 1.1]], rho_list=[0.3, 0.3],
                           delta_list=[0.03, 0.03])
    res = mover.build_multicenter_contractor(req, epsilon=0.03, seed=4)
    assert all(r <= 0.3 for r in res.rho_list)
    assert any(r < 0.3 for r in res.rho_list) or max(res.sup_per_center) < 0.03


def test_contractor_self_composition_contracts():
    req = mover.JetRequest(centers=[[0, 0], [4, 4]], rho_list=[0.2, 0.2],
                           delta_list=[0.02, 0.02])
    res = mover.build_multicenter_contractor(req, epsilon=0.02, seed=1)
    for q in req.centers:
        z0 = q + cpt(0.07, -0.03)
        z = z0.copy()
        for n in range(1, 11):
            z = am.apply(res.map, z)
            ratio = np.linalg.norm(z - q) / np.linalg.norm(z0 - q)
            assert ratio <= 0.6 ** n * 1.05


def test_contractor_rejects_big_epsilon():
    req = mover.JetRequest(centers=[[0, 0]], rho_list=[0.5], delta_list=[0.05])
    with pytest.raises(ValueError):
        mover.build_multicenter_contractor(req, epsilon=0.2)


def test_jet_request_rejects_overlapping_balls():
    with pytest.raises(ValueError):
        mover.JetRequest(centers=[[0, 0], [0.3, 0]], rho_list=[0.2, 0.2],
                         delta_list=[0.02, 0.02])

import numpy as np
import pytest

from fbbasins import automaps as am
from fbbasins import basin, sampling
from fbbasins.errors import CertificateViolated, NotInBasin, SupplierBoundViolated

from conftest import (
    henon_certificate,
    henon_fixed_point,
    henon_map,
    reference_certificate,
    reference_map,
)


def make_ref_seq():
    return basin.AutoSequence([reference_map()], reference_certificate(), cyclic=True)


def make_henon_seq(seed=0):
    return basin.AutoSequence([henon_map()], henon_certificate(seed=seed), cyclic=True)


def make_halfscale_seq():
    cert = am.certificate_for_half_scale_perturbations(np.zeros(2, dtype=complex), 0.5)
    return basin.AutoSequence([am.HalfScale(2)], cert, cyclic=True)


# --- AutoSequence construction ------------------------------------------------

def test_sequence_rejects_moved_fixed_point():
    cert = am.certificate_for_half_scale_perturbations(np.ones(2, dtype=complex), 0.5)
    with pytest.raises(CertificateViolated):
        basin.AutoSequence([am.HalfScale(2)], cert, cyclic=True)


def test_sequence_rejects_bad_ratios():
    # 0.9-scaling violates the (0.4, 0.6) bracket
    weak = am.Affine(0.9 * np.eye(2), np.zeros(2))
    cert = am.certificate_for_half_scale_perturbations(np.zeros(2, dtype=complex), 0.5)
    with pytest.raises(CertificateViolated):
        basin.AutoSequence([weak], cert, cyclic=True)


def test_unsafe_bracket_is_explicit():
    with pytest.raises(CertificateViolated):
        am.ContractionCertificate(p=np.zeros(2, dtype=complex), rho=0.5,
                                  s=0.3, r=0.6, delta=0.05)
    cert = am.ContractionCertificate(p=np.zeros(2, dtype=complex), rho=0.5,
                                     s=0.3, r=0.6, delta=0.05, unsafe=True)
    assert cert.unsafe


def test_sequence_serialization_round_trip():
    seq = make_henon_seq()
    obj = seq.to_obj()
    seq2 = basin.AutoSequence.from_obj(obj)
    from fbbasins.serialize import dumps
    assert dumps(seq2.to_obj()) == dumps(obj)


# --- classify -------------------------------------------------------------------

def test_classify_fixed_point():
    seq = make_henon_seq()
    v = basin.classify(seq, henon_fixed_point())
    assert v.is_attracted and v.stage == 0


def test_classify_inside_delta_ball():
    seq = make_henon_seq()
    z = seq.cert.p + np.array([seq.cert.delta / 2, 0], dtype=complex)
    # delta/2 along a coordinate may leave the adapted-norm ball; use cert points
    z = seq.cert.ball_points(1, radius=seq.cert.delta / 2, seed=3)[0]
    v = basin.classify(seq, z)
    assert v.is_attracted and v.stage == 0


def test_classify_escape_oracle():
    h = henon_map()
    # forward-iteration oracle: the orbit norm passes 1e3 within 5 stages
    z = np.array([5.0, 0.0], dtype=complex)
    w, esc_stage = z.copy(), None
    for j in range(1, 6):
        w = am.apply(h, w)
        if np.linalg.norm(w) > 1e3:
            esc_stage = j
            break
    assert esc_stage is not None

    v = basin.classify(make_henon_seq(), z, budget=100, escape_radius=1e3)
    assert v.is_escaped and v.stage == esc_stage


def test_classify_monotone_in_budget():
    seq = make_henon_seq()
    pts = seq.cert.p + 0.3 * sampling.unit_directions(50, 2, seed=9)
    for z in pts:
        small = basin.classify(seq, z, budget=30)
        big = basin.classify(seq, z, budget=300)
        if small.is_decided:
            assert small.status == big.status and small.stage == big.stage


def test_classify_escape_radius_precondition():
    seq = make_henon_seq()
    with pytest.raises(ValueError):
        basin.classify(seq, np.zeros(2, dtype=complex), escape_radius=0.1)


# --- phi_eval --------------------------------------------------------------------

def test_phi_fixes_p():
    seq = make_henon_seq()
    val, tol = basin.phi_eval(seq, henon_fixed_point(), tol=1e-12)
    assert np.allclose(val, henon_fixed_point(), atol=1e-12)


def test_phi_halfscale_is_identity():
    seq = make_halfscale_seq()
    for z in [np.array([0.3, -0.1], dtype=complex),
              np.array([2.0, 1.0j], dtype=complex)]:
        val, _ = basin.phi_eval(seq, z, tol=1e-13)
        assert np.allclose(val, z, atol=1e-12)


def test_phi_reference_map_closed_form():
    # the limit map solves Phi(F(z)) = A Phi(z) with dPhi(0) = I:
    # Phi(z, w) = (z + 4 w^2, w)
    seq = make_ref_seq()
    z = np.array([0.01, 0.01], dtype=complex)
    val, _ = basin.phi_eval(seq, z, tol=1e-12)
    assert np.allclose(val, [0.01 + 4 * 0.01 ** 2, 0.01], atol=1e-11)


def test_phi_functional_equation_reference():
    seq = make_ref_seq()
    f = reference_map()
    pts = seq.cert.ball_points(50, radius=seq.cert.delta * 0.9, seed=21)
    worst = 0.0
    for z in pts:
        phi_z, _ = basin.phi_eval(seq, z, tol=1e-11)
        phi_fz, _ = basin.phi_eval(seq, f.apply(z), tol=1e-11)
        worst = max(worst, np.linalg.norm(0.5 * phi_z - phi_fz))
    assert worst < 1e-9


def test_phi_outside_basin_raises():
    seq = make_henon_seq()
    with pytest.raises(NotInBasin):
        basin.phi_eval(seq, np.array([5.0, 0.0], dtype=complex), j_max=50)


def test_phi_far_point_uses_factored_head():
    seq = make_ref_seq()
    z = np.array([3.0, 4.0], dtype=complex)  # attracted but far outside delta-ball
    val, tol = basin.phi_eval(seq, z, tol=1e-10)
    assert np.all(np.isfinite(val))
    # functional equation also holds far out
    f = reference_map()
    val_fz, _ = basin.phi_eval(seq, f.apply(z), tol=1e-10)
    assert np.linalg.norm(0.5 * val - val_fz) < 1e-6 * (1 + np.linalg.norm(val))


# --- dphi_at_p ---------------------------------------------------------------------

def test_dphi_halfscale_exact():
    d = basin.dphi_at_p(make_halfscale_seq(), h=1e-5)
    assert np.abs(d - np.eye(2)).max() < 1e-12


def test_dphi_henon():
    seq = make_henon_seq()
    d1 = basin.dphi_at_p(seq, h=1e-5)
    assert np.abs(d1 - np.eye(2)).max() < 1e-5
    # Richardson check at two step sizes
    d2 = basin.dphi_at_p(seq, h=5e-6)
    extrap = (4 * d2 - d1) / 3
    assert np.abs(extrap - np.eye(2)).max() < 1e-5
    assert abs(np.linalg.det(d1) - 1) < 1e-4


def test_dphi_rejects_bad_h():
    with pytest.raises(ValueError):
        basin.dphi_at_p(make_halfscale_seq(), h=1e-2)


# --- convergence report ---------------------------------------------------------

def test_convergence_halfscale_exact():
    rep = basin.convergence_report(make_halfscale_seq(), n_samples=128, j_max=10)
    assert rep.exact
    assert rep.fitted_ratio == 0.0
    assert all(d < 1e-14 for d in rep.stage_diffs)


def test_convergence_reference_map():
    rep = basin.convergence_report(make_ref_seq(), n_samples=128, j_max=20)
    assert rep.predicted_ratio == pytest.approx(0.55 ** 2 / 0.45)
    assert rep.fitted_ratio <= 0.55 ** 2 / 0.45 * 1.1
    assert rep.observed_R > 0
    assert rep.observed_eps > 0


def test_convergence_henon():
    rep = basin.convergence_report(make_henon_seq(), n_samples=128, j_max=20)
    assert rep.fitted_ratio <= rep.predicted_ratio * 1.1
    assert rep.observed_eps > 0


def test_convergence_openness_proxy_improves_with_density():
    seq = make_ref_seq()
    rep1 = basin.convergence_report(seq, n_samples=128, j_max=12)
    rep2 = basin.convergence_report(seq, n_samples=256, j_max=12)
    assert rep2.observed_eps >= rep1.observed_eps * 0.999


def test_convergence_csv_and_json():
    rep = basin.convergence_report(make_ref_seq(), n_samples=128, j_max=8)
    obj = rep.to_obj()
    assert len(obj["stage_diffs"]) == 8
    text = rep.to_csv()
    assert text.splitlines()[0] == "stage,sup_diff,noise_floor,used"
    assert len(text.splitlines()) == 9


# --- union formula ---------------------------------------------------------------

def test_union_formula_fixed_point():
    seq = make_henon_seq()
    rep = basin.union_formula_check(seq, seq.cert.p[None, :], budget=10)
    assert rep.ok and rep.attracted == 1


def test_union_formula_delta_ball():
    seq = make_henon_seq()
    pts = seq.cert.ball_points(1000, radius=seq.cert.delta * 0.999, seed=5)
    rep = basin.union_formula_check(seq, pts, budget=50)
    assert rep.ok
    assert rep.attracted == rep.total == 1000


def test_union_formula_henon_grid():
    seq = make_henon_seq()
    xs = np.linspace(-2, 2, 60)
    grid = np.array([[complex(x, 0), complex(y, 0)] for x in xs for y in xs])
    rep = basin.union_formula_check(seq, grid, budget=300)
    assert rep.ok
    assert rep.decided > 0


# --- equivalence check ------------------------------------------------------------

def grid_points(extent, n):
    xs = np.linspace(-extent, extent, n)
    return np.array([[complex(x, 0), complex(y, 0)] for x in xs for y in xs])


def test_equiv_identical():
    seq = make_henon_seq()
    rep = basin.sequence_equiv_check(seq, seq, grid_points(1.5, 25), budget=200)
    assert rep.fraction == 1.0


def test_equiv_periodic_vs_constant():
    h = henon_map()
    cert = henon_certificate()
    seq1 = basin.AutoSequence([h], cert, cyclic=True)
    seq2 = basin.AutoSequence([h, h], cert, cyclic=True)
    rep = basin.sequence_equiv_check(seq1, seq2, grid_points(1.5, 25), budget=200)
    assert rep.fraction == 1.0


def test_equiv_exploratory_interleaved():
    # same fixed point, different dynamics: report produced, no ground truth
    h = henon_map()
    p = henon_fixed_point()
    shift = am.Affine(np.eye(2), -p)
    unshift = am.Affine(np.eye(2), p)
    damped = am.Composition((shift, am.HalfScale(2), unshift))
    cert = henon_certificate()
    seq1 = basin.AutoSequence([h], cert, cyclic=True)
    seq2 = basin.AutoSequence([h, damped], cert, cyclic=True, check=False)
    rep = basin.sequence_equiv_check(seq1, seq2, grid_points(1.0, 15), budget=100)
    assert 0.0 <= rep.fraction <= 1.0


# --- certificate soundness property ----------------------------------------------

def test_certificate_soundness_sampled_orbits():
    for seq in (make_ref_seq(), make_henon_seq()):
        cert = seq.cert
        z = cert.ball_points(1000, seed=31)
        d0 = cert.distance(z)
        for m in seq.maps:
            ratios = cert.distance(m.apply(z)) / d0
            assert ratios.min() >= cert.s - 1e-12
            assert ratios.max() <= cert.r + 1e-12


def test_injectivity_at_desk_scale():
    seq = make_ref_seq()
    rng = np.random.default_rng(7)
    pts = seq.cert.ball_points(200, radius=seq.cert.delta * 0.95, seed=13)
    vals = np.array([basin.phi_eval(seq, z, tol=1e-11)[0] for z in pts])
    ia = rng.integers(0, len(pts), 10_000)
    ib = rng.integers(0, len(pts), 10_000)
    sep = np.linalg.norm(pts[ia] - pts[ib], axis=-1) > 1e-6
    img_d = np.linalg.norm(vals[ia] - vals[ib], axis=-1)
    assert np.all(img_d[sep] > 1e-10)


# --- increasing limit driver -------------------------------------------------------

def _phi_stage_supplier(seq, j, domain, ball_radius):
    """Truncation Phi_j = A(j)^-1 F(j) and its inverse as a staged supplier."""
    p = seq.cert.p

    def forward(z):
        v = np.asarray(z, dtype=complex)
        m = np.eye(seq.cert.dim, dtype=complex)
        for i in range(1, j + 1):
            v = seq.map_at(i).apply(v)
            m = seq.diff_at(i) @ m
        return p + np.linalg.solve(m, (v - p).T).T

    def inverse(z):
        v = np.asarray(z, dtype=complex)
        m = np.eye(seq.cert.dim, dtype=complex)
        for i in range(1, j + 1):
            m = seq.diff_at(i) @ m
        v = p + (v - p) @ m.T
        for i in range(j, 0, -1):
            v = seq.map_at(i).apply_inverse(v)
        return v

    return basin.StagedSupplier(forward=forward, inverse=inverse,
                                domain_samples=domain, ball_radius=ball_radius)


def test_increasing_limit_constant_sequence():
    seq = make_halfscale_seq()
    dom = seq.cert.ball_points(64, radius=0.1, seed=2)
    sup = _phi_stage_supplier(seq, 3, dom, 0.05)
    lim = basin.increasing_limit_driver([sup, sup, sup], [1e-3, 5e-4], dim=2)
    val, err = lim.forward(dom[:5])
    assert np.allclose(val, dom[:5], atol=1e-12)  # half-scale truncations are identity
    assert err < 1e-2


def test_increasing_limit_matches_phi_eval():
    seq = make_ref_seq()
    rep = basin.convergence_report(seq, n_samples=128, j_max=14)
    dom = seq.cert.ball_points(64, radius=seq.cert.delta * 0.9, seed=6)
    stages = [4, 6, 8, 10, 12]
    sups = [_phi_stage_supplier(seq, j, dom, seq.cert.delta * 0.5) for j in stages]
    # measured stage bounds: sum of per-step sups between the truncation indices
    rho = [sum(rep.stage_diffs[a:b]) * 1.5 + 1e-15
           for a, b in zip(stages[:-1], stages[1:])]
    lim = basin.increasing_limit_driver(sups, rho, dim=2)
    vals, tail = lim.forward(dom)
    for z, v in zip(dom[:10], vals[:10]):
        exact, _ = basin.phi_eval(seq, z, tol=1e-12)
        assert np.linalg.norm(exact - v) <= tail + 1e-9


def test_increasing_limit_rejects_non_summable():
    seq = make_halfscale_seq()
    dom = seq.cert.ball_points(32, radius=0.1, seed=2)
    sup = _phi_stage_supplier(seq, 2, dom, 0.05)
    with pytest.raises(ValueError):
        basin.increasing_limit_driver([sup, sup, sup], [1e-3, 2e-3], dim=2)


def test_increasing_limit_flags_violated_bound():
    seq = make_ref_seq()
    dom = seq.cert.ball_points(64, radius=seq.cert.delta * 0.9, seed=6)
    sups = [_phi_stage_supplier(seq, j, dom, seq.cert.delta * 0.5) for j in (2, 6)]
    with pytest.raises(SupplierBoundViolated) as err:
        basin.increasing_limit_driver(sups, [1e-16], dim=2)
    assert err.value.stage == 1

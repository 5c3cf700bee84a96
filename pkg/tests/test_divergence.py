import math

import numpy as np
import pytest

from admixgeom import admixture as adm
from admixgeom import divergence as dvg
from admixgeom import families as fam
from admixgeom import geometry as geo
from admixgeom import inference as inf

import oracles


K2 = adm.AdmixtureModel([[0.8, 0.2], [0.2, 0.8]], [1.0, 1.0], c0=0.1)
POINT = adm.AdmixtureModel([[0.5, 0.5]], [1.0], c0=0.1)


# -- exact divergences ----------------------------------------------------------

def test_exact_self_divergences_zero():
    for kind in dvg.EXACT_KINDS:
        est = dvg.divergence_exact(K2, K2, 4, kind)
        assert est.value == pytest.approx(0.0, abs=1e-12)
        assert est.stderr == 0.0


def test_exact_coinciding_marginals_at_n1():
    # hulls differ but the one-symbol marginals coincide
    for kind in ("V", "K"):
        assert dvg.divergence_exact(K2, POINT, 1, kind).value == pytest.approx(0.0, abs=1e-12)


def test_exact_v_closed_form_n2():
    assert dvg.divergence_exact(K2, POINT, 2, "V").value == pytest.approx(0.06, abs=1e-9)


def test_exact_against_independent_quadrature_oracle():
    ref = oracles.exact_divergences_k2_oracle(K2.theta, [[0.7, 0.3], [0.4, 0.6]], 3)
    other = adm.AdmixtureModel([[0.7, 0.3], [0.4, 0.6]], [1.0, 1.0], c0=0.2)
    for kind in dvg.EXACT_KINDS:
        got = dvg.divergence_exact(K2, other, 3, kind).value
        assert got == pytest.approx(ref[kind], rel=1e-7, abs=1e-12)


def test_exact_enumeration_size_gate():
    with pytest.raises(ValueError):
        dvg.divergence_exact(K2, POINT, 25, "V")


def test_standard_divergence_bracket():
    rng = np.random.default_rng(41)
    for _ in range(20):
        a = fam.random_symmetric_model(rng, 2, 1, c0=0.1)
        b = fam.random_symmetric_model(rng, 2, 1, c0=0.1)
        n = int(rng.integers(1, 7))
        h2 = dvg.divergence_exact(a, b, n, "h2").value
        K = dvg.divergence_exact(a, b, n, "K").value
        V = dvg.divergence_exact(a, b, n, "V").value
        assert h2 <= K / 2 + 1e-9
        assert h2 <= V + 1e-9
        assert V <= math.sqrt(2.0) * math.sqrt(h2) + 1e-9


def test_uniform_triangle_equals_unit_mixing_model():
    # uniform law on a triangle = unit-Dirichlet mixture of its vertices
    tri = fam.regular_polygon(3, radius=0.25)
    model = fam.polytope_model(tri)
    table, mix = dvg.uniform_log_marginals(tri, 4)
    _, direct = dvg.exact_log_marginals(model, 4)
    assert np.allclose(mix, direct, atol=1e-12)


def test_uniform_divergence_nested():
    tri = fam.regular_polygon(3, radius=0.3)
    small = geo.homothety_enlarge(tri, 0.0)
    shrunk = geo.extreme_points(
        geo.check_A1(tri).center + 0.8 * (tri.extreme_vertices - geo.check_A1(tri).center))
    v = dvg.divergence_exact_uniform(tri, shrunk, 3, "V").value
    assert v > 0
    assert dvg.divergence_exact_uniform(tri, tri, 3, "V").value == pytest.approx(0.0, abs=1e-12)


# -- Monte Carlo divergences -------------------------------------------------------

def test_mc_self_within_noise():
    est = dvg.divergence_mc(K2, K2, 3, "K", 50_000, 42)
    assert abs(est.value) <= 3 * est.stderr + 1e-12


def test_mc_matches_exact():
    for kind in ("K", "K2", "h2"):
        exact = dvg.divergence_exact(K2, POINT, 2, kind).value
        mc = dvg.divergence_mc(K2, POINT, 2, kind, 200_000, 43)
        assert abs(mc.value - exact) <= 3 * mc.stderr + 1e-9


def test_mc_log_ratio_envelope():
    # every sampled |log ratio| respects n log(1/c0); violation raises inside
    dvg.divergence_mc(K2, POINT, 4, "K", 50_000, 44)


def test_mc_requires_interior_floor():
    nofloor = adm.AdmixtureModel([[0.8, 0.2], [0.2, 0.8]], [1.0, 1.0], c0=0.0)
    with pytest.raises(ValueError):
        dvg.divergence_mc(nofloor, POINT, 2, "K", 1000, 45)


# -- shared-weights coupling ---------------------------------------------------------

def test_coupling_identical_models_zero():
    cp = dvg.wasserstein_shared_beta(K2, K2, [0, 1], 2000, 46)
    assert cp.estimate.value == pytest.approx(0.0, abs=1e-12)


def test_coupling_single_displacement_moment():
    m3 = fam.well_separated_model()
    moved = fam.displaced_model(m3, 0, 0.05)
    cp = dvg.wasserstein_shared_beta(m3, moved, [0, 1, 2], 200_000, 47)
    assert cp.estimate.value == pytest.approx(0.05 / 3, abs=3 * cp.estimate.stderr)
    assert cp.vertex_bound == pytest.approx(0.05, abs=1e-12)


def test_coupling_moment_bound_random():
    rng = np.random.default_rng(48)
    for _ in range(10):
        k = int(rng.integers(2, 5))
        a = fam.random_symmetric_model(rng, k, 2, c0=0.05)
        b = fam.random_symmetric_model(rng, k, 2, c0=0.05)
        cp = dvg.wasserstein_shared_beta(a, b, list(range(k)), 20_000,
                                         int(rng.integers(1 << 31)))
        assert cp.estimate.value <= cp.mean_vertex_bound + 3 * cp.estimate.stderr + 1e-9


def test_coupling_rejects_mismatches():
    asym = adm.AdmixtureModel(K2.theta, [1.0, 2.0], c0=0.1)
    with pytest.raises(ValueError):
        dvg.wasserstein_shared_beta(K2, asym, [0, 1], 100, 49)
    with pytest.raises(ValueError):
        dvg.wasserstein_shared_beta(K2, POINT, [0], 100, 50)
    with pytest.raises(ValueError):
        dvg.wasserstein_shared_beta(K2, K2, [0, 0], 100, 51)


# -- Hellinger information ------------------------------------------------------------

def _candidate_grid():
    m3 = fam.well_separated_model()
    return m3, [fam.displaced_model(m3, 0, t) for t in np.linspace(0.02, 0.3, 10)]


def test_hellinger_information_empty_infimum():
    m3, cands = _candidate_grid()
    hi = dvg.hellinger_information(m3, cands, 4, delta=10.0)
    assert hi.infinite and hi.argmin is None and math.isinf(hi.psi)


def test_hellinger_information_delta_zero_is_min():
    m3, cands = _candidate_grid()
    hi = dvg.hellinger_information(m3, cands, 4, delta=0.0)
    h2s = [dvg.divergence_exact(m3, c, 4, "h2").value for c in cands]
    assert hi.psi == pytest.approx(min(h2s), abs=1e-12)


def test_hellinger_information_exhaustive_oracle():
    m3, cands = _candidate_grid()
    delta = 0.2
    hi = dvg.hellinger_information(m3, cands, 4, delta=delta)
    G0 = m3.polytope()
    eligible = [i for i, c in enumerate(cands)
                if geo.hausdorff(G0, c.polytope()) >= delta / 2]
    ref = min(dvg.divergence_exact(m3, cands[i], 4, "h2").value for i in eligible)
    assert hi.psi == pytest.approx(ref, abs=1e-12)
    assert hi.argmin in eligible


def test_hellinger_information_monotone_in_delta():
    m3, cands = _candidate_grid()
    vals = [dvg.hellinger_information(m3, cands, 4, delta=dd).psi
            for dd in (0.0, 0.1, 0.2, 0.4)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_phi_from_psi():
    assert dvg.phi_from_psi(0.0, 5, 0.1, 1.0) == 0.0
    assert dvg.phi_from_psi(0.8, 10, 0.1, 2.0) == pytest.approx(0.001, abs=1e-15)
    assert dvg.phi_from_psi(0.8, 20, 0.1, 2.0) == pytest.approx(0.0005, abs=1e-15)
    with pytest.raises(ValueError):
        dvg.phi_from_psi(0.5, 0, 0.1, 1.0)


# -- prior KL-ball mass -----------------------------------------------------------------

@pytest.fixture(scope="module")
def prior_mass_setup():
    prior = inf.PriorSpec(lam=1.0, gamma=np.ones(2), c0=0.05, k=2, d=1)
    model0 = prior.draw(61)
    est = dvg.prior_kl_mass(prior, model0, 0.3, 4, 4000, 62)
    return prior, model0, est


def test_prior_mass_infinite_delta(prior_mass_setup):
    _, _, est = prior_mass_setup
    assert est.mass_at(math.inf) == 1.0


def test_prior_mass_monotone_on_shared_draws(prior_mass_setup):
    _, _, est = prior_mass_setup
    masses = [est.mass_at(dd) for dd in (0.1, 0.2, 0.3, 0.5, 1.0)]
    assert all(b >= a for a, b in zip(masses, masses[1:]))


def test_prior_mass_saturates(prior_mass_setup):
    _, _, est = prior_mass_setup
    assert est.mass_at(50.0) == pytest.approx(1.0, abs=1e-12)


def test_prior_mass_zero_hits_reports_ci():
    prior = inf.PriorSpec(lam=1.0, gamma=np.ones(2), c0=0.05, k=2, d=1)
    model0 = prior.draw(63)
    est = dvg.prior_kl_mass(prior, model0, 1e-9, 4, 200, 64)
    assert est.mass == 0.0
    assert 0 < est.ci_upper < 0.05


def test_prior_mass_samples_match_exact_divergences(prior_mass_setup):
    prior, model0, est = prior_mass_setup
    # spot-check the vectorized (K, K2) pairs against the scalar route
    gen = np.random.default_rng(62)
    redraws = [prior.draw(gen) for _ in range(3)]
    for i, mdl in enumerate(redraws):
        K = dvg.divergence_exact(model0, mdl, 4, "K").value
        K2 = dvg.divergence_exact(model0, mdl, 4, "K2").value
        assert est.samples[i, 0] == pytest.approx(K, rel=1e-9, abs=1e-12)
        assert est.samples[i, 1] == pytest.approx(K2, rel=1e-9, abs=1e-12)


# -- bound reports ------------------------------------------------------------------------

def test_bound_check_lemM_a_literal():
    rng = np.random.default_rng(65)
    G = fam.random_polytope(rng, 4, 2)
    G2 = fam.random_polytope(rng, 4, 2)
    rpt = dvg.bound_check("LemM_a", {"G": G, "G2": G2, "seed": 65})
    assert rpt.passed and rpt.margin >= -1e-9
    assert rpt.lhs == pytest.approx(geo.hausdorff(G, G2))
    obj = rpt.to_json_obj()
    assert obj["bound_id"] == "LemM_a" and obj["pass"]


def test_bound_check_unknown_id():
    with pytest.raises(ValueError):
        dvg.bound_check("NoSuchBound", {})


def test_bound_check_thmC_a():
    base = fam.shrunken_corner_simplex(2, 2)
    pairs = fam.cap_family(base, 0, [0.1, 0.2, 0.3])
    rpt = dvg.bound_check("ThmC_a", {"pairs": pairs, "n_list": [2, 3, 4],
                                     "alpha": 0.0, "seed": 1})
    assert rpt.passed
    assert rpt.fitted_constants["c1_hat"] > 0


def test_bound_check_lemKLbound_literal():
    rng = np.random.default_rng(66)
    a = fam.random_symmetric_model(rng, 2, 1, c0=0.1)
    b = fam.random_symmetric_model(rng, 2, 1, c0=0.1)
    rpt = dvg.bound_check("LemKLbound", {"model": a, "model2": b, "n": 3,
                                         "c0": 0.1, "matching": [0, 1],
                                         "n_draws": 20_000, "seed": 66})
    assert rpt.passed


def test_estimate_invariants():
    est = dvg.divergence_exact(K2, POINT, 3, "h2")
    assert 0 <= est.value <= 1
    v = dvg.divergence_exact(K2, POINT, 3, "V")
    assert 0 <= v.value <= 1


def test_exact_k_infinite_flag():
    # positive mass on an outcome the second model cannot produce
    wide = adm.AdmixtureModel([[0.5, 0.5]], [1.0], c0=0.0)
    degenerate = adm.AdmixtureModel([[1.0, 0.0]], [1.0], c0=0.0)
    est = dvg.divergence_exact(wide, degenerate, 2, "K")
    assert est.infinite and math.isinf(est.value)
    # V stays finite and well defined
    v = dvg.divergence_exact(wide, degenerate, 2, "V")
    assert 0 < v.value <= 1


def test_hellinger_information_mc_route():
    m3, cands = _candidate_grid()
    exact = dvg.hellinger_information(m3, cands[:3], 3, delta=0.05)
    mc = dvg.hellinger_information(m3, cands[:3], 3, delta=0.05,
                                   method="mc", budget=60_000, rng=52)
    assert mc.argmin == exact.argmin
    assert mc.psi == pytest.approx(exact.psi, abs=0.01)


def test_bound_check_lemM_b_displacement_family():
    base = fam.regular_polygon(5, radius=0.25)
    pairs = fam.displacement_family(base, 0, np.geomspace(0.001, 0.05, 8))
    rpt = dvg.bound_check("LemM_b", {"pairs": pairs, "seed": 53})
    assert rpt.passed
    assert rpt.fitted_constants["slope"] == pytest.approx(1.0, abs=0.05)


def test_mc_low_precision_warning():
    close = adm.AdmixtureModel([[0.79, 0.21], [0.2, 0.8]], [1.0, 1.0], c0=0.1)
    est = dvg.divergence_mc(K2, close, 2, "K", 200, 54)
    assert "low_precision" in est.warnings


def test_bound_check_missing_objects():
    with pytest.raises(ValueError, match="missing required object"):
        dvg.bound_check("LemM_a", {"G": fam.regular_polygon(3)})


def test_polytope_rejects_empty():
    with pytest.raises(ValueError):
        geo.extreme_points([])

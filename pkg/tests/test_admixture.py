import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from admixgeom import admixture as adm
from admixgeom import families as fam

import oracles


K2_MODEL = adm.AdmixtureModel([[0.8, 0.2], [0.2, 0.8]], [1.0, 1.0], c0=0.1)


# -- model and dataset validation ---------------------------------------------

def test_model_rejects_bad_rows():
    with pytest.raises(ValueError):
        adm.AdmixtureModel([[0.5, 0.6]], [1.0])
    with pytest.raises(ValueError):
        adm.AdmixtureModel([[0.9, 0.1]], [1.0], c0=0.2)
    with pytest.raises(ValueError):
        adm.AdmixtureModel([[0.5, 0.5]], [1.0, 1.0])


def test_model_boundary_allowed_only_at_zero_floor():
    adm.AdmixtureModel([[1.0, 0.0]], [1.0], c0=0.0)
    with pytest.raises(ValueError):
        adm.AdmixtureModel([[1.0, 0.0]], [1.0], c0=0.01)


def test_mixing_law_symmetry_flag():
    assert adm.MixingLaw([2.0, 2.0, 2.0]).symmetric
    assert not adm.MixingLaw([1.0, 2.0]).symmetric
    with pytest.raises(ValueError):
        adm.MixingLaw([1.0, -1.0])


def test_dataset_alphabet_check():
    with pytest.raises(ValueError):
        adm.Dataset([[0, 3]], d=1)
    ds = adm.Dataset([[0, 1], [1, 1]], d=1)
    assert (ds.m, ds.n) == (2, 2)


def test_model_json_roundtrip():
    m2 = adm.AdmixtureModel.from_json(K2_MODEL.to_json())
    assert np.array_equal(m2.theta, K2_MODEL.theta)
    assert m2.c0 == K2_MODEL.c0


# -- sampling -------------------------------------------------------------------

def test_sample_beta_k1():
    assert adm.sample_beta(adm.MixingLaw([2.0]), 0).tolist() == [1.0]


def test_sample_beta_uniform_mean():
    rng = np.random.default_rng(21)
    N = 60_000
    draws = rng.dirichlet(np.ones(3), size=N)  # same law sample_beta uses
    lib = np.vstack([adm.sample_beta(adm.MixingLaw(np.ones(3)), rng) for _ in range(2000)])
    se = math.sqrt(1 / 3 * 2 / 3 / 2000)
    assert np.all(np.abs(lib.mean(axis=0) - 1 / 3) < 3 * se)
    assert abs(draws.mean() - 1 / 3) < 1e-2


def test_sample_beta_general_mean_oracle():
    g = np.array([2.0, 0.5, 1.5])
    rng = np.random.default_rng(22)
    N = 40_000
    draws = np.vstack([adm.sample_beta(adm.MixingLaw(g), rng) for _ in range(N)])
    mean = g / g.sum()
    var = mean * (1 - mean) / (g.sum() + 1)
    assert np.all(np.abs(draws.mean(axis=0) - mean) < 3 * np.sqrt(var / N))


def test_sample_eta_k1_constant():
    m = adm.AdmixtureModel([[0.3, 0.7]], [5.0])
    assert np.array_equal(adm.sample_eta(m, 3), m.theta[0])


def test_sample_eta_symmetric_mean():
    rng = np.random.default_rng(23)
    N = 50_000
    etas = adm._sample_etas(K2_MODEL, N, rng)
    se = etas.std(axis=0) / math.sqrt(N)
    assert np.all(np.abs(etas.mean(axis=0) - 0.5) < 3 * se)


def test_sample_eta_membership():
    m3 = fam.well_separated_model()
    rng = np.random.default_rng(24)
    etas = adm._sample_etas(m3, 10_000, rng)
    assert bool(np.all(m3.polytope().contains(etas, tol=1e-9)))
    assert float(etas.min()) > m3.c0


def test_sample_dataset_degenerate_point():
    dg = adm.AdmixtureModel([[1.0, 0.0, 0.0]], [1.0], c0=0.0)
    ds = adm.sample_dataset(dg, 4, 6, 9)
    assert np.all(ds.X == 0)


def test_sample_dataset_determinism():
    m3 = fam.well_separated_model()
    a = adm.sample_dataset(m3, 7, 11, 123)
    b = adm.sample_dataset(m3, 7, 11, 123)
    assert np.array_equal(a.X, b.X)
    assert a.to_json(seed=123) == b.to_json(seed=123)


def test_hoeffding_concentration_envelope():
    # sampling tail of the empirical frequencies vs the union-bound envelope
    n, eps, reps = 100, 0.2, 100_000
    rng = np.random.default_rng(25)
    etas = adm._sample_etas(K2_MODEL, reps, rng)
    counts = rng.multinomial(n, etas)
    dev = np.linalg.norm(counts / n - etas, axis=1)
    tail = float(np.mean(dev >= eps))
    bound = 2 * (K2_MODEL.d + 1) * math.exp(-2 * n * eps ** 2 / (K2_MODEL.d + 1))
    assert tail <= bound


# -- empirical frequencies --------------------------------------------------------

def test_empirical_freq_example():
    ef = adm.empirical_freq([0, 1, 0, 2], d=2)
    assert ef.eta_hat.tolist() == [0.5, 0.25, 0.25]


def test_empirical_freq_point_mass():
    ef = adm.empirical_freq([1, 1, 1], d=2)
    assert ef.eta_hat.tolist() == [0.0, 1.0, 0.0]


def test_empirical_freq_rejects_empty():
    with pytest.raises(ValueError):
        adm.empirical_freq([], d=1)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(min_value=0, max_value=3), min_size=1, max_size=40))
def test_empirical_freq_recount_property(row):
    ef = adm.empirical_freq(row, d=3)
    assert int(ef.counts.sum()) == len(row)          # sums to one exactly, over n
    for sym in range(4):
        assert ef.counts[sym] == row.count(sym)


# -- marginal likelihood ------------------------------------------------------------

def test_marginal_degenerate_point():
    pt = adm.AdmixtureModel([[0.5, 0.5]], [1.0])
    est = adm.marginal_loglik(pt, [0, 1, 0], "exact_latent")
    assert math.exp(est.logp) == pytest.approx(0.125, abs=1e-12)


def test_marginal_closed_form_00():
    for method in ("exact_latent", "exact_quadrature"):
        est = adm.marginal_loglik(K2_MODEL, [0, 0], method)
        assert math.exp(est.logp) == pytest.approx(0.28, abs=1e-9)


def test_marginal_single_symbol_symmetry():
    est = adm.marginal_loglik(K2_MODEL, [0], "exact_latent")
    assert math.exp(est.logp) == pytest.approx(0.5, abs=1e-12)


def test_marginal_routes_agree():
    rng = np.random.default_rng(26)
    for _ in range(12):
        k = int(rng.integers(1, 4))
        d = int(rng.integers(1, 4))
        model = adm.AdmixtureModel(fam.random_interior_rows(rng, k, d, 0.05),
                                   rng.uniform(0.4, 1.0, size=k))
        n = int(rng.integers(1, 7))
        row = rng.integers(0, d + 1, size=n)
        a = adm.marginal_loglik(model, row, "exact_latent").logp
        b = adm.marginal_loglik(model, row, "exact_quadrature").logp
        assert a == pytest.approx(b, rel=1e-6)


def test_marginal_quadrature_oracle():
    # independent hand-written integrand, tight quadrature
    ref = oracles.marginal_k2_oracle(K2_MODEL.theta, [2, 1])
    est = adm.marginal_loglik(K2_MODEL, [0, 0, 1], "exact_latent")
    assert math.exp(est.logp) == pytest.approx(ref, rel=1e-9)


def test_marginal_mc_within_three_sigma():
    rng = np.random.default_rng(27)
    for trial in range(20):
        k = int(rng.integers(1, 4))
        d = int(rng.integers(1, 3))
        model = adm.AdmixtureModel(fam.random_interior_rows(rng, k, d, 0.05),
                                   np.ones(k))
        n = int(rng.integers(1, 9))
        row = rng.integers(0, d + 1, size=n)
        exact = adm.marginal_loglik(model, row, "exact_latent").logp
        mc = adm.marginal_loglik(model, row, "montecarlo", budget=1_000_000,
                                 rng=int(rng.integers(1 << 31)))
        assert abs(mc.logp - exact) <= 3 * mc.stderr + 1e-9


def test_marginal_row_exchangeability():
    est1 = adm.marginal_loglik(K2_MODEL, [0, 1, 0, 0], "exact_latent").logp
    est2 = adm.marginal_loglik(K2_MODEL, [0, 0, 0, 1], "exact_latent").logp
    assert est1 == est2


def test_marginal_component_exchangeability():
    # symmetric mixing: permuting the rows leaves the marginal unchanged
    swapped = adm.AdmixtureModel(K2_MODEL.theta[::-1], [1.0, 1.0], c0=0.1)
    for row in ([0, 0], [0, 1, 1], [1, 1, 1, 0]):
        a = adm.marginal_loglik(K2_MODEL, row, "exact_latent").logp
        b = adm.marginal_loglik(swapped, row, "exact_latent").logp
        assert a == pytest.approx(b, abs=1e-12)


def test_marginal_quadrature_rejects_large_k():
    rng = np.random.default_rng(28)
    model = adm.AdmixtureModel(fam.random_interior_rows(rng, 4, 2, 0.05), np.ones(4))
    with pytest.raises(ValueError):
        adm.marginal_loglik(model, [0, 1], "exact_quadrature")
    # the latent route still works for k = 4
    est = adm.marginal_loglik(model, [0, 1], "exact_latent")
    assert est.logp < 0


def test_marginal_impossible_row():
    dg = adm.AdmixtureModel([[1.0, 0.0]], [1.0], c0=0.0)
    assert adm.marginal_loglik(dg, [1], "exact_latent").logp == -math.inf


# -- regularity probe ------------------------------------------------------------

def test_regularity_probe_interior_exponent():
    m3 = fam.well_separated_model()
    eta0 = m3.theta.mean(axis=0)
    probe = adm.regularity_probe(m3, eta0, np.geomspace(0.02, 0.2, 6), 400_000, 31)
    assert probe.fitted_exponent == pytest.approx(2.0, abs=0.3)   # k - 1


def test_regularity_probe_k1():
    m = adm.AdmixtureModel([[0.4, 0.6]], [1.0])
    probe = adm.regularity_probe(m, m.theta[0], [0.05, 0.1], 1000, 32)
    assert all(e["prob_estimate"] == 1.0 for e in probe.entries)


def test_regularity_probe_vertex_positive_monotone():
    m3 = fam.well_separated_model()
    probe = adm.regularity_probe(m3, m3.theta[0], np.geomspace(0.05, 0.4, 5),
                                 1_000_000, 33)
    probs = [e["prob_estimate"] for e in probe.entries]
    assert all(p > 0 for p in probs)
    assert all(b >= a for a, b in zip(probs, probs[1:]))


def test_regularity_probe_overcomplete_reported():
    # k > d+1: the local exponent is reported, not asserted (lower-bound only)
    rng = np.random.default_rng(34)
    model = adm.AdmixtureModel(fam.random_interior_rows(rng, 4, 1, 0.05),
                               np.full(4, 0.8))
    eta0 = model.theta.mean(axis=0)
    probe = adm.regularity_probe(model, eta0, np.geomspace(0.02, 0.1, 4), 100_000, 35)
    assert np.isfinite(probe.fitted_exponent)


def test_regularity_probe_rejects_outside_point():
    m3 = fam.well_separated_model()
    with pytest.raises(ValueError):
        adm.regularity_probe(m3, [1.0, 0.0, 0.0], [0.1], 100, 36)


def test_marginal_quadrature_budget_exhaustion():
    # singular mixing weights defeat a one-subdivision budget; the failure is
    # reported, never silently accepted
    peaked = adm.AdmixtureModel([[0.8, 0.2], [0.2, 0.8]], [0.05, 0.05], c0=0.1)
    with pytest.raises(adm.QuadratureToleranceError):
        adm.marginal_loglik(peaked, [0] * 12, "exact_quadrature", budget=1)
    full = adm.marginal_loglik(peaked, [0] * 12, "exact_quadrature", budget=100_000)
    ref = adm.marginal_loglik(peaked, [0] * 12, "exact_latent")
    assert full.logp == pytest.approx(ref.logp, rel=1e-6)


def test_regularity_probe_reports_constant():
    m3 = fam.well_separated_model()
    eta0 = m3.theta.mean(axis=0)
    probe = adm.regularity_probe(m3, eta0, np.geomspace(0.05, 0.2, 4), 50_000, 37)
    assert probe.theory_exponent == 2.0
    assert probe.c6_hat > 0


def test_marginal_against_symbolic_integration():
    # independent oracle: exact rational integration over the mixing simplex
    import sympy as sp
    b1, b2 = sp.symbols("b1 b2", nonnegative=True)
    th = [(sp.Rational(7, 10), sp.Rational(3, 10)),
          (sp.Rational(2, 10), sp.Rational(8, 10)),
          (sp.Rational(5, 10), sp.Rational(5, 10))]
    eta0 = b1 * th[0][0] + b2 * th[1][0] + (1 - b1 - b2) * th[2][0]
    eta1 = b1 * th[0][1] + b2 * th[1][1] + (1 - b1 - b2) * th[2][1]
    model = adm.AdmixtureModel([[0.7, 0.3], [0.2, 0.8], [0.5, 0.5]],
                               [1.0, 1.0, 1.0], c0=0.1)
    for c0_, c1_ in [(2, 0), (1, 1), (3, 1)]:
        integrand = eta0 ** c0_ * eta1 ** c1_
        exact = sp.integrate(sp.integrate(integrand, (b2, 0, 1 - b1)),
                             (b1, 0, 1)) * 2          # uniform density on the triangle
        got = math.exp(adm.marginal_loglik(model, [0] * c0_ + [1] * c1_,
                                           "exact_latent").logp)
        assert got == pytest.approx(float(exact), abs=1e-14)

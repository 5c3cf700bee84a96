"""Divergences between sequence marginals and the inequality verification engine.

Exact divergences enumerate all (d+1)^n outcome sequences, grouped by their
symbol counts (the marginal depends on a sequence only through counts), with
each per-count probability evaluated by the closed-form latent-assignment
sum. Monte Carlo companions sample sequences from one model and reuse the
same exact per-outcome marginals.

``bound_check`` evaluates one named inequality on one instance and emits a
BoundReport. Fully explicit inequalities are checked literally (with
1e-9 slack plus 3 standard errors where Monte Carlo is involved);
existential-constant inequalities are checked through log-log regression
exponents, with the fitted constants reported rather than asserted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln, logsumexp

from . import admixture as adm
from .admixture import AdmixtureModel
from .geometry import Polytope, hausdorff, min_matching, sym_diff_volume
from .seeding import as_generator

ENUM_LIMIT = 2 ** 20
EXACT_KINDS = ("K", "K2", "h2", "V")
LITERAL_SLACK = 1e-9
EXPONENT_TOL = 0.15


@dataclass(frozen=True)
class DivergenceEstimate:
    kind: str
    value: float
    stderr: float
    method: str
    infinite: bool = False
    warnings: tuple = ()


@dataclass(frozen=True)
class RateSpec:
    """Scalars describing one (m, n) asymptotic cell."""
    m: int
    n: int
    p: int
    alpha: float
    C: float
    M_m: float
    eps_mn: float
    delta_mn: float

    def __post_init__(self):
        if self.eps_mn <= 0 or self.delta_mn <= 0:
            raise ValueError("eps_mn and delta_mn must be positive")
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")


# ---------------------------------------------------------------------------
# exact sequence marginals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _SeqTable:
    counts: np.ndarray      # (C, d+1) symbol-count vectors
    logcoef: np.ndarray     # (C,) log multinomial coefficients
    M: np.ndarray           # (T, k*(d+1)) stacked latent term exponents
    w: np.ndarray           # (T,) term log-weights
    offsets: np.ndarray     # (C+1,) term segment boundaries


@lru_cache(maxsize=None)
def _seq_table(n: int, d: int, k: int, gamma: tuple) -> _SeqTable:
    counts = adm._compositions(n, d + 1)
    logcoef = gammaln(n + 1.0) - gammaln(counts + 1.0).sum(axis=1)
    Ms, ws, offsets = [], [], [0]
    for c in counts:
        Mf, wv = adm._latent_table(tuple(int(x) for x in c), k, gamma)
        Ms.append(Mf)
        ws.append(wv)
        offsets.append(offsets[-1] + wv.size)
    return _SeqTable(counts, logcoef, np.vstack(Ms).astype(float),
                     np.concatenate(ws), np.array(offsets))


def batch_log_marginals(table: _SeqTable, thetas: np.ndarray) -> np.ndarray:
    """(B, C) log marginals for a batch of component matrices (B, k, d+1)."""
    B = thetas.shape[0]
    flat = thetas.reshape(B, -1)
    logth = np.where(flat > 0, np.log(np.maximum(flat, 1e-300)), -1e300)
    scores = logth @ table.M.T + table.w[None, :]
    C = table.counts.shape[0]
    out = np.empty((B, C))
    for c in range(C):
        seg = scores[:, table.offsets[c]:table.offsets[c + 1]]
        out[:, c] = logsumexp(seg, axis=1)
    # the -1e300 placeholder for log(0) marks genuinely impossible outcomes
    return np.where(out > -1e250, out, -np.inf)


def exact_log_marginals(model: AdmixtureModel, n: int):
    """Log marginal per symbol-count vector, plus the shared table."""
    table = _seq_table(n, model.d, model.k, tuple(map(float, model.mixing.gamma)))
    logp = batch_log_marginals(table, model.theta[None, :, :])[0]
    return table, logp


def divergence_exact(model: AdmixtureModel, model2: AdmixtureModel, n: int,
                     kind: str) -> DivergenceEstimate:
    """Exact divergence between the two n-sequence marginals."""
    if kind not in EXACT_KINDS:
        raise ValueError(f"kind must be one of {EXACT_KINDS}")
    if model.d != model2.d:
        raise ValueError("models must share the symbol alphabet")
    if (model.d + 1) ** n > ENUM_LIMIT:
        raise ValueError(f"outcome enumeration (d+1)^n exceeds {ENUM_LIMIT}")
    table, lp = exact_log_marginals(model, n)
    _, lq = exact_log_marginals(model2, n)
    seq_p = np.exp(table.logcoef + lp)
    seq_q = np.exp(table.logcoef + lq)
    for name, tot in (("first", seq_p.sum()), ("second", seq_q.sum())):
        if abs(tot - 1.0) > 1e-6:
            raise RuntimeError(f"{name} marginal sums to {tot:.8f}, not 1 within 1e-6")

    if kind == "V":
        return DivergenceEstimate("V", 0.5 * float(np.abs(seq_p - seq_q).sum()),
                                  0.0, "exact_enum")
    if kind == "h2":
        val = 0.5 * float(((np.sqrt(seq_p) - np.sqrt(seq_q)) ** 2).sum())
        return DivergenceEstimate("h2", min(val, 1.0), 0.0, "exact_enum")
    ratio = lp - lq
    support = seq_p > 0
    if np.any(support & ~np.isfinite(lq)):
        return DivergenceEstimate(kind, math.inf, 0.0, "exact_enum", infinite=True)
    if kind == "K":
        val = float(np.sum(seq_p[support] * ratio[support]))
        return DivergenceEstimate("K", max(val, 0.0), 0.0, "exact_enum")
    val = float(np.sum(seq_p[support] * ratio[support] ** 2))
    return DivergenceEstimate("K2", val, 0.0, "exact_enum")


def uniform_polytope_components(P: Polytope):
    """Uniform law on a polytope as a mixture of uniform simplices.

    A Delaunay triangulation of the extreme points splits the hull into
    simplices; the uniform law is the volume-weighted mixture of uniform
    laws on them, and a uniform simplex law is the unit-Dirichlet mixture of
    its vertices. This keeps uniform-law divergences inside the exact
    enumeration machinery.
    """
    from math import factorial

    from scipy.spatial import Delaunay, QhullError

    p = P.affine_dim
    V = P.extreme_vertices
    if p == 0:
        return ((1.0, AdmixtureModel(V[:1], np.ones(1))),)
    if p == 1:
        order = np.argsort(P.to_span(V)[:, 0])
        return ((1.0, AdmixtureModel(V[order][[0, -1]], np.ones(2))),)
    Y = P.to_span(V)
    comps, weights = [], []
    try:
        tess = Delaunay(Y)
    except QhullError:
        tess = Delaunay(Y, qhull_options="QJ Qbb Qz")
    for simplex in tess.simplices:
        corners = Y[simplex]
        vol = abs(float(np.linalg.det(corners[1:] - corners[0]))) / factorial(p)
        if vol > 1e-14:
            comps.append(AdmixtureModel(V[simplex], np.ones(p + 1)))
            weights.append(vol)
    w = np.asarray(weights)
    w = w / w.sum()
    return tuple(zip(w.tolist(), comps))


def uniform_log_marginals(P: Polytope, n: int):
    """Log sequence marginals per count vector when eta is uniform on P."""
    comps = uniform_polytope_components(P)
    table = None
    rows, logw = [], []
    for wt, mdl in comps:
        table, lp = exact_log_marginals(mdl, n)
        rows.append(lp)
        logw.append(math.log(wt))
    mix = logsumexp(np.vstack(rows) + np.asarray(logw)[:, None], axis=0)
    return table, mix


def divergence_exact_uniform(P: Polytope, Q: Polytope, n: int,
                             kind: str) -> DivergenceEstimate:
    """Exact divergence between n-sequence marginals under uniform eta laws."""
    if kind not in EXACT_KINDS:
        raise ValueError(f"kind must be one of {EXACT_KINDS}")
    table, lp = uniform_log_marginals(P, n)
    _, lq = uniform_log_marginals(Q, n)
    seq_p = np.exp(table.logcoef + lp)
    seq_q = np.exp(table.logcoef + lq)
    if kind == "V":
        return DivergenceEstimate("V", 0.5 * float(np.abs(seq_p - seq_q).sum()),
                                  0.0, "exact_enum")
    if kind == "h2":
        val = 0.5 * float(((np.sqrt(seq_p) - np.sqrt(seq_q)) ** 2).sum())
        return DivergenceEstimate("h2", min(val, 1.0), 0.0, "exact_enum")
    ratio = lp - lq
    support = seq_p > 0
    if kind == "K":
        val = float(np.sum(seq_p[support] * ratio[support]))
        return DivergenceEstimate("K", max(val, 0.0), 0.0, "exact_enum")
    return DivergenceEstimate("K2", float(np.sum(seq_p[support] * ratio[support] ** 2)),
                              0.0, "exact_enum")


def _sample_count_vectors(model: AdmixtureModel, n: int, N: int, gen) -> tuple:
    etas = adm._sample_etas(model, N, gen)
    counts = gen.multinomial(n, etas)
    uniq, mult = np.unique(counts, axis=0, return_counts=True)
    return uniq, mult


def divergence_mc(model: AdmixtureModel, model2: AdmixtureModel, n: int,
                  kind: str, N: int, rng) -> DivergenceEstimate:
    """Monte Carlo divergence estimate; per-outcome marginals are exact."""
    if kind not in ("K", "K2", "h2"):
        raise ValueError("montecarlo divergences support kinds K, K2, h2")
    if model.c0 <= 0 or model2.c0 <= 0:
        raise ValueError("both models need a positive interior floor c0")
    gen = as_generator(rng)
    uniq, mult = _sample_count_vectors(model, n, int(N), gen)
    lp = np.array([adm._loglik_latent(model, tuple(int(x) for x in c)) for c in uniq])
    lq = np.array([adm._loglik_latent(model2, tuple(int(x) for x in c)) for c in uniq])
    r = lp - lq
    if kind == "K":
        vals = r
    elif kind == "K2":
        vals = r ** 2
    else:
        vals = 1.0 - np.exp(0.5 * (lq - lp))
    wsum = float(mult.sum())
    mean = float(np.dot(mult, vals) / wsum)
    var = float(np.dot(mult, (vals - mean) ** 2) / max(wsum - 1.0, 1.0))
    stderr = math.sqrt(var / wsum)
    # the estimated quantities are nonnegative (h^2 also at most 1); clamping
    # the noisy estimate toward the feasible range never moves it away from
    # the truth
    mean = max(mean, 0.0)
    if kind == "h2":
        mean = min(mean, 1.0)
    warnings = ()
    if stderr > 0 and stderr > mean / 2:
        warnings = ("low_precision",)
    envelope = float(np.max(np.abs(r)))
    bound = n * math.log(1.0 / min(model.c0, model2.c0))
    if envelope > bound + 1e-9:
        raise RuntimeError("log-ratio envelope violated; marginals inconsistent")
    return DivergenceEstimate(kind, mean, stderr, "montecarlo", warnings=warnings)


# ---------------------------------------------------------------------------
# coupling, Hellinger information, prior mass
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CouplingEstimate:
    """Shared-mixing-weights coupling cost: an upper bound on W1."""
    estimate: DivergenceEstimate
    vertex_bound: float          # max_j |theta_j - theta'_sigma(j)|
    mean_vertex_bound: float     # (1/k) sum_j |theta_j - theta'_sigma(j)|


def wasserstein_shared_beta(model: AdmixtureModel, model2: AdmixtureModel,
                            vertex_matching, n_draws: int = 20_000,
                            rng=None) -> CouplingEstimate:
    """Couple the two eta laws through one shared Dirichlet draw.

    Valid only when both mixing laws are symmetric with identical parameters
    (the shared draw is then a legal coupling for any vertex relabeling)."""
    if model.k != model2.k:
        raise ValueError("component counts differ")
    if not (model.mixing.symmetric and model2.mixing.symmetric):
        raise ValueError("shared-weights coupling requires symmetric mixing laws")
    if not np.allclose(model.mixing.gamma, model2.mixing.gamma, rtol=0, atol=1e-12):
        raise ValueError("mixing parameters differ")
    sigma = np.asarray(vertex_matching, dtype=int)
    if sorted(sigma.tolist()) != list(range(model.k)):
        raise ValueError("vertex_matching must be a permutation of 0..k-1")
    gen = as_generator(rng)
    delta = model.theta - model2.theta[sigma]
    row_norms = np.linalg.norm(delta, axis=1)
    if model.k == 1:
        mean, stderr = float(row_norms[0]), 0.0
    else:
        betas = gen.dirichlet(model.mixing.gamma, size=int(n_draws))
        costs = np.linalg.norm(betas @ delta, axis=1)
        mean = float(costs.mean())
        stderr = float(costs.std(ddof=1) / math.sqrt(n_draws))
    est = DivergenceEstimate("W1", mean, stderr, "coupling")
    return CouplingEstimate(est, float(row_norms.max()), float(row_norms.mean()))


@dataclass(frozen=True)
class HellingerInformation:
    psi: float
    argmin: int | None
    infinite: bool
    distances: tuple


def hellinger_information(model0: AdmixtureModel, candidates, n: int, delta: float,
                          method: str = "exact", budget: int = 100_000,
                          rng=None) -> HellingerInformation:
    """inf of squared Hellinger distance over candidates at least delta/2 away."""
    G0 = model0.polytope()
    cands = list(candidates)
    dists = tuple(hausdorff(G0, c.polytope()) for c in cands)
    eligible = [i for i, dd in enumerate(dists) if dd >= delta / 2.0]
    if not eligible:
        return HellingerInformation(math.inf, None, True, dists)
    best, arg = math.inf, None
    for i in eligible:
        if method == "exact":
            h2 = divergence_exact(model0, cands[i], n, "h2").value
        else:
            h2 = divergence_mc(model0, cands[i], n, "h2", budget, rng).value
        if h2 < best:
            best, arg = h2, i
    return HellingerInformation(float(best), arg, False, dists)


def phi_from_psi(psi: float, n: int, c0: float, C0: float) -> float:
    """Continuity radius matched to the Hellinger information level."""
    if n < 1 or c0 <= 0 or C0 <= 0:
        raise ValueError("need n >= 1 and positive c0, C0")
    return c0 * psi / (4.0 * n * C0)


@dataclass(frozen=True)
class PriorMassEstimate:
    """Fraction of prior draws whose marginals stay delta^2-close in K and K2."""
    mass: float
    stderr: float
    ci_upper: float
    delta: float
    n: int
    n_draws: int
    samples: np.ndarray      # (N, 2) per-draw (K, K2)

    def mass_at(self, delta: float) -> float:
        """Recompute the mass at another delta on the same draws (monotone)."""
        hit = np.all(self.samples <= delta ** 2, axis=1)
        return float(hit.mean())


def prior_kl_mass(prior, model0: AdmixtureModel, delta: float, n: int, N: int,
                  rng) -> PriorMassEstimate:
    """Monte Carlo prior mass of the (K, K2) neighborhood of model0."""
    gen = as_generator(rng)
    if (model0.d + 1) ** n > ENUM_LIMIT:
        raise ValueError("outcome enumeration infeasible for this n")
    draws = [prior.draw(gen) for _ in range(int(N))]
    k = draws[0].k
    table0, lp0 = exact_log_marginals(model0, n)
    table = _seq_table(n, model0.d, k, tuple(map(float, draws[0].mixing.gamma)))
    thetas = np.stack([mdl.theta for mdl in draws])
    lqs = batch_log_marginals(table, thetas)
    seq_p = np.exp(table0.logcoef + lp0)
    ratios = lp0[None, :] - lqs
    Ks = ratios @ seq_p
    K2s = (ratios ** 2) @ seq_p
    samples = np.column_stack([Ks, K2s])
    hit = np.all(samples <= delta ** 2, axis=1)
    mass = float(hit.mean())
    stderr = math.sqrt(max(mass * (1.0 - mass), 0.0) / N)
    if mass == 0.0:
        ci_upper = 1.0 - 0.05 ** (1.0 / N)       # one-sided 95% upper bound
    else:
        ci_upper = min(mass + 3 * stderr, 1.0)
    return PriorMassEstimate(mass, stderr, ci_upper, float(delta), int(n), int(N), samples)


# ---------------------------------------------------------------------------
# bound reports
# ---------------------------------------------------------------------------

@dataclass
class BoundReport:
    """One named inequality on one instance.

    ``passed`` is equivalent to margin >= -tolerance where margin = rhs - lhs.
    For regression-exponent bounds lhs is the absolute (or one-sided)
    deviation of the fitted slope from its target and rhs is 0; for
    monotonicity bundles lhs counts violations. Fitted constants are
    reported for every existential-constant inequality.
    """
    bound_id: str
    instance: dict
    lhs: float
    rhs: float
    margin: float
    passed: bool
    fitted_constants: dict
    tolerance: float

    def to_json_obj(self) -> dict:
        return {"bound_id": self.bound_id, "lhs": self.lhs, "rhs": self.rhs,
                "margin": self.margin, "pass": self.passed,
                "fitted_constants": self.fitted_constants,
                "instance": {k: v for k, v in self.instance.items() if k != "seed"},
                "seed": self.instance.get("seed")}


LITERAL_BOUND_IDS = ("LemM_a", "LemKLbound", "LemW", "Hoeffding_etahat")


def _loglog_slope(x, y):
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    slope, intercept = np.polyfit(lx, ly, 1)
    return float(slope), float(intercept)


def _report(bound_id, instance, lhs, rhs, tol, fitted):
    margin = rhs - lhs
    return BoundReport(bound_id, instance, float(lhs), float(rhs), float(margin),
                       bool(margin >= -tol), fitted, float(tol))


def _check_lemM_a(inst, budget):
    G, G2 = inst["G"], inst["G2"]
    dh, dm = hausdorff(G, G2), min_matching(G, G2)
    tol = inst.get("tolerance", LITERAL_SLACK)
    fitted = {"ratio": dm / dh if dh > 0 else math.inf}
    return _report("LemM_a", _desc(inst), dh, dm, tol, fitted)


def _pair_metrics(pairs, vol: bool):
    dhs, dms, vols = [], [], []
    for G, G2 in pairs:
        dhs.append(hausdorff(G, G2))
        dms.append(min_matching(G, G2))
        if vol:
            vols.append(sym_diff_volume(G, G2, "exact2d").value)
    return np.array(dhs), np.array(dms), np.array(vols)


def _check_lemM_b(inst, budget):
    dhs, dms, _ = _pair_metrics(inst["pairs"], vol=False)
    slope, intercept = _loglog_slope(dhs, dms)
    tol = inst.get("tolerance", 0.05)
    fitted = {"slope": slope, "intercept": intercept,
              "C0_hat": float(np.max(dms / dhs))}
    return _report("LemM_b", _desc(inst), abs(slope - 1.0), 0.0, tol, fitted)


def _exponent_family_check(bound_id, inst, target, tol_default, constant_key,
                           constant_agg):
    dhs, _, vols = _pair_metrics(inst["pairs"], vol=True)
    slope, intercept = _loglog_slope(dhs, vols)
    tol = inst.get("tolerance", tol_default)
    ratios = vols / dhs ** target
    fitted = {"slope": slope, "intercept": intercept,
              constant_key: float(constant_agg(ratios))}
    return _report(bound_id, _desc(inst), abs(slope - target), 0.0, tol, fitted)


def _check_ldiff1_a(inst, budget):
    return _exponent_family_check("Ldiff1_a", inst, float(inst.get("p", 2.0)),
                                  EXPONENT_TOL, "c1_hat", np.min)


def _check_ldiff1_b(inst, budget):
    inst = dict(inst)
    inst.setdefault("tolerance", 0.1)
    dhs, _, vols = _pair_metrics(inst["pairs"], vol=True)
    slope, intercept = _loglog_slope(dhs, vols)
    fitted = {"slope": slope, "intercept": intercept,
              "C1_hat": float(np.max(vols / dhs))}
    return _report("Ldiff1_b", _desc(inst), abs(slope - 1.0), 0.0,
                   inst["tolerance"], fitted)


def _check_ldiff3(inst, budget):
    inst = dict(inst)
    inst.setdefault("tolerance", 0.1)
    dhs, _, vols = _pair_metrics(inst["pairs"], vol=True)
    slope, intercept = _loglog_slope(dhs, vols)
    fitted = {"slope": slope, "intercept": intercept,
              "c2_hat": float(np.min(vols / dhs))}
    return _report("Ldiff3", _desc(inst), abs(slope - 1.0), 0.0,
                   inst["tolerance"], fitted)


def _check_thmC_a(inst, budget):
    """Contraction direction on a corner-cut family with uniform eta laws:
    V is nondecreasing in n at fixed separation (marginals of longer
    sequences dominate) and nondecreasing in the Hausdorff separation at
    fixed n. The envelope-augmented quantity V + 6(d+1)exp(-n dH^2/(8(d+1)))
    and the fitted constant are reported, not asserted: the envelope term
    strictly decreases in n, so no monotonicity in n holds for the sum."""
    pairs = inst["pairs"]
    n_list = list(inst["n_list"])
    alpha = float(inst.get("alpha", 0.0))
    d = pairs[0][0].ambient_dim - 1
    dhs = np.array([hausdorff(a, b) for a, b in pairs])
    order = np.argsort(dhs)
    V = np.zeros((len(pairs), len(n_list)))
    for i, (a, b) in enumerate(pairs):
        for j, n in enumerate(n_list):
            V[i, j] = divergence_exact_uniform(a, b, n, "V").value
    envelope = 6.0 * (d + 1) * np.exp(
        -np.outer(dhs ** 2, np.asarray(n_list, float)) / (8.0 * (d + 1)))
    rhs_table = V + envelope
    violations = 0
    for j in range(len(n_list)):            # V nondecreasing in dH at fixed n
        violations += int(np.sum(np.diff(V[order, j]) < -1e-12))
    for i in range(len(pairs)):             # V nondecreasing in n at fixed dH
        violations += int(np.sum(np.diff(V[i]) < -1e-12))
    pexp = max(max(a.affine_dim, b.affine_dim) for a, b in pairs) + alpha
    c1_hat = float(np.min(rhs_table / dhs[:, None] ** pexp))
    fitted = {"c1_hat": c1_hat, "exponent": pexp,
              "V_min": float(V.min()), "V_max": float(V.max()),
              "envelope_min": float(envelope.min())}
    return _report("ThmC_a", _desc(inst), float(violations), 0.0, 0.0, fitted)


def _check_lemKLez(inst, budget):
    """K between nested same-span uniform models is at most linear in dH:
    the fitted log-log slope must not drop below 1."""
    n = int(inst["n"])
    dhs, Ks = [], []
    for inner, outer in inst["pairs"]:
        dhs.append(hausdorff(inner.polytope(), outer.polytope()))
        Ks.append(divergence_exact(inner, outer, n, "K").value)
    slope, intercept = _loglog_slope(dhs, Ks)
    tol = inst.get("tolerance", EXPONENT_TOL)
    fitted = {"slope": slope, "intercept": intercept,
              "C1_hat": float(np.max(np.array(Ks) / np.array(dhs)))}
    return _report("LemKLez", _desc(inst), 1.0 - slope, 0.0, tol, fitted)


def _check_lemKLbound(inst, budget):
    model, model2 = inst["model"], inst["model2"]
    n = int(inst["n"])
    c0 = float(inst.get("c0", min(model.theta.min(), model2.theta.min())))
    matching = inst.get("matching", list(range(model.k)))
    n_draws = int(inst.get("n_draws", budget or 20_000))
    gen = as_generator(inst.get("seed", 0))
    K = divergence_exact(model, model2, n, "K").value
    coup = wasserstein_shared_beta(model, model2, matching, n_draws, gen)
    rhs = (n / c0) * coup.estimate.value
    tol = LITERAL_SLACK + 3.0 * (n / c0) * coup.estimate.stderr
    fitted = {"W1_coupling": coup.estimate.value,
              "W1_stderr": coup.estimate.stderr,
              "K_exact": K}
    return _report("LemKLbound", _desc(inst), K, rhs, tol, fitted)


def _check_lemW(inst, budget):
    model, model2 = inst["model"], inst["model2"]
    matching = inst.get("matching", list(range(model.k)))
    n_draws = int(inst.get("n_draws", budget or 20_000))
    gen = as_generator(inst.get("seed", 0))
    coup = wasserstein_shared_beta(model, model2, matching, n_draws, gen)
    dh = hausdorff(model.polytope(), model2.polytope())
    tol = LITERAL_SLACK + 3.0 * coup.estimate.stderr
    fitted = {"vertex_bound": coup.vertex_bound,
              "C0_hat": coup.estimate.value / dh if dh > 0 else math.inf}
    return _report("LemW", _desc(inst), coup.estimate.value,
                   coup.mean_vertex_bound, tol, fitted)


def _check_thmKL_mass(inst, budget):
    """Prior thickness: the KL-neighborhood mass is positive and monotone in
    delta on shared draws."""
    prior, model0 = inst["prior"], inst["model0"]
    deltas = sorted(float(x) for x in inst["deltas"])
    n = int(inst["n"])
    N = int(inst.get("n_draws", budget or 10_000))
    gen = as_generator(inst.get("seed", 0))
    base = prior_kl_mass(prior, model0, deltas[0], n, N, gen)
    masses = [base.mass_at(dd) for dd in deltas]
    violations = sum(1 for a, b in zip(masses, masses[1:]) if b < a)
    violations += sum(1 for mss in masses if mss <= 0.0)
    kd = prior.k * prior.d
    fitted = {f"mass_{dd:g}": mss for dd, mss in zip(deltas, masses)}
    fitted.update({f"c_hat_{dd:g}": mss / ((dd ** 2 / n ** 3) ** kd)
                   for dd, mss in zip(deltas, masses) if mss > 0})
    return _report("ThmKL_mass", _desc(inst), float(violations), 0.0, 0.0, fitted)


def _check_hoeffding(inst, budget):
    model = inst["model"]
    n = int(inst["n"])
    eps = float(inst["eps"])
    reps = int(inst.get("reps", budget or 100_000))
    gen = as_generator(inst.get("seed", 0))
    etas = adm._sample_etas(model, reps, gen)
    counts = gen.multinomial(n, etas)
    dev = np.linalg.norm(counts / n - etas, axis=1)
    tail = float(np.mean(dev >= eps))
    bound = 2.0 * (model.d + 1) * math.exp(-2.0 * n * eps ** 2 / (model.d + 1))
    fitted = {"empirical_tail": tail, "bound": bound,
              "ratio": tail / bound if bound > 0 else math.inf}
    return _report("Hoeffding_etahat", _desc(inst), tail, bound, LITERAL_SLACK, fitted)


_BOUND_CHECKS = {
    "LemM_a": _check_lemM_a,
    "LemM_b": _check_lemM_b,
    "Ldiff1_a": _check_ldiff1_a,
    "Ldiff1_b": _check_ldiff1_b,
    "Ldiff3": _check_ldiff3,
    "ThmC_a": _check_thmC_a,
    "LemKLez": _check_lemKLez,
    "LemKLbound": _check_lemKLbound,
    "LemW": _check_lemW,
    "ThmKL_mass": _check_thmKL_mass,
    "Hoeffding_etahat": _check_hoeffding,
}

BOUND_IDS = tuple(_BOUND_CHECKS)


def _desc(inst: dict) -> dict:
    """JSON-able summary of an instance (objects reduced to shape descriptors)."""
    out = {}
    for key, val in inst.items():
        if isinstance(val, AdmixtureModel):
            out[key] = {"k": val.k, "d": val.d, "c0": val.c0}
        elif isinstance(val, Polytope):
            out[key] = {"k": len(val.extr_idx), "p": val.affine_dim}
        elif key == "pairs":
            out["pairs"] = len(val)
        elif hasattr(val, "draw"):
            out[key] = {"k": getattr(val, "k", None), "d": getattr(val, "d", None)}
        elif isinstance(val, (list, tuple)) and len(val) <= 16 and all(
                isinstance(x, (int, float)) for x in val):
            out[key] = [float(x) for x in val]
        elif isinstance(val, (bool, int, float, str)) or val is None:
            out[key] = val
    return out


def bound_check(bound_id: str, instance: dict, budget: int | None = None) -> BoundReport:
    """Evaluate one named inequality instance and return its report."""
    if bound_id not in _BOUND_CHECKS:
        raise ValueError(f"unknown bound id {bound_id!r}; known: {sorted(_BOUND_CHECKS)}")
    try:
        return _BOUND_CHECKS[bound_id](instance, budget)
    except KeyError as exc:
        raise ValueError(f"instance for {bound_id} missing required object {exc}") from exc

"""Prior over component matrices, collapsed Gibbs posterior sampling, an
exact tiny-instance posterior for validation, contraction statistics, and
the contraction-rate formulas.

The prior draws each component row iid Dirichlet(lambda) truncated to the
c0-interior by rejection. The z-chain marginalizes the untruncated
conjugate prior (the standard collapsed conditional); retained component
matrices are drawn from the conditional Dirichlet posterior with rejection
back to the interior, which keeps the truncated target exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.special import gammaln

from .admixture import AdmixtureModel, Dataset, MixingLaw
from .divergence import RateSpec
from .geometry import Polytope, hausdorff, min_matching
from .seeding import as_generator, derive_seed

MAX_REJECTION_ATTEMPTS = 10_000


@dataclass(frozen=True)
class PriorSpec:
    """Rows-iid-Dirichlet(lambda) prior truncated to the c0-interior, plus the
    Dirichlet mixing parameters used by the likelihood."""
    lam: float
    gamma: np.ndarray
    c0: float
    k: int
    d: int

    def __post_init__(self):
        g = np.asarray(self.gamma, dtype=float).reshape(-1)
        if self.lam <= 0:
            raise ValueError("lambda must be positive")
        if g.size != self.k or np.any(g <= 0):
            raise ValueError("gamma must be k positive reals")
        if not 0 <= self.c0 < 1.0 / (self.d + 1):
            raise ValueError("c0 must lie in [0, 1/(d+1))")
        g = g.copy()
        g.setflags(write=False)
        object.__setattr__(self, "gamma", g)

    def draw(self, rng) -> AdmixtureModel:
        return prior_draw(self, rng)


def _rejection_dirichlet(gen, alpha: np.ndarray, c0: float) -> np.ndarray:
    for attempt in range(MAX_REJECTION_ATTEMPTS):
        row = gen.dirichlet(alpha)
        if c0 == 0.0 or row.min() > c0:
            return row
    rate = 1.0 - 1.0 / MAX_REJECTION_ATTEMPTS
    raise RuntimeError(
        f"rejection rate above {rate:.4f} drawing Dirichlet rows with floor "
        f"c0={c0}; the floor is too aggressive for alpha={alpha}")


def prior_draw(prior: PriorSpec, rng) -> AdmixtureModel:
    """One component matrix from the truncated prior."""
    gen = as_generator(rng)
    alpha = np.full(prior.d + 1, prior.lam)
    rows = [_rejection_dirichlet(gen, alpha, prior.c0) for _ in range(prior.k)]
    return AdmixtureModel(np.vstack(rows), MixingLaw(prior.gamma), c0=prior.c0)


# ---------------------------------------------------------------------------
# collapsed Gibbs
# ---------------------------------------------------------------------------

@dataclass
class GibbsState:
    """Token-to-component assignments with incremental count tables."""
    z: np.ndarray        # (m, n) in 0..k-1
    n_it: np.ndarray     # (m, k) doc-component counts
    n_tl: np.ndarray     # (k, d+1) component-symbol counts
    n_t: np.ndarray      # (k,) component totals

    @classmethod
    def init_random(cls, dataset: Dataset, k: int, rng) -> "GibbsState":
        gen = as_generator(rng)
        z = gen.integers(0, k, size=(dataset.m, dataset.n), dtype=np.int64)
        return cls.from_assignments(z, dataset, k)

    @classmethod
    def from_assignments(cls, z: np.ndarray, dataset: Dataset, k: int) -> "GibbsState":
        m, n = dataset.m, dataset.n
        n_it = np.zeros((m, k), dtype=np.int64)
        n_tl = np.zeros((k, dataset.d + 1), dtype=np.int64)
        for i in range(m):
            n_it[i] = np.bincount(z[i], minlength=k)
            for t in range(k):
                sel = dataset.X[i][z[i] == t]
                n_tl[t] += np.bincount(sel, minlength=dataset.d + 1)
        return cls(np.array(z, dtype=np.int64), n_it, n_tl, n_tl.sum(axis=1))

    def recount_check(self, dataset: Dataset) -> None:
        ref = GibbsState.from_assignments(self.z, dataset, self.n_t.size)
        if not (np.array_equal(ref.n_it, self.n_it)
                and np.array_equal(ref.n_tl, self.n_tl)
                and np.array_equal(ref.n_t, self.n_t)):
            raise RuntimeError("count-table drift: incremental tables disagree with recount")


@njit(cache=True, nogil=True)
def _sweep_kernel(z, x, n_it, n_tl, n_t, gamma, lam, u):  # pragma: no cover
    m, n = x.shape
    k = n_t.shape[0]
    d1 = n_tl.shape[1]
    w = np.empty(k)
    idx = 0
    for i in range(m):
        for j in range(n):
            told = z[i, j]
            xx = x[i, j]
            n_it[i, told] -= 1
            n_tl[told, xx] -= 1
            n_t[told] -= 1
            tot = 0.0
            for t in range(k):
                wt = (n_it[i, t] + gamma[t]) * (n_tl[t, xx] + lam) / (n_t[t] + d1 * lam)
                w[t] = wt
                tot += wt
            r = u[idx] * tot
            idx += 1
            tnew = k - 1
            cum = 0.0
            for t in range(k):
                cum += w[t]
                if r < cum:
                    tnew = t
                    break
            z[i, j] = tnew
            n_it[i, tnew] += 1
            n_tl[tnew, xx] += 1
            n_t[tnew] += 1


def collapsed_conditional(state: GibbsState, dataset: Dataset, prior: PriorSpec,
                          i: int, j: int) -> np.ndarray:
    """Reference conditional P(z_ij = t | rest), normalized (test oracle path)."""
    told = state.z[i, j]
    xx = dataset.X[i, j]
    n_it = state.n_it[i].astype(float).copy()
    n_tl_x = state.n_tl[:, xx].astype(float).copy()
    n_t = state.n_t.astype(float).copy()
    n_it[told] -= 1
    n_tl_x[told] -= 1
    n_t[told] -= 1
    d1 = dataset.d + 1
    w = (n_it + prior.gamma) * (n_tl_x + prior.lam) / (n_t + d1 * prior.lam)
    return w / w.sum()


def gibbs_sweep(state: GibbsState, dataset: Dataset, prior: PriorSpec, rng,
                debug_recount: bool = False) -> GibbsState:
    """One full systematic sweep over all tokens (state updated in place)."""
    gen = as_generator(rng)
    u = gen.random(dataset.m * dataset.n)
    _sweep_kernel(state.z, dataset.X, state.n_it, state.n_tl, state.n_t,
                  np.asarray(prior.gamma, dtype=float), float(prior.lam), u)
    if debug_recount:
        state.recount_check(dataset)
    return state


def collapsed_loglik(state: GibbsState, prior: PriorSpec) -> float:
    """log P(z, X) with beta and the component rows integrated out."""
    g = prior.gamma
    g0 = float(g.sum())
    lam = prior.lam
    d1 = state.n_tl.shape[1]
    n_per_doc = state.n_it.sum(axis=1)
    doc = (gammaln(g0) - gammaln(g0 + n_per_doc)
           + (gammaln(g[None, :] + state.n_it) - gammaln(g[None, :])).sum(axis=1))
    top = (gammaln(d1 * lam) - gammaln(d1 * lam + state.n_t)
           + (gammaln(lam + state.n_tl) - gammaln(lam)).sum(axis=1))
    return float(doc.sum() + top.sum())


@dataclass(frozen=True)
class ChainSample:
    chain: int
    iteration: int
    theta: np.ndarray
    loglik: float
    dH: float
    dM: float


@dataclass(frozen=True)
class PosteriorChain:
    samples: tuple
    iters: int
    burnin: int
    thin: int
    chains: int
    seed: int
    loglik_rhat: float
    rhat_flag: bool
    floor_fallbacks: int = 0

    @property
    def dM(self) -> np.ndarray:
        return np.array([s.dM for s in self.samples])

    @property
    def dH(self) -> np.ndarray:
        return np.array([s.dH for s in self.samples])

    @property
    def loglik(self) -> np.ndarray:
        return np.array([s.loglik for s in self.samples])


def split_rhat(series) -> float:
    """Split-half potential scale reduction on equal-length chain series."""
    halves = []
    for s in series:
        s = np.asarray(s, dtype=float)
        half = s.size // 2
        if half >= 2:
            halves.append(s[:half])
            halves.append(s[half:2 * half])
    if len(halves) < 2:
        return float("nan")
    arr = np.vstack(halves)
    L = arr.shape[1]
    W = float(arr.var(axis=1, ddof=1).mean())
    B = float(L * arr.mean(axis=1).var(ddof=1))
    if W <= 1e-300:
        return 1.0
    var_plus = (L - 1) / L * W + B / L
    return math.sqrt(var_plus / W)


def _truncated_pair_gibbs(gen, alpha: np.ndarray, c0: float, sweeps: int = 40) -> np.ndarray:
    """Draw from Dirichlet(alpha) truncated to min > c0 when rejection is
    hopeless: pairwise Gibbs with truncated-Beta inverse-CDF steps.

    Given the other coordinates, the conditional of theta_l/(theta_l+theta_l')
    is exactly Beta(alpha_l, alpha_l') truncated to an interval, so each pair
    update targets the truncated joint exactly; a fixed number of sweeps from
    a feasible start is used (annotation draws only, never fed back into the
    assignment chain)."""
    from scipy.stats import beta as beta_dist
    k = alpha.size
    theta = c0 + (1.0 - k * c0) * gen.dirichlet(alpha)
    for _ in range(sweeps):
        for l in range(k):
            for l2 in range(l + 1, k):
                s = theta[l] + theta[l2]
                lo, hi = c0 / s, 1.0 - c0 / s
                if lo >= hi:
                    continue
                flo = beta_dist.cdf(lo, alpha[l], alpha[l2])
                fhi = beta_dist.cdf(hi, alpha[l], alpha[l2])
                u = gen.random()
                if fhi - flo <= 0:
                    w = lo + u * (hi - lo)
                else:
                    w = float(beta_dist.ppf(flo + u * (fhi - flo), alpha[l], alpha[l2]))
                w = min(max(w, lo), hi)
                theta[l], theta[l2] = s * w, s * (1.0 - w)
    return theta


def _draw_theta(gen, prior: PriorSpec, n_tl: np.ndarray,
                rejection_cap: int = 500):
    """Per-component conditional Dirichlet draws, floored to the c0-interior.

    Rejection keeps the exact truncated conditional; states whose acceptance
    is vanishing fall back to the pair-Gibbs truncated sampler. Returns
    (theta, fallback_count)."""
    rows = []
    fallbacks = 0
    for t in range(prior.k):
        alpha = prior.lam + n_tl[t].astype(float)
        row = None
        for _ in range(rejection_cap):
            cand = gen.dirichlet(alpha)
            if prior.c0 == 0.0 or cand.min() > prior.c0:
                row = cand
                break
        if row is None:
            row = _truncated_pair_gibbs(gen, alpha, prior.c0)
            fallbacks += 1
        rows.append(row)
    return np.vstack(rows), fallbacks


def posterior_sample(dataset: Dataset, prior: PriorSpec, iters: int,
                     burnin: int | None = None, thin: int | None = None,
                     chains: int = 1, seed: int = 0,
                     G0: Polytope | None = None,
                     debug_recount: bool = False,
                     max_retained: int = 2000) -> PosteriorChain:
    """Merged post-burn-in samples of component matrices across chains.

    Distances to G0 (when supplied) are computed per retained sample.
    Chain c uses the stream derived from hash(seed, c), so reruns with the
    same seed reproduce the chains exactly.
    """
    if burnin is None:
        burnin = iters // 2
    if iters <= burnin:
        raise ValueError("iters must exceed burnin")
    if thin is None:
        thin = max(1, math.ceil(chains * (iters - burnin) / max_retained))
    samples = []
    per_chain_loglik = []
    fallbacks = 0
    for c in range(chains):
        gen = as_generator(derive_seed(seed, "chain", c))
        state = GibbsState.init_random(dataset, prior.k, gen)
        logliks = []
        for it in range(iters):
            u = gen.random(dataset.m * dataset.n)
            _sweep_kernel(state.z, dataset.X, state.n_it, state.n_tl, state.n_t,
                          np.asarray(prior.gamma, dtype=float), float(prior.lam), u)
            if debug_recount:
                state.recount_check(dataset)
            if it >= burnin and (it - burnin) % thin == 0:
                theta, fb = _draw_theta(gen, prior, state.n_tl)
                fallbacks += fb
                ll = collapsed_loglik(state, prior)
                if G0 is not None:
                    P = Polytope(theta, on_simplex=True)
                    dh = hausdorff(P, G0)
                    dm = min_matching(P, G0)
                else:
                    dh = dm = float("nan")
                samples.append(ChainSample(c, it, theta, ll, dh, dm))
                logliks.append(ll)
        per_chain_loglik.append(np.array(logliks))
    rhat = split_rhat(per_chain_loglik) if chains >= 1 else float("nan")
    flag = bool(rhat > 1.1) if np.isfinite(rhat) else False
    return PosteriorChain(tuple(samples), iters, burnin, thin, chains, seed,
                          float(rhat), flag, fallbacks)


def gibbs_pattern_frequencies(dataset: Dataset, prior: PriorSpec, sweeps: int,
                              rng, burnin: int = 0) -> np.ndarray:
    """Empirical distribution over full z-assignments along the chain.

    Patterns are encoded base-k in row-major token order (the same order the
    exact enumeration uses); only feasible for m*n tokens small."""
    tokens = dataset.m * dataset.n
    k = prior.k
    if k ** tokens > 2 ** 20:
        raise ValueError("assignment space too large to tabulate")
    gen = as_generator(rng)
    state = GibbsState.init_random(dataset, prior.k, gen)
    pows = k ** np.arange(tokens, dtype=np.int64)
    codes = np.empty(sweeps, dtype=np.int64)
    gamma = np.asarray(prior.gamma, dtype=float)
    for it in range(burnin + sweeps):
        u = gen.random(tokens)
        _sweep_kernel(state.z, dataset.X, state.n_it, state.n_tl, state.n_t,
                      gamma, float(prior.lam), u)
        if it >= burnin:
            codes[it - burnin] = int(state.z.ravel() @ pows)
    freq = np.bincount(codes, minlength=k ** tokens).astype(float)
    return freq / freq.sum()


# ---------------------------------------------------------------------------
# exact tiny-instance posterior
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BruteForcePosterior:
    """Exact posterior over all assignment patterns (base-k row-major codes)."""
    probs: np.ndarray
    log_probs: np.ndarray
    k: int
    tokens: int

    def tv_to(self, other_probs: np.ndarray) -> float:
        return 0.5 * float(np.abs(self.probs - np.asarray(other_probs)).sum())


def brute_force_posterior(dataset: Dataset, prior: PriorSpec) -> BruteForcePosterior:
    """Exact z-posterior by conjugate marginalization per assignment."""
    m, n = dataset.m, dataset.n
    tokens = m * n
    k = prior.k
    total = k ** tokens
    if total > 2 ** 16:
        raise ValueError("instance too large for exhaustive enumeration")
    codes = np.arange(total, dtype=np.int64)
    digits = (codes[:, None] // (k ** np.arange(tokens, dtype=np.int64))[None, :]) % k
    digits = digits.reshape(total, m, n)
    g = prior.gamma
    g0 = float(g.sum())
    lam = prior.lam
    d1 = dataset.d + 1
    ll = np.zeros(total)
    for i in range(m):
        n_it = np.stack([(digits[:, i, :] == t).sum(axis=1) for t in range(k)], axis=1)
        ll += (gammaln(g0) - gammaln(g0 + n)
               + (gammaln(g[None, :] + n_it) - gammaln(g[None, :])).sum(axis=1))
    for t in range(k):
        mask_t = digits == t
        n_tl = np.stack([((dataset.X[None, :, :] == l) & mask_t).sum(axis=(1, 2))
                         for l in range(d1)], axis=1)
        n_t = n_tl.sum(axis=1)
        ll += (gammaln(d1 * lam) - gammaln(d1 * lam + n_t)
               + (gammaln(lam + n_tl) - gammaln(lam)).sum(axis=1))
    ll -= ll.max()
    probs = np.exp(ll)
    probs /= probs.sum()
    return BruteForcePosterior(probs, np.log(probs), k, tokens)


# ---------------------------------------------------------------------------
# rates and contraction statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RateValue:
    delta: float
    p: int
    exponent: float
    base: float
    constraints: dict


def rate_formula(m: int, n: int, k: int, d: int, alpha: float = 0.0,
                 variant: str = "overfitted") -> RateValue:
    """Contraction-rate sequence [log m/m + log n/n + log n/m]^(1/(2(p+alpha)))
    with p = (k-1) ^ d in the overfitted variant, p = 1 in the parametric one."""
    if m < 2 or n < 2:
        raise ValueError("m and n must be at least 2")
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    base = math.log(m) / m + math.log(n) / n + math.log(n) / m
    p = min(k - 1, d)
    if variant == "overfitted":
        exponent = 1.0 / (2.0 * (p + alpha))
    elif variant == "parametric":
        exponent = 1.0 / (2.0 * (1.0 + alpha))
    else:
        raise ValueError(f"unknown variant {variant!r}")
    constraints = {"log_m_lt_n": math.log(m) < n,
                   "log_n_le_m_over_10": math.log(n) <= m / 10.0}
    return RateValue(base ** exponent, p, exponent, base, constraints)


def make_rate_spec(m: int, n: int, k: int, d: int, alpha: float = 0.0,
                   C: float = 1.0, variant: str = "overfitted") -> RateSpec:
    rv = rate_formula(m, n, k, d, alpha, variant)
    eps = (math.sqrt(math.log(m) / m) + math.sqrt(math.log(n) / m)
           + math.sqrt(math.log(n) / n))
    return RateSpec(m=m, n=n, p=rv.p, alpha=alpha, C=C,
                    M_m=rv.delta / eps, eps_mn=eps, delta_mn=rv.delta)


@dataclass(frozen=True)
class ContractionStat:
    prob_exceed: float
    dM_quantiles: dict
    dH_quantiles: dict
    C: float
    delta_mn: float


def contraction_stat(chain: PosteriorChain, G0: Polytope, C: float,
                     rate: RateSpec) -> ContractionStat:
    """Posterior mass outside the C * delta_mn matching-distance ball."""
    if not chain.samples:
        raise ValueError("empty chain")
    dM = chain.dM
    dH = chain.dH
    if np.any(np.isnan(dM)):
        dM = np.array([min_matching(Polytope(s.theta, on_simplex=True), G0)
                       for s in chain.samples])
        dH = np.array([hausdorff(Polytope(s.theta, on_simplex=True), G0)
                       for s in chain.samples])
    threshold = C * rate.delta_mn
    if math.isinf(threshold):
        prob = 0.0
    else:
        prob = float(np.mean(dM >= threshold))
    qs = (0.1, 0.5, 0.9)
    dMq = {f"q{int(q * 100)}": float(np.quantile(dM, q)) for q in qs}
    dHq = {f"q{int(q * 100)}": float(np.quantile(dH, q)) for q in qs}
    return ContractionStat(prob, dMq, dHq, float(C), rate.delta_mn)

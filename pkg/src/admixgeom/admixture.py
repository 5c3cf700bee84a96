"""Mixed-membership generative model for categorical sequences.

Each individual draws mixture weights beta from a Dirichlet law, forms a
frequency vector eta as the corresponding convex combination of the k
component rows, and emits n iid symbols from Mult(eta). The module provides
the samplers, empirical frequencies, and the marginal sequence likelihood
with three routes:

* ``exact_quadrature`` -- adaptive quadrature over the beta simplex (k <= 3);
* ``exact_latent``     -- closed-form finite sum over latent component
  assignments using Dirichlet moments (any k, cost grows with n);
* ``montecarlo``       -- averages over eta draws with log-sum-exp
  stabilization and a delta-method standard error.

The two exact routes agree up to quadrature tolerance and cross-check each
other in the test suite.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.special import gammaln, logsumexp

from .geometry import Polytope, extreme_points
from .seeding import as_generator

ROW_SUM_TOL = 1e-9
QUAD_EPSREL = 1e-8
LATENT_TERM_CAP = 2_000_000


class QuadratureToleranceError(RuntimeError):
    """Quadrature budget exhausted before reaching the requested tolerance."""


@dataclass(frozen=True)
class MixingLaw:
    """Dirichlet mixing parameters for the component weights."""
    gamma: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gamma, dtype=float).reshape(-1)
        if g.size == 0 or np.any(g <= 0) or not np.all(np.isfinite(g)):
            raise ValueError("gamma must be a vector of positive reals")
        g = g.copy()
        g.setflags(write=False)
        object.__setattr__(self, "gamma", g)

    @property
    def k(self) -> int:
        return self.gamma.size

    @property
    def symmetric(self) -> bool:
        return bool(np.all(self.gamma == self.gamma[0]))


class AdmixtureModel:
    """Component rows on the simplex plus a Dirichlet mixing law.

    Every row must stay strictly above the interior floor c0 (for c0 = 0 the
    boundary is allowed, which admits degenerate test fixtures)."""

    def __init__(self, theta, gamma, c0: float = 0.0):
        th = np.atleast_2d(np.asarray(theta, dtype=float))
        if th.ndim != 2 or th.shape[1] < 2:
            raise ValueError("theta must be a k x (d+1) matrix with d >= 1")
        if np.any(np.abs(th.sum(axis=1) - 1.0) > ROW_SUM_TOL):
            raise ValueError("every theta row must sum to 1 within 1e-9")
        if c0 < 0:
            raise ValueError("c0 must be nonnegative")
        mins = th.min(axis=1)
        if c0 > 0 and np.any(mins <= c0):
            raise ValueError(f"row minima {mins.min():.4g} must exceed c0={c0}")
        if c0 == 0 and np.any(mins < 0):
            raise ValueError("theta entries must be nonnegative")
        mixing = gamma if isinstance(gamma, MixingLaw) else MixingLaw(np.asarray(gamma))
        if mixing.k != th.shape[0]:
            raise ValueError("gamma length must equal the number of rows")
        self.theta = th.copy()
        self.theta.setflags(write=False)
        self.mixing = mixing
        self.c0 = float(c0)
        self._polytope = None

    @property
    def k(self) -> int:
        return self.theta.shape[0]

    @property
    def d(self) -> int:
        return self.theta.shape[1] - 1

    def polytope(self) -> Polytope:
        if self._polytope is None:
            self._polytope = extreme_points(self.theta, on_simplex=True)
        return self._polytope

    def to_json(self) -> str:
        return json.dumps({"theta": [list(map(float, r)) for r in self.theta],
                           "gamma": list(map(float, self.mixing.gamma)),
                           "c0": self.c0})

    @classmethod
    def from_json(cls, text: str) -> "AdmixtureModel":
        obj = json.loads(text)
        return cls(np.array(obj["theta"], dtype=float),
                   np.array(obj["gamma"], dtype=float),
                   float(obj.get("c0", 0.0)))


class Dataset:
    """m x n matrix of symbols in {0..d}."""

    def __init__(self, X, d: int):
        X = np.atleast_2d(np.asarray(X, dtype=np.int64))
        if X.size and (X.min() < 0 or X.max() > d):
            raise ValueError(f"symbols must lie in 0..{d}")
        self.X = X.copy()
        self.X.setflags(write=False)
        self.d = int(d)
        self.m, self.n = X.shape

    def to_json(self, seed=None, model: AdmixtureModel | None = None) -> str:
        obj = {"d": self.d, "m": self.m, "n": self.n,
               "rows": [list(map(int, r)) for r in self.X]}
        if seed is not None:
            obj["seed"] = int(seed)
        if model is not None:
            obj["model"] = json.loads(model.to_json())
        return json.dumps(obj)

    @classmethod
    def from_json(cls, text: str) -> "Dataset":
        obj = json.loads(text)
        rows = np.array(obj["rows"], dtype=np.int64).reshape(obj["m"], obj["n"])
        return cls(rows, obj["d"])


@dataclass(frozen=True)
class EmpiricalFreq:
    """Per-symbol frequencies of one row; counts kept so sums stay exact."""
    counts: np.ndarray
    n: int

    @property
    def eta_hat(self) -> np.ndarray:
        return self.counts / self.n


def sample_beta(mixing: MixingLaw, rng) -> np.ndarray:
    """One Dirichlet draw of component weights."""
    gen = as_generator(rng)
    if mixing.k == 1:
        return np.ones(1)
    return gen.dirichlet(mixing.gamma)


def sample_eta(model: AdmixtureModel, rng) -> np.ndarray:
    """One frequency vector: a random convex combination of the rows."""
    beta = sample_beta(model.mixing, rng)
    return beta @ model.theta


def _sample_etas(model: AdmixtureModel, size: int, gen) -> np.ndarray:
    if model.k == 1:
        return np.tile(model.theta[0], (size, 1))
    betas = gen.dirichlet(model.mixing.gamma, size=size)
    return betas @ model.theta


def sample_dataset(model: AdmixtureModel, m: int, n: int, rng) -> Dataset:
    """m independent individuals, each with one eta and n iid symbols."""
    if m < 1 or n < 1:
        raise ValueError("m and n must be at least 1")
    gen = as_generator(rng)
    X = np.empty((m, n), dtype=np.int64)
    for i in range(m):
        eta = sample_eta(model, gen)
        cum = np.cumsum(eta)
        cum[-1] = max(cum[-1], 1.0)
        u = gen.random(n)
        X[i] = np.searchsorted(cum, u, side="right")
    return Dataset(X, model.d)


def empirical_freq(row, d: int) -> EmpiricalFreq:
    """Symbol frequencies eta_hat_i = #{j : X_j = i} / n."""
    row = np.asarray(row, dtype=np.int64).reshape(-1)
    if row.size == 0:
        raise ValueError("empty row")
    if row.min() < 0 or row.max() > d:
        raise ValueError(f"symbols must lie in 0..{d}")
    counts = np.bincount(row, minlength=d + 1).astype(float)
    counts.setflags(write=False)
    return EmpiricalFreq(counts, int(row.size))


@dataclass(frozen=True)
class MarginalEstimate:
    logp: float
    stderr: float
    method: str


def _row_counts(row, d: int) -> tuple:
    row = np.asarray(row, dtype=np.int64).reshape(-1)
    if row.size == 0:
        raise ValueError("empty row")
    return tuple(int(c) for c in np.bincount(row, minlength=d + 1))


# -- closed-form latent-assignment route -------------------------------------

@lru_cache(maxsize=None)
def _compositions(total: int, parts: int) -> np.ndarray:
    """All nonnegative integer vectors of given length summing to total."""
    if parts == 1:
        return np.array([[total]], dtype=np.int64)
    out = []
    for first in range(total + 1):
        rest = _compositions(total - first, parts - 1)
        block = np.empty((rest.shape[0], parts), dtype=np.int64)
        block[:, 0] = first
        block[:, 1:] = rest
        out.append(block)
    return np.vstack(out)


@lru_cache(maxsize=None)
def _latent_table(counts: tuple, k: int, gamma: tuple):
    """Term table for the exact marginal of one symbol-count vector.

    Expanding prod_t eta_{x_t} over latent component assignments and taking
    Dirichlet moments leaves a finite sum; each term is a per-component
    symbol-count matrix M with weight
    multinomial(counts; M) * prod_j rising(gamma_j, sum_l M_jl) / rising(sum gamma, n).
    Returns (M_flat, log_weights) with M_flat of shape (terms, k*(d+1)).
    """
    gamma_v = np.asarray(gamma, dtype=float)
    n = int(sum(counts))
    d1 = len(counts)
    per_symbol = []
    n_terms = 1
    for c in counts:
        comp = _compositions(int(c), k)
        per_symbol.append(comp)
        n_terms *= comp.shape[0]
        if n_terms > LATENT_TERM_CAP:
            raise ValueError("latent-assignment expansion too large for this n, k")
    M = np.zeros((n_terms, k, d1), dtype=np.int64)
    logmult = np.zeros(n_terms)
    reps = n_terms
    for l, comp in enumerate(per_symbol):
        cnt = comp.shape[0]
        reps //= cnt
        tile = n_terms // (cnt * reps)
        idx = np.tile(np.repeat(np.arange(cnt), reps), tile)
        M[:, :, l] = comp[idx]
        logmult += (gammaln(counts[l] + 1.0)
                    - gammaln(comp[idx] + 1.0).sum(axis=1))
    a = M.sum(axis=2)                                  # per-component totals
    logpoch = (gammaln(gamma_v[None, :] + a) - gammaln(gamma_v[None, :])).sum(axis=1)
    g0 = float(gamma_v.sum())
    log_w = logmult + logpoch - (gammaln(g0 + n) - gammaln(g0))
    return M.reshape(n_terms, k * d1), log_w


def _loglik_latent(model: AdmixtureModel, counts: tuple) -> float:
    Mflat, log_w = _latent_table(counts, model.k, tuple(map(float, model.mixing.gamma)))
    # -1e300 stands in for log(0) so that 0 * log(0) terms vanish
    logtheta = np.where(model.theta > 0,
                        np.log(np.maximum(model.theta, 1e-300)), -1e300).reshape(-1)
    scores = log_w + Mflat @ logtheta
    out = float(logsumexp(scores))
    return out if out > -1e250 else -math.inf


# -- quadrature route ---------------------------------------------------------

def _loglik_quadrature(model: AdmixtureModel, counts: tuple, budget: int) -> float:
    k = model.k
    c = np.asarray(counts, dtype=float)
    th = model.theta
    g = model.mixing.gamma
    mask = c > 0

    def integrand_eta(eta):
        lg = np.log(np.maximum(eta[mask], 1e-300))
        return math.exp(float(np.dot(c[mask], lg)))

    if k == 1:
        lg = np.where(th[0] > 0, np.log(np.maximum(th[0], 1e-300)), -np.inf)
        val = float(np.dot(c[mask], lg[mask])) if mask.any() else 0.0
        return val if np.isfinite(val) else -math.inf
    limit = max(int(budget), 1)
    if k == 2:
        lognorm = gammaln(g.sum()) - gammaln(g).sum()

        def f(b):
            eta = b * th[0] + (1.0 - b) * th[1]
            w = (b ** (g[0] - 1.0)) * ((1.0 - b) ** (g[1] - 1.0))
            return integrand_eta(eta) * w
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, err = integrate.quad(f, 0.0, 1.0, epsabs=0.0, epsrel=QUAD_EPSREL,
                                      limit=limit)
        val *= math.exp(lognorm)
        err *= math.exp(lognorm)
    elif k == 3:
        lognorm = gammaln(g.sum()) - gammaln(g).sum()

        def f(b2, b1):
            b3 = 1.0 - b1 - b2
            if b3 < 0:
                return 0.0
            eta = b1 * th[0] + b2 * th[1] + b3 * th[2]
            w = (b1 ** (g[0] - 1.0)) * (b2 ** (g[1] - 1.0)) * (max(b3, 0.0) ** (g[2] - 1.0))
            return integrand_eta(eta) * w
        val, err = integrate.dblquad(f, 0.0, 1.0, 0.0, lambda b1: 1.0 - b1,
                                     epsabs=0.0, epsrel=QUAD_EPSREL)
        val *= math.exp(lognorm)
        err *= math.exp(lognorm)
    else:
        raise ValueError("exact quadrature supports k <= 3 only")
    if val <= 0:
        return -np.inf
    if err > 100 * QUAD_EPSREL * val:
        raise QuadratureToleranceError(
            f"quadrature error {err:.3g} above tolerance for value {val:.3g}")
    return math.log(val)


def marginal_loglik(model: AdmixtureModel, row, method: str = "exact_latent",
                    budget: int = 100_000, rng=None) -> MarginalEstimate:
    """Log marginal probability of one symbol row under the model.

    The marginal depends on the row only through its symbol counts.
    """
    counts = _row_counts(row, model.d)
    if method == "exact_latent":
        return MarginalEstimate(_loglik_latent(model, counts), 0.0, method)
    if method == "exact_quadrature":
        if model.k > 3:
            raise ValueError("exact quadrature supports k <= 3 only")
        return MarginalEstimate(_loglik_quadrature(model, counts, budget), 0.0, method)
    if method != "montecarlo":
        raise ValueError(f"unknown method {method!r}")
    gen = as_generator(rng)
    N = int(budget)
    etas = _sample_etas(model, N, gen)
    with np.errstate(divide="ignore"):
        logeta = np.where(etas > 0, np.log(np.maximum(etas, 1e-300)), -np.inf)
    cvec = np.asarray(counts, dtype=float)
    logvals = logeta @ cvec
    logvals = np.where(np.isfinite(logvals), logvals, -1e300)
    shift = logvals.max()
    w = np.exp(logvals - shift)
    mean_w = float(w.mean())
    sd_w = float(w.std(ddof=1)) if N > 1 else 0.0
    logp = shift + math.log(mean_w)
    stderr = sd_w / (mean_w * math.sqrt(N)) if mean_w > 0 else math.inf
    return MarginalEstimate(logp, stderr, "montecarlo")


@dataclass(frozen=True)
class RegularityProbe:
    """Small-ball probabilities P(|eta - eta0| <= eps), the fitted log-log
    exponent, the theoretical lower-bound exponent for Dirichlet mixing
    (k-1 when k <= d+1, else d + sum(gamma)), and the implied constant."""
    entries: tuple
    fitted_exponent: float
    theory_exponent: float
    c6_hat: float


def regularity_probe(model: AdmixtureModel, eta0, eps_list, N: int, rng) -> RegularityProbe:
    """Monte Carlo small-ball masses of the eta law around a reference point."""
    eta0 = np.asarray(eta0, dtype=float).reshape(-1)
    G = model.polytope()
    if not bool(G.contains(eta0[None, :], tol=1e-7)[0]):
        raise ValueError("eta0 must lie in the model polytope")
    eps_arr = np.asarray(list(eps_list), dtype=float)
    if np.any(eps_arr <= 0):
        raise ValueError("eps values must be positive")
    gen = as_generator(rng)
    etas = _sample_etas(model, int(N), gen)
    dists = np.linalg.norm(etas - eta0, axis=1)
    entries = []
    for eps in eps_arr:
        hits = float(np.mean(dists <= eps))
        stderr = math.sqrt(max(hits * (1.0 - hits), 0.0) / N)
        entries.append({"eps": float(eps), "prob_estimate": hits, "stderr": stderr})
    pos = [(e["eps"], e["prob_estimate"]) for e in entries if e["prob_estimate"] > 0]
    if len(pos) >= 2:
        lx = np.log([p[0] for p in pos])
        ly = np.log([p[1] for p in pos])
        slope = float(np.polyfit(lx, ly, 1)[0])
    else:
        slope = math.nan
    if model.k <= model.d + 1:
        theory = float(model.k - 1)
    else:
        theory = float(model.d + model.mixing.gamma.sum())
    c6 = min((pr / e ** theory for e, pr in pos), default=math.nan)
    return RegularityProbe(tuple(entries), slope, theory, float(c6))

"""Convex polytopes in the probability simplex: metrics, volumes, regularity checks.

Polytopes are stored by their generator points in the full ambient space
(R^{d+1} when living on the simplex). The extreme set, affine span and
facet representation are computed once at construction; instances are
immutable afterwards and safe to share between threads.

Two metrics are provided: the Hausdorff distance between hulls and the
minimum-matching distance between extreme-point sets. Both reduce to
point-to-hull projections, solved as least squares over barycentric
weights (projected gradient with a duality-gap stop, plus an active-set
polish so positive distances come out at machine precision).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError


SPAN_TOL = 1e-9        # rank tolerance of the affine-span orthogonalization
GAP_TOL = 1e-10        # duality-gap stop for the barycentric least squares
EXTREME_TOL = 1e-9     # hull-membership cutoff when reducing generators
AFFINE_TOL = 1e-8      # max residual for "same affine hull" checks


def _convex_hull(Y: np.ndarray) -> ConvexHull:
    # joggle nearly-degenerate inputs rather than fail (deterministic)
    try:
        return ConvexHull(Y)
    except QhullError:
        return ConvexHull(Y, qhull_options="QJ")


class AffineSpanError(ValueError):
    """Raised when an operation requires two polytopes to share an affine hull."""


def as_point(coords, on_simplex: bool = False) -> np.ndarray:
    """Validate a point; with ``on_simplex`` require entries >= 0 summing to 1."""
    x = np.asarray(coords, dtype=float).reshape(-1)
    if x.size == 0 or not np.all(np.isfinite(x)):
        raise ValueError("point must be a nonempty finite vector")
    if on_simplex:
        if np.min(x) < -1e-9 or abs(float(x.sum()) - 1.0) > 1e-9:
            raise ValueError("point is not on the probability simplex within 1e-9")
    return x


def _project_simplex(v: np.ndarray) -> np.ndarray:
    # Euclidean projection onto {w >= 0, sum w = 1} (sort-based).
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    cond = u - css / idx > 0
    rho = idx[cond][-1]
    theta = css[cond][-1] / rho
    return np.maximum(v - theta, 0.0)


def _polish_support(G, b, w):
    # Equality-constrained least squares on the current support; drops
    # negative weights and retries so the KKT point is feasible.
    k = w.size
    for _ in range(k + 1):
        S = np.flatnonzero(w > 1e-12)
        if S.size == 0:
            return w
        kk = S.size
        K = np.zeros((kk + 1, kk + 1))
        K[:kk, :kk] = G[np.ix_(S, S)]
        K[:kk, kk] = 1.0
        K[kk, :kk] = 1.0
        rhs = np.append(b[S], 1.0)
        sol, *_ = np.linalg.lstsq(K, rhs, rcond=None)
        u = sol[:kk]
        w = np.zeros(k)
        w[S] = np.maximum(u, 0.0)
        tot = w.sum()
        if tot <= 0:
            return w
        w /= tot
        if np.all(u >= -1e-12):
            return w
    return w


def _point_segment(a, b, p):
    ab = b - a
    denom = float(ab @ ab)
    if denom <= 1e-300:
        return float(np.linalg.norm(p - a)), np.array([1.0, 0.0])
    t = min(max(float((p - a) @ ab) / denom, 0.0), 1.0)
    q = a + t * ab
    return float(np.linalg.norm(p - q)), np.array([1.0 - t, t])


def _point_triangle(a, b, c, p):
    # closest point on a triangle via barycentric region tests; exact and
    # valid in any ambient dimension
    ab, ac, ap = b - a, c - a, p - a
    d1, d2 = float(ab @ ap), float(ac @ ap)
    if d1 <= 0.0 and d2 <= 0.0:
        return float(np.linalg.norm(p - a)), np.array([1.0, 0.0, 0.0])
    bp = p - b
    d3, d4 = float(ab @ bp), float(ac @ bp)
    if d3 >= 0.0 and d4 <= d3:
        return float(np.linalg.norm(p - b)), np.array([0.0, 1.0, 0.0])
    vc = d1 * d4 - d3 * d2
    if vc <= 0.0 and d1 >= 0.0 and d3 <= 0.0:
        v = d1 / (d1 - d3)
        return float(np.linalg.norm(p - (a + v * ab))), np.array([1.0 - v, v, 0.0])
    cp = p - c
    d5, d6 = float(ab @ cp), float(ac @ cp)
    if d6 >= 0.0 and d5 <= d6:
        return float(np.linalg.norm(p - c)), np.array([0.0, 0.0, 1.0])
    vb = d5 * d2 - d1 * d6
    if vb <= 0.0 and d2 >= 0.0 and d6 <= 0.0:
        v = d2 / (d2 - d6)
        return float(np.linalg.norm(p - (a + v * ac))), np.array([1.0 - v, 0.0, v])
    va = d3 * d6 - d5 * d4
    if va <= 0.0 and (d4 - d3) >= 0.0 and (d5 - d6) >= 0.0:
        v = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        return float(np.linalg.norm(p - (b + v * (c - b)))), np.array([0.0, 1.0 - v, v])
    denom = va + vb + vc
    if abs(denom) <= 1e-300:                 # degenerate (collinear) triangle
        best = min((_point_segment(a, b, p) + (0,),
                    _point_segment(a, c, p) + (1,),
                    _point_segment(b, c, p) + (2,)), key=lambda t: t[0])
        dist, wseg, which = best
        w = np.zeros(3)
        if which == 0:
            w[[0, 1]] = wseg
        elif which == 1:
            w[[0, 2]] = wseg
        else:
            w[[1, 2]] = wseg
        return dist, w
    v, w_ = vb / denom, vc / denom
    q = a + v * ab + w_ * ac
    return float(np.linalg.norm(p - q)), np.array([1.0 - v - w_, v, w_])


def _simplex_lsq(A: np.ndarray, x: np.ndarray, gap_tol: float = GAP_TOL,
                 max_iter: int = 50_000):
    """min_w ||A w - x|| over the probability simplex; returns (distance, w).

    A has one column per generator; k <= 3 uses closed forms, larger k a
    projected gradient whose Frank-Wolfe gap grad.w - min_j grad_j
    upper-bounds the primal suboptimality and is the stopping certificate.
    """
    A = np.asarray(A, dtype=float)
    x = np.asarray(x, dtype=float)
    k = A.shape[1]
    if k == 1:
        w = np.ones(1)
        return float(np.linalg.norm(A[:, 0] - x)), w

    d2 = np.einsum("ij,ij->j", A - x[:, None], A - x[:, None])
    j0 = int(np.argmin(d2))
    if d2[j0] == 0.0:                       # exact vertex hit
        w = np.zeros(k)
        w[j0] = 1.0
        return 0.0, w
    if k == 2:
        return _point_segment(A[:, 0], A[:, 1], x)
    if k == 3:
        return _point_triangle(A[:, 0], A[:, 1], A[:, 2], x)

    G = A.T @ A
    b = A.T @ x
    L = float(np.linalg.eigvalsh(G)[-1])
    L = max(L, 1e-30)

    w = np.zeros(k)
    w[j0] = 1.0
    y = w.copy()
    t = 1.0
    for it in range(max_iter):
        grad_y = G @ y - b
        w_new = _project_simplex(y - grad_y / L)
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        y = w_new + ((t - 1.0) / t_new) * (w_new - w)
        w, t = w_new, t_new
        if it % 8 == 0 or it == max_iter - 1:
            grad = G @ w - b
            gap = float(grad @ w - grad.min())
            if gap <= 64 * gap_tol:
                w_p = _polish_support(G, b, w)
                f_w = 0.5 * w @ (G @ w) - b @ w
                f_p = 0.5 * w_p @ (G @ w_p) - b @ w_p
                if f_p <= f_w:
                    w = w_p
                    y, t = w.copy(), 1.0
                grad = G @ w - b
                gap = float(grad @ w - grad.min())
                if gap <= gap_tol:
                    break
    return float(np.linalg.norm(A @ w - x)), w


class Polytope:
    """Convex hull of finitely many points, with cached extreme set and span."""

    def __init__(self, points, on_simplex: bool = False):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] == 0:
            raise ValueError("a polytope needs at least one generator point")
        if not np.all(np.isfinite(pts)):
            raise ValueError("generator coordinates must be finite")
        if on_simplex:
            for row in pts:
                as_point(row, on_simplex=True)
        self._vertices = pts.copy()
        self._vertices.setflags(write=False)
        self.on_simplex = bool(on_simplex)

        self._extr_idx = self._reduce_extremes(pts)
        ext = pts[list(self._extr_idx)]
        self._origin = ext.mean(axis=0)
        centered = ext - self._origin
        if ext.shape[0] == 1:
            self._basis = np.zeros((pts.shape[1], 0))
            self._affine_dim = 0
        else:
            _, s, vt = np.linalg.svd(centered, full_matrices=False)
            rank_tol = SPAN_TOL * max(1.0, float(s[0]) if s.size else 1.0)
            p = int(np.sum(s > rank_tol))
            self._basis = vt[:p].T
            self._affine_dim = p
        self._span_ext = (ext - self._origin) @ self._basis
        self._hrep_cache = None
        self._edges_cache = None

    # -- construction helpers -------------------------------------------------

    @staticmethod
    def _reduce_extremes(pts: np.ndarray):
        n = pts.shape[0]
        scale = max(1.0, float(np.ptp(pts)) if n > 1 else 1.0)
        # drop exact/near duplicates, keeping first occurrence
        keep = []
        for i in range(n):
            if all(np.linalg.norm(pts[i] - pts[j]) > 1e-12 * scale for j in keep):
                keep.append(i)
        if len(keep) == 1:
            return tuple(keep)
        idx = list(keep)
        extreme = []
        for i in idx:
            others = [j for j in idx if j != i]
            dist, _ = _simplex_lsq(pts[others].T, pts[i])
            if dist > EXTREME_TOL * scale:
                extreme.append(i)
        if not extreme:     # fully degenerate (all points coincide numerically)
            extreme = [idx[0]]
        return tuple(extreme)

    # -- basic accessors -------------------------------------------------------

    @property
    def vertices(self) -> np.ndarray:
        """All generator points (rows), as given."""
        return self._vertices

    @property
    def extr_idx(self):
        return self._extr_idx

    @property
    def extreme_vertices(self) -> np.ndarray:
        return self._vertices[list(self._extr_idx)]

    @property
    def ambient_dim(self) -> int:
        return self._vertices.shape[1]

    @property
    def affine_dim(self) -> int:
        return self._affine_dim

    def __repr__(self):
        return (f"Polytope(k={len(self._extr_idx)} extreme of "
                f"{self._vertices.shape[0]}, p={self._affine_dim}, "
                f"D={self.ambient_dim})")

    # -- affine span -----------------------------------------------------------

    def to_span(self, points: np.ndarray) -> np.ndarray:
        return (np.atleast_2d(points) - self._origin) @ self._basis

    def from_span(self, coords: np.ndarray) -> np.ndarray:
        return self._origin + np.atleast_2d(coords) @ self._basis.T

    def span_residual(self, points: np.ndarray) -> float:
        pts = np.atleast_2d(points)
        back = self.from_span(self.to_span(pts))
        return float(np.max(np.linalg.norm(pts - back, axis=1))) if pts.size else 0.0

    # -- facet representation in span coordinates -------------------------------

    def _hrep(self):
        """(A, c) with A y <= c describing the hull in its own span coordinates."""
        if self._hrep_cache is None:
            Y = self._span_ext
            p = self._affine_dim
            if p == 0:
                A = np.zeros((0, 0))
                c = np.zeros(0)
            elif p == 1:
                y = Y[:, 0]
                A = np.array([[1.0], [-1.0]])
                c = np.array([float(y.max()), -float(y.min())])
            else:
                hull = _convex_hull(Y)
                A = hull.equations[:, :-1]
                c = -hull.equations[:, -1]
            self._hrep_cache = (A, c)
        return self._hrep_cache

    def contains(self, points, tol: float = 1e-9) -> np.ndarray:
        """Vectorized membership of ambient points, within ``tol``."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        ok = np.ones(pts.shape[0], dtype=bool)
        back = self.from_span(self.to_span(pts))
        ok &= np.linalg.norm(pts - back, axis=1) <= max(tol, 1e-9)
        if self._affine_dim == 0:
            ok &= np.linalg.norm(pts - self._origin, axis=1) <= max(tol, 1e-9)
            return ok
        A, c = self._hrep()
        Y = self.to_span(pts)
        ok &= np.all(Y @ A.T <= c + tol, axis=1)
        return ok

    def volume(self) -> float:
        """Volume in the polytope's own affine dimension (length for p=1)."""
        p = self._affine_dim
        if p == 0:
            return 0.0
        Y = self._span_ext
        if p == 1:
            return float(Y[:, 0].max() - Y[:, 0].min())
        return float(_convex_hull(Y).volume)

    # -- edge structure ----------------------------------------------------------

    def edges(self):
        """Pairs (i, j) of positions into the extreme set that form edges."""
        if self._edges_cache is not None:
            return self._edges_cache
        Y = self._span_ext
        k = Y.shape[0]
        p = self._affine_dim
        if k <= 1 or p == 0:
            out = ()
        elif p == 1 or k == 2:
            lo = int(np.argmin(Y[:, 0])) if p >= 1 else 0
            hi = int(np.argmax(Y[:, 0])) if p >= 1 else 1
            out = ((min(lo, hi), max(lo, hi)),)
        elif p == 2:
            order = self._ccw_order()
            out = tuple(sorted((min(order[t], order[(t + 1) % k]),
                                max(order[t], order[(t + 1) % k])))
                        for t in range(k))
            out = tuple(sorted(set(map(tuple, out))))
        else:
            pairs = []
            for i in range(k):
                for j in range(i + 1, k):
                    if self._is_edge_lp(i, j):
                        pairs.append((i, j))
            out = tuple(pairs)
        self._edges_cache = out
        return out

    def _ccw_order(self):
        Y = self._span_ext
        c = Y.mean(axis=0)
        ang = np.arctan2(Y[:, 1] - c[1], Y[:, 0] - c[0])
        return list(np.argsort(ang))

    def _is_edge_lp(self, i: int, j: int) -> bool:
        # Exists a supporting hyperplane touching exactly {y_i, y_j}:
        # max eps s.t. u.y_i = a, u.y_j = a, u.y_l <= a - eps, |u|_inf <= 1.
        Y = self._span_ext
        k, p = Y.shape
        nvar = p + 2               # u (p), a, eps
        cvec = np.zeros(nvar)
        cvec[-1] = -1.0
        A_eq = np.zeros((2, nvar))
        A_eq[0, :p] = Y[i]
        A_eq[0, p] = -1.0
        A_eq[1, :p] = Y[j]
        A_eq[1, p] = -1.0
        b_eq = np.zeros(2)
        rows = [l for l in range(k) if l not in (i, j)]
        A_ub = np.zeros((len(rows), nvar))
        for r, l in enumerate(rows):
            A_ub[r, :p] = Y[l]
            A_ub[r, p] = -1.0
            A_ub[r, p + 1] = 1.0
        b_ub = np.zeros(len(rows))
        bounds = [(-1.0, 1.0)] * p + [(None, None), (0.0, 1.0)]
        if rows:
            res = linprog(cvec, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                          bounds=bounds, method="highs")
        else:
            res = linprog(cvec, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
        if not res.success:
            return False
        scale = max(1.0, float(np.max(np.abs(Y))))
        return float(res.x[-1]) > 1e-9 * scale


def extreme_points(points, on_simplex: bool = False) -> Polytope:
    """Build a polytope from points, keeping only the extreme generators."""
    return Polytope(points, on_simplex=on_simplex)


def dist_point_polytope(x, G: Polytope) -> float:
    """Euclidean distance from a point to the hull (0 iff the point is inside)."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != G.ambient_dim:
        raise ValueError(f"point dimension {x.size} != ambient {G.ambient_dim}")
    ext = G.extreme_vertices
    dist, _ = _simplex_lsq(ext.T, x)
    # the nearest vertex is a feasible hull point; clamping removes last-ulp
    # solver noise so that vertex-matching distances dominate exactly
    nearest_vertex = float(np.linalg.norm(ext - x[None, :], axis=1).min())
    return min(dist, nearest_vertex)


def _directed_hausdorff(G: Polytope, H: Polytope) -> float:
    # sup over the hull of a convex distance function is attained at a vertex
    return max(dist_point_polytope(v, H) for v in G.extreme_vertices)


def hausdorff(G: Polytope, G2: Polytope) -> float:
    """Hausdorff distance between two hulls in a common ambient space."""
    if G.ambient_dim != G2.ambient_dim:
        raise ValueError("ambient dimensions differ")
    return max(_directed_hausdorff(G, G2), _directed_hausdorff(G2, G))


def min_matching(G: Polytope, G2: Polytope) -> float:
    """Worst-case nearest-vertex distance between extreme sets, both ways.

    Invariant under any permutation or relabeling of the generators.
    """
    if G.ambient_dim != G2.ambient_dim:
        raise ValueError("ambient dimensions differ")
    V, W = G.extreme_vertices, G2.extreme_vertices
    if V.size == 0 or W.size == 0:
        raise ValueError("empty extreme set")
    D = np.linalg.norm(V[:, None, :] - W[None, :, :], axis=2)
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))


@dataclass(frozen=True)
class VolumeEstimate:
    value: float
    stderr: float
    method: str
    samples: int = 0


def _ccw_polygon(Y: np.ndarray) -> np.ndarray:
    c = Y.mean(axis=0)
    ang = np.arctan2(Y[:, 1] - c[1], Y[:, 0] - c[0])
    return Y[np.argsort(ang)]


def _shoelace(Y: np.ndarray) -> float:
    if Y.shape[0] < 3:
        return 0.0
    x, y = Y[:, 0], Y[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def _clip_convex(subject: np.ndarray, clip: np.ndarray) -> np.ndarray:
    """Sutherland-Hodgman intersection of two convex CCW polygons."""
    out = [tuple(p) for p in subject]
    n = clip.shape[0]
    for e in range(n):
        a, b = clip[e], clip[(e + 1) % n]
        ex, ey = b[0] - a[0], b[1] - a[1]
        pts = out
        out = []
        if not pts:
            break
        m = len(pts)
        for i in range(m):
            P, Q = pts[i], pts[(i + 1) % m]
            # interior of a CCW polygon lies left of each directed edge
            sP = ex * (P[1] - a[1]) - ey * (P[0] - a[0])
            sQ = ex * (Q[1] - a[1]) - ey * (Q[0] - a[0])
            inside_P = sP >= -1e-12
            inside_Q = sQ >= -1e-12
            if inside_P:
                out.append(P)
            if inside_P != inside_Q:
                t = sP / (sP - sQ)
                out.append((P[0] + t * (Q[0] - P[0]), P[1] + t * (Q[1] - P[1])))
    return np.array(out) if out else np.zeros((0, 2))


def sym_diff_volume(G: Polytope, G2: Polytope, method: str = "exact2d",
                    samples: int = 100_000, rng=None) -> VolumeEstimate:
    """Volume of the symmetric difference, within the shared affine span.

    ``exact2d`` clips polygons (p must be 2); ``montecarlo`` is hit-or-miss in
    a common bounding box and reports a binomial standard error. Polytopes
    with different affine hulls are rejected: the set difference would not
    live in a single p-dimensional space.
    """
    if G.affine_dim != G2.affine_dim:
        raise AffineSpanError(
            f"affine dimensions differ ({G.affine_dim} vs {G2.affine_dim})")
    if (G.span_residual(G2.extreme_vertices) > AFFINE_TOL
            or G2.span_residual(G.extreme_vertices) > AFFINE_TOL):
        raise AffineSpanError("polytopes do not share an affine hull")
    p = G.affine_dim
    Y1 = G.to_span(G.extreme_vertices)
    Y2 = G.to_span(G2.extreme_vertices)

    if method == "exact2d":
        if p != 2:
            raise ValueError("exact2d requires affine dimension 2")
        P1, P2 = _ccw_polygon(Y1), _ccw_polygon(Y2)
        inter = _clip_convex(P1, P2)
        a_int = _shoelace(_ccw_polygon(inter)) if inter.shape[0] >= 3 else 0.0
        value = _shoelace(P1) + _shoelace(P2) - 2.0 * a_int
        return VolumeEstimate(max(value, 0.0), 0.0, "exact2d")

    if method != "montecarlo":
        raise ValueError(f"unknown method {method!r}")
    from .seeding import as_generator
    gen = as_generator(rng)
    if p == 0:
        return VolumeEstimate(0.0, 0.0, "montecarlo", samples)
    lo = np.minimum(Y1.min(axis=0), Y2.min(axis=0))
    hi = np.maximum(Y1.max(axis=0), Y2.max(axis=0))
    box = float(np.prod(hi - lo))
    pts = gen.uniform(lo, hi, size=(int(samples), p))
    in1 = _span_membership(Y1, pts)
    in2 = _span_membership(Y2, pts)
    hits = np.logical_xor(in1, in2)
    phat = float(hits.mean())
    stderr = box * math.sqrt(max(phat * (1.0 - phat), 0.0) / samples)
    return VolumeEstimate(box * phat, stderr, "montecarlo", int(samples))


def _span_membership(Y: np.ndarray, pts: np.ndarray) -> np.ndarray:
    p = Y.shape[1]
    if p == 1:
        return (pts[:, 0] >= Y[:, 0].min() - 1e-12) & (pts[:, 0] <= Y[:, 0].max() + 1e-12)
    hull = _convex_hull(Y)
    A = hull.equations[:, :-1]
    c = -hull.equations[:, -1]
    return np.all(pts @ A.T <= c + 1e-12, axis=1)


@dataclass(frozen=True)
class ThicknessReport:
    """Inscribed/circumscribed radii about a common center."""
    center: np.ndarray
    r_in: float
    R_out: float

    def passes_A1(self, r_req: float, R_req: float) -> bool:
        return self.r_in >= r_req and self.R_out <= R_req


def check_A1(G: Polytope) -> ThicknessReport:
    """Chebyshev (max inscribed) ball inside the affine span, plus the
    radius of the smallest vertex-enclosing ball about that same center."""
    ext = G.extreme_vertices
    if G.affine_dim == 0:
        return ThicknessReport(ext[0].copy(), 0.0, 0.0)
    A, c = G._hrep()
    p = G.affine_dim
    norms = np.linalg.norm(A, axis=1)
    nvar = p + 1
    cost = np.zeros(nvar)
    cost[-1] = -1.0
    A_ub = np.hstack([A, norms[:, None]])
    bounds = [(None, None)] * p + [(0.0, None)]
    res = linprog(cost, A_ub=A_ub, b_ub=c, bounds=bounds, method="highs")
    if not res.success:
        raise RuntimeError(f"inscribed-ball LP failed: {res.message}")
    center = G.from_span(res.x[:p])[0]
    r_in = float(res.x[-1])
    R_out = float(np.max(np.linalg.norm(ext - center, axis=1)))
    return ThicknessReport(center, r_in, R_out)


@dataclass(frozen=True)
class CornerReport:
    """Per-vertex angle between the chosen supporting hyperplane and the
    adjacent edges; the hyperplane is normal to the direction maximizing the
    worst-case angle (the normal-cone bisector for polygons)."""
    angles: np.ndarray
    delta_min: float


def check_A2(G: Polytope) -> CornerReport:
    p = G.affine_dim
    if p > 3:
        raise ValueError("corner check supports affine dimension <= 3 only")
    if p == 0:
        raise ValueError("corner check needs a nondegenerate polytope")
    Y = G.to_span(G.extreme_vertices)
    k = Y.shape[0]
    adj = [[] for _ in range(k)]
    for i, j in G.edges():
        adj[i].append(j)
        adj[j].append(i)
    angles = np.empty(k)
    for v in range(k):
        dirs = np.array([Y[u] - Y[v] for u in adj[v]], dtype=float)
        dirs /= np.linalg.norm(dirs, axis=1)[:, None]
        # max-min angle direction u: arcsin of the min-norm point of conv{-t_i}
        dist, _ = _simplex_lsq((-dirs).T, np.zeros(p))
        angles[v] = math.asin(min(max(dist, 0.0), 1.0))
    return CornerReport(angles, float(angles.min()))


@dataclass(frozen=True)
class PackingResult:
    """Greedy packing (pairwise >= eps) with a greedy covering count alongside."""
    packing: int
    covering: int
    packing_idx: tuple
    covering_idx: tuple


def packing_number(candidates, eps: float) -> PackingResult:
    """Greedy first-fit packing over a finite candidate list in Hausdorff metric."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    cands = list(candidates)
    n = len(cands)
    if n == 0:
        return PackingResult(0, 0, (), ())
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            D[i, j] = D[j, i] = hausdorff(cands[i], cands[j])
    chosen = []
    for i in range(n):
        if all(D[i, j] >= eps for j in chosen):
            chosen.append(i)
    centers = []
    for i in range(n):
        if all(D[i, c] > eps for c in centers):
            centers.append(i)
    return PackingResult(len(chosen), len(centers), tuple(chosen), tuple(centers))


def eps_cap_chop(G: Polytope, vertex: int, eps: float) -> Polytope:
    """Cut the corner at one extreme vertex.

    The chosen vertex is replaced by the points at distance ``eps`` from it
    along each adjacent edge; the result is a sub-polytope of G. For a
    q-simplex the output has 2q vertices.
    """
    ext = G.extreme_vertices
    k = ext.shape[0]
    if not 0 <= vertex < k:
        raise ValueError(f"vertex index {vertex} out of range (k={k})")
    if eps <= 0:
        raise ValueError("eps must be positive")
    adj = [j for (i, j) in G.edges() if i == vertex] + \
          [i for (i, j) in G.edges() if j == vertex]
    if not adj:
        raise ValueError("chosen vertex has no adjacent edges")
    v = ext[vertex]
    lengths = [float(np.linalg.norm(ext[u] - v)) for u in adj]
    if eps >= min(lengths):
        raise ValueError(
            f"eps={eps} reaches an adjacent vertex (min edge length {min(lengths):.6g})")
    new_pts = [v + eps * (ext[u] - v) / lng for u, lng in zip(adj, lengths)]
    others = [ext[i] for i in range(k) if i != vertex]
    return Polytope(np.vstack(others + new_pts), on_simplex=G.on_simplex)


def homothety_enlarge(G: Polytope, eps: float) -> Polytope:
    """Scale G about its Chebyshev center just enough to contain the
    eps-enlargement of G within its affine span; the factor is 1 + eps/r_in."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if eps == 0:
        return G
    rpt = check_A1(G)
    if rpt.r_in <= 0:
        raise ValueError("degenerate polytope: no inscribed ball")
    factor = 1.0 + eps / rpt.r_in
    newV = rpt.center + factor * (G.extreme_vertices - rpt.center)
    return Polytope(newV)


def polytope_to_json(G: Polytope) -> str:
    return json.dumps({"vertices": [list(map(float, row)) for row in G.vertices],
                       "on_simplex": G.on_simplex})


def polytope_from_json(text: str) -> Polytope:
    obj = json.loads(text)
    return Polytope(np.array(obj["vertices"], dtype=float),
                    on_simplex=bool(obj.get("on_simplex", False)))

"""Independent oracles for expected values.

Everything here avoids the library's own computational paths: hull
membership goes through an LP feasibility problem, distances through dense
sampling, matchings and packings through exhaustive enumeration, and
integrals through direct quadrature of hand-written integrands.
"""

import itertools
import math

import numpy as np
from scipy import integrate
from scipy.optimize import linprog


def lp_membership(x, points, tol=1e-9):
    """Is x a convex combination of the rows of ``points``? (LP feasibility)"""
    pts = np.asarray(points, dtype=float)
    x = np.asarray(x, dtype=float)
    k = pts.shape[0]
    A_eq = np.vstack([pts.T, np.ones((1, k))])
    b_eq = np.append(x, 1.0)
    res = linprog(np.zeros(k), A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * k,
                  method="highs")
    if res.status == 2:
        return False
    if not res.success:
        raise RuntimeError(f"membership LP failed: {res.message}")
    return float(np.max(np.abs(A_eq @ res.x - b_eq))) <= tol


# plane coordinates for hulls living on the d=2 probability simplex
_PLANE_B = np.array([[1.0, -1.0, 0.0] / np.sqrt(2.0),
                     [1.0, 1.0, -2.0] / np.sqrt(6.0)])
_PLANE_C = np.full(3, 1.0 / 3.0)


def to_plane(X):
    return (np.atleast_2d(np.asarray(X, float)) - _PLANE_C) @ _PLANE_B.T


def _ccw_2d(V):
    c = V.mean(axis=0)
    return V[np.argsort(np.arctan2(V[:, 1] - c[1], V[:, 0] - c[0]))]


def _inside_convex_2d(pts, poly):
    """Membership in a CCW convex polygon via per-edge cross products."""
    k = poly.shape[0]
    ok = np.ones(pts.shape[0], dtype=bool)
    for i in range(k):
        a, b = poly[i], poly[(i + 1) % k]
        cross = (b[0] - a[0]) * (pts[:, 1] - a[1]) - (b[1] - a[1]) * (pts[:, 0] - a[0])
        ok &= cross >= -1e-12
    return ok


def _edge_cloud_2d(poly, n_edge):
    ts = np.linspace(0.0, 1.0, n_edge)
    segs = []
    k = poly.shape[0]
    for i in range(k):
        a, b = poly[i], poly[(i + 1) % k]
        segs.append(np.outer(1 - ts, a) + np.outer(ts, b))
    return np.vstack(segs)


def dense_dist(x, vertices, rng=None, n_edge=4000):
    """Distance from a point to a hull in the d=2 simplex: zero if an
    independent membership test says inside, else a dense edge-grid minimum."""
    poly = _ccw_2d(to_plane(vertices))
    x2 = to_plane(x)
    if poly.shape[0] >= 3 and bool(_inside_convex_2d(x2, poly)[0]):
        return 0.0
    cloud = _edge_cloud_2d(poly, n_edge) if poly.shape[0] >= 2 else poly
    return float(np.min(np.linalg.norm(cloud - x2[0], axis=1)))


def dense_hausdorff(A, B, rng, n_edge=4000, n_interior=3000):
    """Two-sided sup-inf over dense samples of d=2 hulls. Vertices are always
    candidates on the sup side, so corners cannot be missed; the interior
    cloud checks that nothing inside beats them."""
    PA, PB = _ccw_2d(to_plane(A)), _ccw_2d(to_plane(B))

    def directed(P, V, Q):
        cand = [P]
        if P.shape[0] >= 2:
            cand.append(_edge_cloud_2d(P, 200))
        if P.shape[0] >= 3:
            w = rng.dirichlet(np.ones(V.shape[0]), size=n_interior)
            cand.append(to_plane(w @ V))
        pts = np.vstack(cand)
        dists = np.zeros(pts.shape[0])
        if Q.shape[0] >= 3:
            inside = _inside_convex_2d(pts, Q)
        else:
            inside = np.zeros(pts.shape[0], dtype=bool)
        outside = ~inside
        if outside.any():
            cloud = _edge_cloud_2d(Q, n_edge) if Q.shape[0] >= 2 else Q
            for idx in np.flatnonzero(outside):
                dists[idx] = float(np.min(np.linalg.norm(cloud - pts[idx], axis=1)))
        return float(dists.max())

    return max(directed(PA, np.asarray(A, float), PB),
               directed(PB, np.asarray(B, float), PA))


def exhaustive_min_matching(VA, VB):
    """Bidirectional worst-case nearest-vertex distance by explicit loops."""
    fwd = max(min(math.dist(a, b) for b in VB) for a in VA)
    bwd = max(min(math.dist(a, b) for a in VA) for b in VB)
    return max(fwd, bwd)


def exhaustive_max_packing(D, eps):
    """Largest subset with pairwise distance >= eps (bitmask enumeration)."""
    n = D.shape[0]
    best = 0
    for mask in range(1 << n):
        idx = [i for i in range(n) if mask >> i & 1]
        if len(idx) <= best:
            continue
        if all(D[i, j] >= eps for i, j in itertools.combinations(idx, 2)):
            best = len(idx)
    return best


def polygon_corner_angles(vertices_2d):
    """Angle between the corner-bisector-normal support line and the edges:
    pi/2 minus half the interior angle, from explicit edge directions."""
    V = np.asarray(vertices_2d, dtype=float)
    c = V.mean(axis=0)
    order = np.argsort(np.arctan2(V[:, 1] - c[1], V[:, 0] - c[0]))
    V = V[order]
    k = V.shape[0]
    angles = np.empty(k)
    for i in range(k):
        prev_v, nxt = V[(i - 1) % k], V[(i + 1) % k]
        e1 = prev_v - V[i]
        e2 = nxt - V[i]
        cosphi = float(e1 @ e2 / (np.linalg.norm(e1) * np.linalg.norm(e2)))
        phi = math.acos(min(max(cosphi, -1.0), 1.0))
        angles[i] = math.pi / 2 - phi / 2
    return angles[np.argsort(order)]


def marginal_k2_oracle(theta, counts):
    """Sequence marginal for a 2-component model with unit Dirichlet mixing,
    by direct quadrature of the hand-written mixture integrand."""
    th = np.asarray(theta, dtype=float)
    c = np.asarray(counts, dtype=float)

    def f(u):
        eta = u * th[0] + (1 - u) * th[1]
        return float(np.prod(eta ** c))

    val, err = integrate.quad(f, 0.0, 1.0, epsabs=1e-14, epsrel=1e-12, limit=400)
    return val


def exact_divergences_k2_oracle(theta_p, theta_q, n, d=1):
    """All four divergences for two k=2 unit-mixing models by enumerating
    sequences and calling the quadrature oracle per count vector."""
    from itertools import product
    V = K = K2 = bh = 0.0
    for seq in product(range(d + 1), repeat=n):
        counts = np.bincount(seq, minlength=d + 1)
        p = marginal_k2_oracle(theta_p, counts)
        q = marginal_k2_oracle(theta_q, counts)
        V += 0.5 * abs(p - q)
        bh += math.sqrt(p * q)
        if p > 0:
            K += p * math.log(p / q)
            K2 += p * math.log(p / q) ** 2
    return {"V": V, "K": K, "K2": K2, "h2": 1.0 - bh}

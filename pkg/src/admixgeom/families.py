"""Reference polytope and model families for the verification suites.

Families are parameterized deterministic constructions: corner caps chopped
at increasing depth, one-vertex outward displacements, homothetic
enlargements, nested uniform triangles, and the two minimax pair cases
(simplex corner cap when k/2 <= d, polygon corner cap when k >= 2d).
Random instances always take an explicit seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .admixture import AdmixtureModel, MixingLaw
from .geometry import Polytope, check_A1, eps_cap_chop, extreme_points, homothety_enlarge
from .seeding import as_generator

# orthonormal basis of the sum-zero plane in R^3 (the simplex plane for d=2)
_U1 = np.array([1.0, -1.0, 0.0]) / math.sqrt(2.0)
_U2 = np.array([1.0, 1.0, -2.0]) / math.sqrt(6.0)
_CENTROID3 = np.full(3, 1.0 / 3.0)


def simplex_plane_point(angle: float, radius: float) -> np.ndarray:
    """Point in the d=2 probability simplex at polar coordinates about its center."""
    return _CENTROID3 + radius * (math.cos(angle) * _U1 + math.sin(angle) * _U2)


def regular_polygon(n_vertices: int, radius: float = 0.25,
                    phase: float = 0.0) -> Polytope:
    """Regular polygon inside the d=2 simplex (all entries stay positive)."""
    pts = [simplex_plane_point(phase + 2.0 * math.pi * i / n_vertices, radius)
           for i in range(n_vertices)]
    return extreme_points(np.vstack(pts), on_simplex=True)


def shrunken_corner_simplex(q: int, d: int, mix: float = 0.8) -> Polytope:
    """q-simplex spanned by q+1 simplex corners pulled toward the center."""
    if q + 1 > d + 1:
        raise ValueError("q-simplex needs q <= d")
    eye = np.eye(d + 1)
    centroid = np.full(d + 1, 1.0 / (d + 1))
    pts = mix * eye[:q + 1] + (1.0 - mix) * centroid
    return extreme_points(pts, on_simplex=True)


def cap_family(G: Polytope, vertex: int, eps_list):
    """(G, G-with-corner-cut) pairs at increasing cut depth."""
    return [(G, eps_cap_chop(G, vertex, float(e))) for e in eps_list]


def displacement_family(G: Polytope, vertex: int, t_list):
    """(G, G') pairs with one vertex pushed outward from the centroid by t."""
    ext = G.extreme_vertices
    centroid = ext.mean(axis=0)
    v = ext[vertex]
    direction = (v - centroid) / np.linalg.norm(v - centroid)
    pairs = []
    for t in t_list:
        moved = ext.copy()
        moved[vertex] = v + float(t) * direction
        pairs.append((G, extreme_points(moved)))
    return pairs


def homothety_family(G: Polytope, eps_list):
    """(G, enlarged G) pairs about the inscribed-ball center."""
    return [(G, homothety_enlarge(G, float(e))) for e in eps_list]


def polytope_model(P: Polytope, c0: float = 0.0) -> AdmixtureModel:
    """Model on the extreme vertices of P with symmetric unit Dirichlet mixing."""
    theta = P.extreme_vertices
    return AdmixtureModel(theta, MixingLaw(np.ones(theta.shape[0])), c0=c0)


def nested_uniform_family(shrinks, radius: float = 0.3):
    """(inner, outer) uniform-triangle model pairs sharing an affine hull.

    The outer model is a fixed triangle with unit Dirichlet mixing (uniform on
    the triangle); each inner model is its homothetic shrink about the center.
    """
    outer = regular_polygon(3, radius=radius)
    center = check_A1(outer).center
    outer_model = polytope_model(outer)
    pairs = []
    for s in shrinks:
        inner_theta = center + float(s) * (outer.extreme_vertices - center)
        inner_model = polytope_model(extreme_points(inner_theta, on_simplex=True))
        pairs.append((inner_model, outer_model))
    return pairs


def random_polytope(rng, k: int, d: int) -> Polytope:
    """Hull of k uniform points on the d-simplex."""
    gen = as_generator(rng)
    pts = gen.dirichlet(np.ones(d + 1), size=k)
    return extreme_points(pts, on_simplex=True)


def random_interior_rows(rng, k: int, d: int, c0: float) -> np.ndarray:
    """k simplex rows with every entry strictly above c0."""
    gen = as_generator(rng)
    if c0 * (d + 1) >= 1.0:
        raise ValueError("c0 too large for the alphabet size")
    u = gen.dirichlet(np.ones(d + 1), size=k)
    return c0 + (1.0 - (d + 1) * c0) * u


def random_symmetric_model(rng, k: int, d: int, c0: float = 0.1) -> AdmixtureModel:
    rows = random_interior_rows(rng, k, d, c0 * 1.0000001)
    return AdmixtureModel(rows, MixingLaw(np.ones(k)), c0=c0)


def displaced_model(model: AdmixtureModel, vertex: int, t: float) -> AdmixtureModel:
    """Copy of the model with one row nudged toward the simplex center by t."""
    theta = model.theta.copy()
    center = np.full(model.d + 1, 1.0 / (model.d + 1))
    direction = center - theta[vertex]
    direction /= np.linalg.norm(direction)
    theta[vertex] = theta[vertex] + t * direction
    return AdmixtureModel(theta, model.mixing, c0=model.c0)


def well_separated_model(k: int = 3, d: int = 2, sharpness: float = 0.7,
                         c0: float = 0.02) -> AdmixtureModel:
    """Nearly-pure components, one per symbol block; the standard truth for
    contraction sweeps."""
    if k > d + 1:
        raise ValueError("needs k <= d+1 for one dominant symbol per component")
    rest = (1.0 - sharpness) / d
    theta = np.full((k, d + 1), rest)
    for j in range(k):
        theta[j, j] = sharpness
    return AdmixtureModel(theta, MixingLaw(np.ones(k)), c0=c0)


@dataclass(frozen=True)
class MinimaxPair:
    """Base polytope and its corner-cut companion, with matching models."""
    case: str
    q: int
    G0: Polytope
    G0_chop: Polytope
    model0: AdmixtureModel
    model_chop: AdmixtureModel
    eps: float


def minimax_construction(k: int, d: int, eps: float, seed: int = 7) -> MinimaxPair:
    """The two-case corner-cap pair whose set difference is small at a given
    Hausdorff separation.

    Case "simplex" (k/2 <= d): a floor(k/2)-simplex loses one corner, giving
    2q <= k vertices. Case "polygon" (k >= 2d): a d-dimensional polytope with
    k-d+1 vertices loses one corner with d adjacent edges, giving k vertices.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    if k // 2 <= d:
        q = k // 2
        G0 = shrunken_corner_simplex(q, d)
        case = "simplex"
    elif d == 2:
        G0 = regular_polygon(k - d + 1, radius=0.3)
        q = d
        case = "polygon"
    else:
        # k-d+1 points on a sphere inside the simplex: all are extreme
        gen = as_generator(seed)
        base = shrunken_corner_simplex(d, d)
        rho = 0.5 / (d + 1)
        dirs = gen.normal(size=(k - d + 1, d))
        dirs /= np.linalg.norm(dirs, axis=1)[:, None]
        G0 = extreme_points(base.from_span(rho * dirs))
        q = d
        case = "polygon"
    chopped = eps_cap_chop(G0, 0, eps)
    return MinimaxPair(case, q, G0, chopped, polytope_model(G0),
                       polytope_model(chopped), float(eps))

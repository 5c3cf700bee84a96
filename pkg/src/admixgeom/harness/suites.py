"""Instance builders for the inequality suites driven by cmd_verify."""

from __future__ import annotations

import numpy as np

from .. import families as fam
from ..seeding import as_generator, derive_seed


def _random_pair_instance(seed: int) -> dict:
    gen = as_generator(seed)
    d = int(gen.integers(1, 4))
    k1 = int(gen.integers(2, 6))
    k2 = int(gen.integers(2, 6))
    return {"G": fam.random_polytope(gen, k1, d),
            "G2": fam.random_polytope(gen, k2, d),
            "seed": seed, "d": d}


def build_suite(bound_id: str, count: int, seed: int, budget: int | None = None,
                tolerances: dict | None = None) -> list:
    """Deterministic instance list for one bound id."""
    tol = (tolerances or {}).get(bound_id)
    instances = []
    if bound_id == "LemM_a":
        instances = [_random_pair_instance(derive_seed(seed, bound_id, i))
                     for i in range(count)]
    elif bound_id == "LemM_b":
        base = fam.regular_polygon(5, radius=0.25)
        pairs = fam.displacement_family(base, 0, np.geomspace(0.001, 0.05, 8))
        instances = [{"pairs": pairs, "seed": seed}]
    elif bound_id == "Ldiff1_a":
        base = fam.shrunken_corner_simplex(2, 2)
        pairs = fam.cap_family(base, 0, np.geomspace(0.03, 0.3, 8))
        instances = [{"pairs": pairs, "p": 2, "seed": seed}]
    elif bound_id == "Ldiff1_b":
        base = fam.regular_polygon(5, radius=0.25)
        pairs = fam.homothety_family(base, np.geomspace(0.005, 0.05, 8))
        instances = [{"pairs": pairs, "seed": seed}]
    elif bound_id == "Ldiff3":
        base = fam.regular_polygon(5, radius=0.25)
        pairs = fam.displacement_family(base, 0, np.geomspace(0.002, 0.05, 8))
        instances = [{"pairs": pairs, "seed": seed}]
    elif bound_id == "ThmC_a":
        base = fam.shrunken_corner_simplex(2, 2)
        pairs = fam.cap_family(base, 0, [0.05, 0.1, 0.2, 0.3])
        instances = [{"pairs": pairs, "n_list": list(range(2, 9)),
                      "alpha": 0.0, "seed": seed}]
    elif bound_id == "LemKLez":
        pairs = fam.nested_uniform_family([0.7, 0.8, 0.9, 0.95, 0.98])
        instances = [{"pairs": pairs, "n": 3, "seed": seed}]
    elif bound_id == "LemKLbound":
        for i in range(count):
            s = derive_seed(seed, bound_id, i)
            gen = as_generator(s)
            n = int(gen.integers(1, 7))
            a = fam.random_symmetric_model(gen, 2, 1, c0=0.1)
            b = fam.random_symmetric_model(gen, 2, 1, c0=0.1)
            instances.append({"model": a, "model2": b, "n": n, "c0": 0.1,
                              "matching": [0, 1],
                              "n_draws": budget or 20_000, "seed": s})
    elif bound_id == "LemW":
        for i in range(count):
            s = derive_seed(seed, bound_id, i)
            gen = as_generator(s)
            d = int(gen.integers(1, 4))
            k = int(gen.integers(2, 5))
            a = fam.random_symmetric_model(gen, k, d, c0=0.05)
            b = fam.random_symmetric_model(gen, k, d, c0=0.05)
            instances.append({"model": a, "model2": b,
                              "matching": list(range(k)),
                              "n_draws": budget or 20_000, "seed": s})
    elif bound_id == "ThmKL_mass":
        from ..inference import PriorSpec
        prior = PriorSpec(lam=1.0, gamma=np.ones(2), c0=0.05, k=2, d=1)
        model0 = prior.draw(derive_seed(seed, bound_id, "truth"))
        instances = [{"prior": prior, "model0": model0, "deltas": [0.3, 0.5],
                      "n": 4, "n_draws": budget or 10_000,
                      "seed": derive_seed(seed, bound_id, "draws")}]
    elif bound_id == "Hoeffding_etahat":
        gen = as_generator(derive_seed(seed, bound_id, "model"))
        model = fam.random_symmetric_model(gen, 2, 1, c0=0.1)
        instances = [{"model": model, "n": 100, "eps": 0.2,
                      "reps": budget or 100_000,
                      "seed": derive_seed(seed, bound_id, "reps")}]
    else:
        raise ValueError(f"no suite builder for bound id {bound_id!r}")
    if tol is not None:
        for inst in instances:
            inst["tolerance"] = float(tol)
    return instances

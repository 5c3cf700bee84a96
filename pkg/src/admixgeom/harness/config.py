"""Experiment configuration: schema validation, canonical hashing, object builders."""

from __future__ import annotations

import hashlib
import json
from importlib import resources

import jsonschema
import numpy as np

from ..admixture import AdmixtureModel
from ..inference import PriorSpec


class ConfigError(ValueError):
    """Configuration rejected before any computation."""


def _schema() -> dict:
    text = resources.files("admixgeom.harness").joinpath("config_schema.json").read_text()
    return json.loads(text)


def validate_config(obj: dict) -> dict:
    try:
        jsonschema.validate(obj, _schema())
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config schema violation: {exc.message}") from exc
    if "model" in obj:
        theta = obj["model"]["theta"]
        widths = {len(row) for row in theta}
        if len(widths) != 1:
            raise ConfigError("model.theta rows must share one alphabet size")
        if len(obj["model"]["gamma"]) != len(theta):
            raise ConfigError("model.gamma length must match the number of theta rows")
    if obj.get("experiment") == "sweep" and "grid" not in obj:
        raise ConfigError("sweep experiments need a grid of [m, n] cells")
    if obj.get("experiment") == "simulate" and ("m" not in obj or "n" not in obj):
        raise ConfigError("simulate experiments need m and n")
    return obj


def load_config(path) -> dict:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return validate_config(obj)


def canonical_json(obj) -> str:
    """Key-order-independent serialization used for config hashing."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


def model_from_config(obj: dict) -> AdmixtureModel:
    if "model" not in obj:
        raise ConfigError("this experiment needs a model section")
    mc = obj["model"]
    return AdmixtureModel(np.array(mc["theta"], dtype=float),
                          np.array(mc["gamma"], dtype=float),
                          c0=float(mc.get("c0", 0.0)))


def prior_from_config(obj: dict, model: AdmixtureModel | None = None) -> PriorSpec:
    if "prior" in obj:
        pc = obj["prior"]
        return PriorSpec(lam=float(pc["lambda"]), gamma=np.array(pc["gamma"], dtype=float),
                         c0=float(pc["c0"]), k=int(pc["k"]), d=int(pc["d"]))
    if model is not None:
        return PriorSpec(lam=1.0, gamma=np.asarray(model.mixing.gamma).copy(),
                         c0=0.02, k=model.k, d=model.d)
    raise ConfigError("this experiment needs a prior section (or a model to derive one)")

"""Population-polytope geometry, admixture sampling, divergences, and
posterior-contraction experiments for categorical mixed-membership data."""

__version__ = "0.1.0"

from . import admixture, divergence, geometry, inference  # noqa: F401

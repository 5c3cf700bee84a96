"""CLI harness: configuration, run records, inequality suites, experiment commands."""

from .config import ConfigError, canonical_json, config_hash, load_config  # noqa: F401
from .registry import RunRecord  # noqa: F401

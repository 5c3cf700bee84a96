"""Run records: config hash, source revision, seeds, timestamps.

run_record.json is the one output that carries wall-clock data; every other
artifact a command writes is a pure function of (config, seed) and is
bit-identical across reruns and thread counts.
"""

from __future__ import annotations

import json
import os
import subprocess
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .config import config_hash


def source_revision() -> str:
    env = os.environ.get("ADMIXGEOM_REVISION")
    if env:
        return env
    try:
        out = subprocess.run(["git", "rev-parse", "--short", "HEAD"],
                             capture_output=True, text=True, timeout=5,
                             cwd=os.path.dirname(__file__))
        if out.returncode == 0:
            return out.stdout.strip()
    except OSError:
        pass
    return "unknown"


@dataclass
class RunRecord:
    config: dict
    base_seed: int
    started: str = ""
    finished: str = ""
    revision: str = field(default_factory=source_revision)
    outputs: list = field(default_factory=list)

    def __post_init__(self):
        self.hash = config_hash(self.config)
        if not self.started:
            self.started = datetime.now(timezone.utc).isoformat()

    def close(self):
        self.finished = datetime.now(timezone.utc).isoformat()

    def write(self, out_dir: str):
        path = os.path.join(out_dir, "run_record.json")
        with open(path, "w") as fh:
            json.dump({"config_hash": self.hash, "revision": self.revision,
                       "base_seed": self.base_seed, "started": self.started,
                       "finished": self.finished, "outputs": self.outputs},
                      fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path

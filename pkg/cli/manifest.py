# cli/manifest.py

import json
import os
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import Dict, List, Optional

from config.constants import APP_VERSION
from utils.logger import get_logger

# Initialize logger
logger = get_logger(__name__)

MANIFEST_NAME = "manifest.json"


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    """
    Record of one CLI run.

    Attributes:
        config_hash: SHA-256 of the canonical config
        files: Every file under the output directory, manifest included,
            relative to that directory
        metrics: Final metrics of the run, keyed by name
    """
    command: str
    config_hash: str
    version: str = APP_VERSION
    started: str = field(default_factory=_now)
    finished: Optional[str] = None
    exit_code: Optional[int] = None
    files: List[str] = field(default_factory=list)
    metrics: Dict[str, object] = field(default_factory=dict)

    def finish(self, output_dir: str, exit_code: int = 0) -> str:
        """Stamp the end time, list the output directory and write manifest.json."""
        self.finished = _now()
        self.exit_code = exit_code
        os.makedirs(output_dir, exist_ok=True)
        path = os.path.join(output_dir, MANIFEST_NAME)
        listed = {MANIFEST_NAME}
        for root, _, names in os.walk(output_dir):
            for name in names:
                listed.add(os.path.relpath(os.path.join(root, name), output_dir).replace(os.sep, "/"))
        self.files = sorted(listed)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(asdict(self), f, indent=2, sort_keys=True, default=str)
        logger.debug(f"Manifest written to {path} ({len(self.files)} files)")
        return path

    @classmethod
    def load(cls, path: str) -> "RunManifest":
        with open(path, encoding="utf-8") as f:
            return cls(**json.load(f))

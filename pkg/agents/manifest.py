"""
Run manifest written next to every command's outputs
"""
import json
import time
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, PrivateAttr

from settings import __version__

MANIFEST_NAME = "manifest.json"
TRACKED_PACKAGES = ("numpy", "scipy", "pandas", "torch", "gymnasium", "pydantic")


def package_versions() -> Dict[str, Optional[str]]:
    versions = {}
    for name in TRACKED_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = None
    return versions


class RunManifest(BaseModel):
    command: str
    scenario: str
    config_hash: str
    seed: int
    artifacts: List[str] = Field(default_factory=list)
    tool_version: str = __version__
    packages: Dict[str, Optional[str]] = Field(default_factory=package_versions)
    parameters: Dict[str, Any] = Field(default_factory=dict)
    started_at: str = Field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    finished_at: Optional[str] = None
    wall_seconds: Optional[float] = None

    _t0: float = PrivateAttr(default_factory=time.perf_counter)

    def add(self, path: Path, out_dir: Path) -> Path:
        self.artifacts.append(str(Path(path).relative_to(out_dir)))
        return path

    def write(self, out_dir: Path) -> Path:
        self.finished_at = datetime.now(timezone.utc).isoformat()
        self.wall_seconds = round(time.perf_counter() - self._t0, 3)
        path = Path(out_dir) / MANIFEST_NAME
        path.write_text(json.dumps(self.model_dump(), indent=2))
        return path

"""Artifact bookkeeping: written files, checksums and ``manifest.json``."""

from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

from ..core.errors import ArtifactError
from ..core.progress import ARTIFACT_WRITTEN, NULL_BUS, ProgressBus

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


def sha256_of(path: Path) -> str:
    digest = hashlib.sha256()
    try:
        with path.open("rb") as fh:
            for block in iter(lambda: fh.read(1 << 16), b""):
                digest.update(block)
    except OSError as exc:
        raise ArtifactError(f"unable to checksum '{path}': {exc}") from exc
    return digest.hexdigest()


def _plain(value: Any) -> Any:
    """JSON-safe copy: NaN/inf become ``None``, tuples become lists."""

    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, Mapping):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    if hasattr(value, "item") and callable(value.item):
        return _plain(value.item())
    if hasattr(value, "value") and isinstance(getattr(value, "value"), str):
        return value.value
    return value


def dump_json(payload: Any, path: Path) -> Path:
    text = json.dumps(_plain(payload), indent=2, sort_keys=True, allow_nan=False) + "\n"
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf8")
    except OSError as exc:
        raise ArtifactError(f"unable to write '{path}': {exc}") from exc
    return path


@dataclass
class ArtifactSet:
    """Files written for one preset or command run, relative to ``directory``."""

    directory: Path
    files: List[Path] = field(default_factory=list)
    records: List[Dict[str, Any]] = field(default_factory=list)
    bus: ProgressBus = field(default=NULL_BUS, repr=False)

    def path_for(self, name: str) -> Path:
        return self.directory / name

    def add(self, path: Path) -> Path:
        path = Path(path)
        if path not in self.files:
            self.files.append(path)
        self.bus.publish(ARTIFACT_WRITTEN, {"path": str(path)})
        return path

    def record(self, payload: Mapping[str, Any]) -> None:
        self.records.append(dict(payload))

    @property
    def diverged(self) -> List[Dict[str, Any]]:
        return [record for record in self.records if record.get("diverged")]

    def checksums(self) -> Dict[str, str]:
        return {
            path.relative_to(self.directory).as_posix(): sha256_of(path)
            for path in sorted(self.files)
        }

    def write_json(self, name: str, payload: Any) -> Path:
        return self.add(dump_json(payload, self.path_for(name)))

    def write_manifest(self, config: Mapping[str, Any], *, extra: Optional[Mapping[str, Any]] = None) -> Path:
        """Write ``manifest.json``: resolved config, per-scenario records and checksums.

        The manifest never lists itself and carries no timestamps, so reruns
        with the same configuration produce the same bytes.
        """

        manifest = {
            "config": dict(config),
            "scenarios": self.records,
            "artifacts": self.checksums(),
        }
        if extra:
            manifest.update(extra)
        path = dump_json(manifest, self.path_for(MANIFEST_NAME))
        logger.debug("Manifest written to %s", path)
        return path


__all__ = ["ArtifactSet", "MANIFEST_NAME", "dump_json", "sha256_of"]

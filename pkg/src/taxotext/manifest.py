"""Run manifests: the provenance record tying outputs back to inputs.

A manifest is written into the run directory before any artifact it
describes, so a crashed run still leaves an accurate account of what was
attempted. Timestamps live only here; report and corpus files stay
byte-stable across reruns.
"""

from __future__ import annotations

import json
import os
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .hashing import fingerprint

MANIFEST_NAME = "manifest.json"
TOOL_VERSION = "0.1.0"


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    run_id: str
    created_at: str
    tool_version: str = TOOL_VERSION
    config: dict = field(default_factory=dict)
    config_fingerprint: str = ""
    dataset_fingerprint: str | None = None
    source_signatures: list[str] = field(default_factory=list)
    deviations: list[str] = field(default_factory=list)
    commands: list[dict] = field(default_factory=list)

    @classmethod
    def new(cls, run_id: str, config: dict) -> "RunManifest":
        return cls(
            run_id=run_id,
            created_at=_utcnow(),
            config=config,
            config_fingerprint=fingerprint(config),
        )

    def record_command(self, name: str, options: dict):
        self.commands.append({"command": name, "at": _utcnow(), "options": options})

    def note_signature(self, signature: str):
        if signature not in self.source_signatures:
            self.source_signatures.append(signature)

    def to_json(self) -> dict:
        return {
            "run_id": self.run_id,
            "created_at": self.created_at,
            "tool_version": self.tool_version,
            "config": self.config,
            "config_fingerprint": self.config_fingerprint,
            "dataset_fingerprint": self.dataset_fingerprint,
            "source_signatures": self.source_signatures,
            "deviations": self.deviations,
            "commands": self.commands,
        }

    @classmethod
    def from_json(cls, payload: dict) -> "RunManifest":
        return cls(
            run_id=payload["run_id"],
            created_at=payload["created_at"],
            tool_version=payload.get("tool_version", TOOL_VERSION),
            config=payload.get("config", {}),
            config_fingerprint=payload.get("config_fingerprint", ""),
            dataset_fingerprint=payload.get("dataset_fingerprint"),
            source_signatures=list(payload.get("source_signatures", [])),
            deviations=list(payload.get("deviations", [])),
            commands=list(payload.get("commands", [])),
        )


def manifest_path(run_dir: Path) -> Path:
    return Path(run_dir) / MANIFEST_NAME


def load_manifest(run_dir: Path) -> RunManifest | None:
    path = manifest_path(run_dir)
    if not path.exists():
        return None
    return RunManifest.from_json(json.loads(path.read_text(encoding="utf-8")))


def save_manifest(manifest: RunManifest, run_dir: Path):
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    target = manifest_path(run_dir)
    tmp = target.with_name(f".{target.name}.{uuid.uuid4().hex}.tmp")
    tmp.write_text(
        json.dumps(manifest.to_json(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    os.replace(tmp, target)

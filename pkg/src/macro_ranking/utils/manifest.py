"""Replay manifests written next to every output CSV."""

import hashlib
import json
from pathlib import Path
from typing import Any

import pandas as pd
from loguru import logger

from macro_ranking import __version__


def config_hash(config: dict[str, Any]) -> str:
    """SHA-256 of the canonical JSON form of a configuration."""
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode()).hexdigest()


def manifest_path(csv_path: Path) -> Path:
    return csv_path.with_suffix(".manifest.json")


def write_manifest(
    csv_path: Path, command: str, config: dict[str, Any], seed: int, extra: dict[str, Any] | None = None
) -> Path:
    """Write ``<name>.manifest.json`` beside ``csv_path``.

    The manifest carries no timestamps so reruns produce identical bytes.
    """
    payload = {
        "command": command,
        "config_hash": config_hash(config),
        "seed": seed,
        "version": __version__,
        "output": csv_path.name,
        **(extra or {}),
    }
    path = manifest_path(csv_path)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")
    return path


def write_frame(
    frame: pd.DataFrame, csv_path: Path, command: str, config: dict[str, Any], seed: int, **extra: Any
) -> None:
    """Write a results frame and its manifest."""
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(csv_path, index=False, lineterminator="\n")
    write_manifest(csv_path, command, config, seed, extra)
    logger.info(f"Wrote {len(frame)} rows to {csv_path}")

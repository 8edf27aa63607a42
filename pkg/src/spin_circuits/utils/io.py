"""Reproducible CSV and JSON output.

Files are written to a temporary file in the destination directory and moved
into place with ``os.replace``, so a failed run never leaves a partial file.
Floats are rendered with ``repr`` and sidecars carry no timestamps.
"""
import csv
import hashlib
import io
import json
import logging
import os
import platform
import tempfile
from importlib import metadata
from pathlib import Path
from typing import Any, Iterable, Sequence

logger = logging.getLogger(__name__)

SCHEMA_PREFIX = "spin-circuits"


def _cell(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return str(value)


def render_csv(command: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    buffer.write(f"# schema: {SCHEMA_PREFIX}/{command}/v1\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buffer.getvalue()


def atomic_write(path: str | Path, text: str) -> Path:
    """Write ``text`` to ``path`` through a temporary sibling file."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    logger.debug(f"Wrote {target}")
    return target


def canonical_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def config_hash(config: dict) -> str:
    """SHA-256 of the sorted-key JSON form of ``config``."""
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()


def versions() -> dict[str, str]:
    out = {"python": platform.python_version()}
    for package in ("spin-circuits", "numpy", "scipy"):
        try:
            out[package] = metadata.version(package)
        except metadata.PackageNotFoundError:
            out[package] = "unknown"
    return out


def sidecar_path(path: str | Path) -> Path:
    return Path(f"{path}.json")


def write_outputs(
    path: str | Path,
    command: str,
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    config: dict,
    seed: int | None,
    summary: dict,
) -> tuple[Path, Path]:
    """Write the CSV, then its provenance sidecar.

    A failed CSV write leaves no sidecar behind.
    """
    text = render_csv(command, header, rows)
    sidecar = {
        "command": command,
        "config": config,
        "config_hash": config_hash(config),
        "seed": seed,
        "versions": versions(),
        "summary": summary,
    }
    written = atomic_write(path, text)
    return written, atomic_write(sidecar_path(path), json.dumps(sidecar, sort_keys=True, indent=2) + "\n")

"""Stage artifact I/O: stable JSON, provenance stamping, deterministic time.

Every artifact the pipeline writes embeds the tool version and the hash of
the run configuration so `report` can refuse to mix outputs from different
runs. When SOURCE_DATE_EPOCH is set (reproducible-build convention),
timestamps are pinned to it so repeated runs are byte-identical.
"""

import hashlib
import json
import os
import time
from datetime import datetime, timezone
from pathlib import Path

from .errors import MissingArtifactError, ValidationError

SCHEMA_VERSION = 1


def stable_dumps(obj) -> str:
    """Canonical JSON text: sorted keys, fixed separators, unicode kept."""
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, indent=2)


def compact_dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def config_hash(config_dict: dict) -> str:
    return hashlib.sha256(compact_dumps(config_dict).encode("utf-8")).hexdigest()[:16]


def now_iso() -> str:
    """Current UTC time, or the pinned SOURCE_DATE_EPOCH when set."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    ts = int(epoch) if epoch else time.time()
    return datetime.fromtimestamp(ts, tz=timezone.utc).isoformat()


def deterministic_mode() -> bool:
    return "SOURCE_DATE_EPOCH" in os.environ


def atomic_write_text(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def write_artifact(path: Path, payload: dict, *, run_hash: str, tool_version: str) -> None:
    """Write a JSON stage artifact with the standard provenance envelope."""
    doc = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": tool_version,
        "config_hash": run_hash,
        **payload,
    }
    atomic_write_text(Path(path), stable_dumps(doc) + "\n")


def read_artifact(path: Path, *, expect_hash: str | None = None) -> dict:
    path = Path(path)
    if not path.exists():
        raise MissingArtifactError(str(path))
    doc = json.loads(path.read_text(encoding="utf-8"))
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValidationError(
            f"{path}: schema_version {doc.get('schema_version')!r}, expected {SCHEMA_VERSION}"
        )
    if expect_hash is not None and doc.get("config_hash") != expect_hash:
        raise ValidationError(
            f"{path}: config_hash {doc.get('config_hash')!r} does not match {expect_hash!r}; "
            "refusing to mix artifacts from different runs"
        )
    return doc


def csv_meta_line(*, run_hash: str, tool_version: str) -> str:
    return f"# tool_version={tool_version} config_hash={run_hash}\n"


def read_csv_meta(path: Path) -> dict:
    """Parse the leading comment line of a pipeline CSV into a dict."""
    path = Path(path)
    if not path.exists():
        raise MissingArtifactError(str(path))
    with path.open(encoding="utf-8") as fh:
        first = fh.readline()
    meta = {}
    if first.startswith("#"):
        for tok in first[1:].split():
            if "=" in tok:
                k, v = tok.split("=", 1)
                meta[k] = v
    return meta

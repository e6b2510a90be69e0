"""Content-addressed generation cache.

Records live as individual JSON files under cache/generations/<kk>/<key>.json,
plus an append-only index for fast listing. Files are chosen over a database
so runs diff cleanly and archive well. Entries are immutable: a key collision
implies a byte-identical prompt, and output text is never edited after the
fact.
"""

import hashlib
import json
import os
import threading
from dataclasses import dataclass
from pathlib import Path

from ..artifacts import compact_dumps, deterministic_mode, now_iso
from .backends import DecodingParams


def generation_key(
    backend_id: str,
    model_name: str,
    params: DecodingParams,
    config_key: str,
    instance_id: str,
    system_text: str,
    user_text: str,
) -> str:
    payload = compact_dumps(
        {
            "backend_id": backend_id,
            "model_name": model_name,
            "params": params.to_dict(),
            "config": config_key,
            "instance_id": instance_id,
            "system": system_text,
            "user": user_text,
        }
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass
class GenerationRecord:
    key: str
    backend_id: str
    model_name: str
    params: dict
    config: str
    instance_id: str
    system_text: str
    user_text: str
    output_text: str
    latency_ms: int
    created_at: str
    raw_response: dict | None = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, d: dict) -> "GenerationRecord":
        return cls(**{k: d.get(k) for k in cls.__dataclass_fields__})


class GenerationCache:
    """Append-only store; index writes are serialized through one lock."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._index_path = self.root / "index.jsonl"
        self._lock = threading.Lock()

    def _record_path(self, key: str) -> Path:
        return self.root / key[:2] / f"{key}.json"

    def get(self, key: str) -> GenerationRecord | None:
        path = self._record_path(key)
        if not path.exists():
            return None
        return GenerationRecord.from_dict(json.loads(path.read_text(encoding="utf-8")))

    def put(self, record: GenerationRecord) -> GenerationRecord:
        """Store atomically; an existing record wins (append-only semantics)."""
        path = self._record_path(record.key)
        if path.exists():
            return self.get(record.key)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_name(path.name + f".tmp{os.getpid()}")
        tmp.write_text(
            json.dumps(record.to_dict(), sort_keys=True, ensure_ascii=False, indent=2) + "\n",
            encoding="utf-8",
        )
        os.replace(tmp, path)
        with self._lock:
            with self._index_path.open("a", encoding="utf-8") as fh:
                fh.write(compact_dumps(self._index_entry(record)) + "\n")
        return record

    @staticmethod
    def _index_entry(record: GenerationRecord) -> dict:
        return {
            "key": record.key,
            "backend_id": record.backend_id,
            "config": record.config,
            "instance_id": record.instance_id,
            "created_at": record.created_at,
        }

    def rebuild_index(self) -> int:
        """Rewrite the index in a stable order.

        Concurrent puts append in scheduling order; deriving the index from
        the stored records keeps pipeline output byte-stable across runs and
        thread counts.
        """
        entries = []
        for path in self.root.glob("??/*.json"):
            record = GenerationRecord.from_dict(json.loads(path.read_text(encoding="utf-8")))
            entries.append(self._index_entry(record))
        entries.sort(key=lambda e: (e["config"], e["instance_id"], e["key"]))
        with self._lock:
            tmp = self._index_path.with_name("index.jsonl.tmp")
            tmp.write_text(
                "".join(compact_dumps(e) + "\n" for e in entries), encoding="utf-8"
            )
            os.replace(tmp, self._index_path)
        return len(entries)


def make_record(
    key: str,
    backend_id: str,
    model_name: str,
    params: DecodingParams,
    config_key: str,
    instance_id: str,
    system_text: str,
    user_text: str,
    output_text: str,
    latency_ms: int,
    raw_response: dict | None,
) -> GenerationRecord:
    # deterministic mode pins the provenance fields that vary run to run
    return GenerationRecord(
        key=key,
        backend_id=backend_id,
        model_name=model_name,
        params=params.to_dict(),
        config=config_key,
        instance_id=instance_id,
        system_text=system_text,
        user_text=user_text,
        output_text=output_text,
        latency_ms=0 if deterministic_mode() else latency_ms,
        created_at=now_iso(),
        raw_response=raw_response,
    )

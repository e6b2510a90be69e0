"""Cache-first generation and batch orchestration."""

import logging
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field

from ..errors import CitegenError
from .backends import BackendSpec, DecodingParams, build_backend
from .cache import GenerationCache, GenerationRecord, generation_key, make_record

log = logging.getLogger(__name__)


def generate(
    system_text: str,
    user_text: str,
    *,
    backend_spec: BackendSpec,
    params: DecodingParams,
    cache: GenerationCache,
    config_key: str,
    instance_id: str,
    backend=None,
    keep_raw: bool = True,
) -> GenerationRecord:
    """Cache-first single generation; on a miss, one chat request is issued
    and the record stored atomically."""
    key = generation_key(
        backend_spec.backend_id,
        backend_spec.model_name,
        params,
        config_key,
        instance_id,
        system_text,
        user_text,
    )
    cached = cache.get(key)
    if cached is not None:
        return cached

    backend = backend or build_backend(backend_spec)
    t0 = time.monotonic()
    output_text, raw = backend.chat(system_text, user_text, params)
    latency_ms = int((time.monotonic() - t0) * 1000)
    record = make_record(
        key,
        backend_spec.backend_id,
        backend_spec.model_name,
        params,
        config_key,
        instance_id,
        system_text,
        user_text,
        output_text,
        latency_ms,
        raw if keep_raw else None,
    )
    return cache.put(record)


@dataclass
class RunManifest:
    backend_id: str
    model_name: str
    params: dict
    configs: list[str]
    instance_ids: list[str]
    cells: list[dict] = field(default_factory=list)
    complete: bool = True

    def counts(self) -> dict:
        out = {"generated": 0, "cached": 0, "failed": 0}
        for cell in self.cells:
            out[cell["status"]] += 1
        return out

    def to_dict(self) -> dict:
        return {
            "backend_id": self.backend_id,
            "model_name": self.model_name,
            "params": self.params,
            "configs": self.configs,
            "instance_ids": self.instance_ids,
            "cells": self.cells,
            "complete": self.complete,
            "counts": self.counts(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunManifest":
        return cls(
            backend_id=d["backend_id"],
            model_name=d["model_name"],
            params=d["params"],
            configs=d["configs"],
            instance_ids=d["instance_ids"],
            cells=d["cells"],
            complete=d["complete"],
        )


def run_batch(
    prompts: dict[tuple[str, str], tuple[str, str]],
    *,
    backend_spec: BackendSpec,
    params: DecodingParams,
    cache: GenerationCache,
    parallelism: int = 4,
    backend_options: dict | None = None,
) -> RunManifest:
    """Generate the full (config, instance) cross-product.

    `prompts` maps (config_string, instance_id) -> (system_text, user_text).
    Per-cell failures are recorded and the batch continues; the manifest is
    marked incomplete if anything failed. Re-running with the same cache
    only issues requests for missing cells, and the resulting record set is
    independent of thread count (cells are sorted into a stable order).
    """
    backend = build_backend(backend_spec, **(backend_options or {}))
    configs = sorted({c for c, _ in prompts})
    instance_ids = sorted({i for _, i in prompts})
    ordered = sorted(prompts.items())

    def one(item):
        (config_key, instance_id), (system_text, user_text) = item
        key = generation_key(
            backend_spec.backend_id,
            backend_spec.model_name,
            params,
            config_key,
            instance_id,
            system_text,
            user_text,
        )
        if cache.get(key) is not None:
            return {"config": config_key, "instance_id": instance_id, "key": key, "status": "cached"}
        try:
            generate(
                system_text,
                user_text,
                backend_spec=backend_spec,
                params=params,
                cache=cache,
                config_key=config_key,
                instance_id=instance_id,
                backend=backend,
            )
            return {
                "config": config_key,
                "instance_id": instance_id,
                "key": key,
                "status": "generated",
            }
        except CitegenError as exc:
            log.error("cell (%s, %s) failed: %s", config_key, instance_id, exc)
            return {
                "config": config_key,
                "instance_id": instance_id,
                "key": key,
                "status": "failed",
                "error": str(exc),
            }

    cells = []
    if parallelism <= 1:
        cells = [one(item) for item in ordered]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            futures = [pool.submit(one, item) for item in ordered]
            for fut in as_completed(futures):
                cells.append(fut.result())
        cells.sort(key=lambda c: (c["config"], c["instance_id"]))

    cache.rebuild_index()
    manifest = RunManifest(
        backend_id=backend_spec.backend_id,
        model_name=backend_spec.model_name,
        params=params.to_dict(),
        configs=configs,
        instance_ids=instance_ids,
        cells=cells,
        complete=all(c["status"] != "failed" for c in cells),
    )
    return manifest

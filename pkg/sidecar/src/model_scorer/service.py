"""HTTP service implementing the scorer protocol.

  GET  /v1/health  {status, models, protocol_version}
  POST /v1/score   {metric, pairs: [{reference, candidate}]} -> {scores, model_ids, protocol_version}
  POST /v1/embed   {texts} -> {vectors, model_ids, protocol_version}

NLI metrics receive pairs ordered {gold reference, model output}: the
reference is the premise, the output the hypothesis. Per-pair scoring
failures become null entries plus an errors list; a batch is never aborted
by one bad pair.
"""

import logging

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from . import PROTOCOL_VERSION, __version__
from .registry import Registry, load_registry

log = logging.getLogger(__name__)


class Pair(BaseModel):
    reference: str
    candidate: str


class ScoreBody(BaseModel):
    metric: str
    pairs: list[Pair]


class EmbedBody(BaseModel):
    texts: list[str]


def create_app(registry: Registry | None = None, registry_path=None, device: str = "cpu") -> FastAPI:
    reg = registry if registry is not None else load_registry(registry_path, device=device)
    app = FastAPI(title="model scorer sidecar", version=__version__)

    @app.get("/v1/health")
    def health():
        return {
            "status": "ok",
            "models": reg.models(),
            "declared": reg.declared(),
            "failed": reg.failed,
            "protocol_version": PROTOCOL_VERSION,
        }

    @app.post("/v1/score")
    def score(body: ScoreBody):
        entry = reg.entries.get(body.metric)
        if entry is None or entry.scorer.kind != "pair":
            raise HTTPException(
                status_code=400,
                detail=f"metric {body.metric!r} is not served; see /v1/health",
            )
        if not body.pairs:
            raise HTTPException(status_code=400, detail="empty pairs batch")
        scores: list[float | None] = []
        errors: list[dict] = []
        for index, pair in enumerate(body.pairs):
            try:
                scores.append(float(entry.scorer.score(pair.reference, pair.candidate)))
            except Exception as exc:  # one bad pair must not sink the batch
                log.warning("pair %d failed for %s: %s", index, body.metric, exc)
                scores.append(None)
                errors.append({"index": index, "error": str(exc)})
        return {
            "scores": scores,
            "errors": errors,
            "model_ids": {body.metric: entry.model_id},
            "protocol_version": PROTOCOL_VERSION,
        }

    @app.post("/v1/embed")
    def embed(body: EmbedBody):
        entry = reg.entries.get("embed")
        if entry is None:
            raise HTTPException(status_code=400, detail="no embedding model is served")
        if not body.texts:
            raise HTTPException(status_code=400, detail="empty texts batch")
        return {
            "vectors": [entry.scorer.embed(t) for t in body.texts],
            "model_ids": {"embed": entry.model_id},
            "protocol_version": PROTOCOL_VERSION,
        }

    return app

"""Client for the model-scorer sidecar.

Protocol (normative for any sidecar implementation):
  GET  /v1/health -> {"status": "ok", "models": {metric: model_id}, "protocol_version": "1"}
  POST /v1/score  -> body {"metric": ..., "pairs": [{"reference":..., "candidate":...}]}
                     response {"scores": [...], "model_ids": {...}, "protocol_version": "1"}
  POST /v1/embed  -> body {"texts": [...]}
                     response {"vectors": [[...]], "model_ids": {...}, "protocol_version": "1"}

NLI metrics receive the pair ordered {gold reference, model output}. The
client degrades gracefully: when the sidecar is down, metrics are reported
unavailable and the pipeline continues; a protocol version mismatch is a
hard error.
"""

import logging
import math
from dataclasses import dataclass

import httpx

from .errors import UpstreamError, ValidationError

log = logging.getLogger(__name__)

PROTOCOL_VERSION = "1"
SCORE_METRICS = ("bertscore", "scibertscore", "bleurt", "true_nli", "summac")


@dataclass
class ScoreResponse:
    scores: list[float | None]
    model_ids: dict[str, str]
    protocol_version: str


class ScorerClient:
    def __init__(
        self,
        endpoint: str,
        *,
        timeout_s: float = 60.0,
        batch_size: int = 32,
        failure_threshold: int = 3,
        client: httpx.Client | None = None,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.batch_size = batch_size
        self.failure_threshold = failure_threshold
        self._failures = 0
        self._client = client or httpx.Client(timeout=timeout_s)
        self._health: dict | None = None

    # --- health / availability ---

    def probe(self) -> dict | None:
        try:
            resp = self._client.get(self.endpoint + "/v1/health")
            resp.raise_for_status()
            health = resp.json()
        except (httpx.HTTPError, ValueError) as exc:
            log.warning("scorer sidecar unreachable at %s: %s", self.endpoint, exc)
            self._health = None
            return None
        version = str(health.get("protocol_version"))
        if version != PROTOCOL_VERSION:
            raise UpstreamError(
                f"scorer protocol version mismatch: sidecar speaks {version!r}, "
                f"client speaks {PROTOCOL_VERSION!r}"
            )
        self._health = health
        return health

    def is_healthy(self) -> bool:
        if self._health is None:
            self.probe()
        return self._health is not None and self._health.get("status") == "ok"

    def supports(self, metric: str) -> bool:
        if self._health is None:
            self.probe()
        return bool(self._health) and metric in self._health.get("models", {})

    def available_metrics(self) -> list[str]:
        if not self.is_healthy():
            return []
        return [m for m in SCORE_METRICS if self.supports(m)]

    def _tripped(self) -> bool:
        return self._failures >= self.failure_threshold

    # --- scoring ---

    def score_batch(self, metric: str, pairs: list[tuple[str, str]]) -> ScoreResponse:
        """Scores one metric over (reference, candidate) pairs, order preserved.

        Pairs are chunked by batch_size; the order of the returned scores
        always matches the input order.
        """
        if not pairs:
            raise ValidationError("empty score batch")
        if metric not in SCORE_METRICS:
            raise ValidationError(f"unknown metric {metric!r}")
        if self._tripped():
            raise UpstreamError(f"scorer circuit open after {self._failures} failures")
        if not self.is_healthy():
            raise UpstreamError(f"scorer sidecar unhealthy at {self.endpoint}")

        scores: list[float | None] = []
        model_ids: dict[str, str] = {}
        version = PROTOCOL_VERSION
        for start in range(0, len(pairs), self.batch_size):
            chunk = pairs[start : start + self.batch_size]
            body = {
                "metric": metric,
                "pairs": [{"reference": r, "candidate": c} for r, c in chunk],
            }
            try:
                resp = self._client.post(self.endpoint + "/v1/score", json=body)
                resp.raise_for_status()
                doc = resp.json()
            except (httpx.HTTPError, ValueError) as exc:
                self._failures += 1
                raise UpstreamError(f"score request failed: {exc}") from exc
            got = doc.get("scores")
            if not isinstance(got, list) or len(got) != len(chunk):
                raise UpstreamError(
                    f"scorer returned {len(got) if isinstance(got, list) else 'no'} scores "
                    f"for {len(chunk)} pairs"
                )
            for s in got:
                if s is not None and not math.isfinite(float(s)):
                    raise UpstreamError(f"non-finite score from sidecar: {s!r}")
            scores.extend(None if s is None else float(s) for s in got)
            model_ids.update(doc.get("model_ids", {}))
            version = str(doc.get("protocol_version", version))
        return ScoreResponse(scores=scores, model_ids=model_ids, protocol_version=version)

    def embed(self, texts: list[str]) -> list[list[float]]:
        """Unit-length embeddings, one per text. Dimension is model-constant."""
        if not texts:
            raise ValidationError("empty embed batch")
        if self._tripped():
            raise UpstreamError(f"scorer circuit open after {self._failures} failures")
        vectors: list[list[float]] = []
        dim: int | None = None
        for start in range(0, len(texts), self.batch_size):
            chunk = texts[start : start + self.batch_size]
            try:
                resp = self._client.post(self.endpoint + "/v1/embed", json={"texts": chunk})
                resp.raise_for_status()
                doc = resp.json()
            except (httpx.HTTPError, ValueError) as exc:
                self._failures += 1
                raise UpstreamError(f"embed request failed: {exc}") from exc
            got = doc.get("vectors")
            if not isinstance(got, list) or len(got) != len(chunk):
                raise UpstreamError("embed response length mismatch")
            for vec in got:
                if dim is None:
                    dim = len(vec)
                elif len(vec) != dim:
                    raise UpstreamError("embedding dimension varies within a batch")
                vectors.append(_l2_normalize([float(x) for x in vec]))
        return vectors


def _l2_normalize(vec: list[float]) -> list[float]:
    norm = math.sqrt(sum(x * x for x in vec))
    if norm == 0:
        return vec
    return [x / norm for x in vec]

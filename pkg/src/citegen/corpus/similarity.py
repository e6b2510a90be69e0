"""Similarity providers for example selection.

The primary provider computes cosine similarity over sentence embeddings
served by the scorer sidecar. The offline fallback is Jaccard overlap of
lowercased token sets; its use is always visible in selection provenance.
"""

import re
from typing import Protocol

from ..errors import UpstreamError

_WORD_RE = re.compile(r"\w+")


class SimilarityProvider(Protocol):
    name: str

    def score_many(self, anchor: str, candidates: list[str]) -> list[float]:
        """Scores in [-1, 1], one per candidate."""
        ...


class JaccardSimilarity:
    name = "lexical-fallback"

    @staticmethod
    def _tokens(text: str) -> set[str]:
        return set(_WORD_RE.findall(text.lower()))

    def score(self, a: str, b: str) -> float:
        ta, tb = self._tokens(a), self._tokens(b)
        if not ta and not tb:
            return 0.0
        return len(ta & tb) / len(ta | tb)

    def score_many(self, anchor: str, candidates: list[str]) -> list[float]:
        ta = self._tokens(anchor)
        out = []
        for cand in candidates:
            tb = self._tokens(cand)
            out.append(len(ta & tb) / len(ta | tb) if (ta or tb) else 0.0)
        return out


class EmbeddingSimilarity:
    """Cosine similarity over sidecar embeddings (unit vectors -> dot product)."""

    name = "embedding-service"

    def __init__(self, scorer_client):
        self._client = scorer_client

    def score_many(self, anchor: str, candidates: list[str]) -> list[float]:
        vectors = self._client.embed([anchor] + candidates)
        av = vectors[0]
        return [sum(x * y for x, y in zip(av, cv)) for cv in vectors[1:]]


def resolve_similarity(scorer_client=None, allow_fallback: bool = True) -> SimilarityProvider:
    """Prefer the embedding service; fall back to Jaccard when permitted."""
    if scorer_client is not None and scorer_client.is_healthy() and scorer_client.supports("embed"):
        return EmbeddingSimilarity(scorer_client)
    if allow_fallback:
        return JaccardSimilarity()
    raise UpstreamError("embedding service unavailable and lexical fallback disabled")

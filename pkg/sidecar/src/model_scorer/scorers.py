"""Scorer implementations.

The lexical family is deterministic and dependency-free, suitable for
offline runs and protocol testing. Transformer-backed scorers load real
models when their weights are available; a failed load marks the metric
absent rather than degrading it silently.
"""

import hashlib
import re

NEGATION = {"not", "no", "never", "cannot", "without", "n't"}
_WORD_RE = re.compile(r"\w+")
_SENT_RE = re.compile(r"(?<=[.!?])\s+")


def tokens(text: str) -> list[str]:
    return _WORD_RE.findall(text.lower())


def sentences(text: str) -> list[str]:
    parts = [p for p in _SENT_RE.split(text.strip()) if p.strip()]
    return parts or [text]


class TokenF1Scorer:
    """Set-F1 over lowercased tokens; the lexical stand-in for embedding-based
    similarity. Identity pairs score exactly 1."""

    kind = "pair"

    def __init__(self, model_id: str):
        self.model_id = model_id

    def score(self, reference: str, candidate: str) -> float:
        ref, cand = set(tokens(reference)), set(tokens(candidate))
        if not ref or not cand:
            return 0.0
        overlap = len(ref & cand)
        p, r = overlap / len(cand), overlap / len(ref)
        return 0.0 if p + r == 0 else 2 * p * r / (p + r)


class RuleEntailmentScorer:
    """Binary entailment: negation-aware token recall.

    A polarity mismatch on negation tokens is a contradiction (0); otherwise
    the hypothesis is entailed (1) when enough of its content tokens are
    recalled from the premise.
    """

    kind = "pair"

    def __init__(self, model_id: str, recall_threshold: float = 0.6):
        self.model_id = model_id
        self.recall_threshold = recall_threshold

    def score(self, premise: str, hypothesis: str) -> float:
        p_tok, h_tok = set(tokens(premise)), set(tokens(hypothesis))
        if (p_tok & NEGATION) != (h_tok & NEGATION):
            return 0.0
        content = h_tok - NEGATION
        if not content:
            return 0.0
        recall = len(content & p_tok) / len(content)
        return 1.0 if recall >= self.recall_threshold else 0.0


class SentenceGridScorer:
    """Sentence-level consistency: score every candidate sentence against
    every reference sentence, take the max per candidate sentence, then the
    mean (the zero-shot grid aggregation)."""

    kind = "pair"
    aggregation = "max-mean"

    def __init__(self, model_id: str, cell=None):
        self.model_id = model_id
        self._cell = cell or TokenF1Scorer(model_id).score

    def score(self, reference: str, candidate: str) -> float:
        ref_sents = sentences(reference)
        per_sentence = [
            max(self._cell(rs, cs) for rs in ref_sents) for cs in sentences(candidate)
        ]
        return sum(per_sentence) / len(per_sentence)


class BlendScorer:
    """Unit-interval blend of token overlap and sentence-grid consistency,
    the lexical stand-in for a learned regression metric."""

    kind = "pair"

    def __init__(self, model_id: str):
        self.model_id = model_id
        self._f1 = TokenF1Scorer(model_id)
        self._grid = SentenceGridScorer(model_id)

    def score(self, reference: str, candidate: str) -> float:
        return 0.5 * self._f1.score(reference, candidate) + 0.5 * self._grid.score(
            reference, candidate
        )


class HashedBowEmbedder:
    """Deterministic bag-of-words embeddings via token hashing."""

    kind = "embed"

    def __init__(self, model_id: str, dim: int = 256):
        self.model_id = model_id
        self.dim = dim

    def embed(self, text: str) -> list[float]:
        vec = [0.0] * self.dim
        for tok in tokens(text):
            digest = hashlib.sha1(tok.encode("utf-8")).digest()
            index = int.from_bytes(digest[:4], "big") % self.dim
            sign = 1.0 if digest[4] % 2 == 0 else -1.0
            vec[index] += sign
        return vec


class SentenceTransformerEmbedder:
    """Real sentence-transformer embeddings; only constructible when the
    model weights are actually loadable."""

    kind = "embed"

    def __init__(self, model_id: str, device: str = "cpu"):
        from sentence_transformers import SentenceTransformer

        self.model_id = model_id
        self._model = SentenceTransformer(model_id.removeprefix("hf:"), device=device)
        self.dim = self._model.get_sentence_embedding_dimension()

    def embed(self, text: str) -> list[float]:
        return [float(x) for x in self._model.encode([text])[0]]

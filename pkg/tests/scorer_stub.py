"""In-test double of the scorer sidecar protocol.

Deterministic lexical scorers stand in for the real models; the protocol
conformance suite runs against this stub and against the real sidecar
service with identical expectations.
"""

import hashlib
import re

from fastapi import FastAPI
from pydantic import BaseModel

PROTOCOL_VERSION = "1"
NEGATION = {"not", "no", "never", "cannot", "without", "n't"}
_WORD_RE = re.compile(r"\w+")

STUB_MODELS = {
    "bertscore": "stub:token-f1",
    "scibertscore": "stub:token-f1-sci",
    "bleurt": "stub:lexical-regression",
    "true_nli": "stub:rule-entailment",
    "summac": "stub:zs-grid-max-mean",
    "embed": "stub:hashed-bow-64",
}


def _tokens(text: str) -> list[str]:
    return _WORD_RE.findall(text.lower())


def token_f1(reference: str, candidate: str) -> float:
    ref, cand = set(_tokens(reference)), set(_tokens(candidate))
    if not ref or not cand:
        return 0.0
    p = len(cand & ref) / len(cand)
    r = len(cand & ref) / len(ref)
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def rule_nli(premise: str, hypothesis: str) -> int:
    p_tok, h_tok = set(_tokens(premise)), set(_tokens(hypothesis))
    if (p_tok & NEGATION) != (h_tok & NEGATION):
        return 0
    content = h_tok - NEGATION
    if not content:
        return 0
    recall = len(content & p_tok) / len(content)
    return 1 if recall >= 0.6 else 0


def _sentences(text: str) -> list[str]:
    parts = re.split(r"(?<=[.!?])\s+", text.strip())
    return [p for p in parts if p.strip()] or [text]


def summac_grid(reference: str, candidate: str) -> float:
    cand_sents = _sentences(candidate)
    ref_sents = _sentences(reference)
    per_sentence = []
    for cs in cand_sents:
        per_sentence.append(max(token_f1(rs, cs) for rs in ref_sents))
    return sum(per_sentence) / len(per_sentence)


def embed_text(text: str, dim: int = 64) -> list[float]:
    vec = [0.0] * dim
    for tok in _tokens(text):
        digest = hashlib.sha1(tok.encode("utf-8")).digest()
        vec[digest[0] % dim] += 1.0
    return vec


def score_pair(metric: str, reference: str, candidate: str) -> float:
    if metric in ("bertscore", "scibertscore"):
        return token_f1(reference, candidate)
    if metric == "bleurt":
        return 0.5 * token_f1(reference, candidate) + 0.5 * summac_grid(reference, candidate)
    if metric == "true_nli":
        return float(rule_nli(reference, candidate))
    if metric == "summac":
        return summac_grid(reference, candidate)
    raise KeyError(metric)


class ScoreBody(BaseModel):
    metric: str
    pairs: list[dict]


class EmbedBody(BaseModel):
    texts: list[str]


def make_stub_app(models: dict | None = None, protocol_version: str = PROTOCOL_VERSION) -> FastAPI:
    registry = dict(STUB_MODELS if models is None else models)
    app = FastAPI()

    @app.get("/v1/health")
    def health():
        return {"status": "ok", "models": registry, "protocol_version": protocol_version}

    @app.post("/v1/score")
    def score(body: ScoreBody):
        if body.metric not in registry:
            return {"error": f"metric {body.metric} not loaded"}, 400
        scores = [score_pair(body.metric, p["reference"], p["candidate"]) for p in body.pairs]
        return {
            "scores": scores,
            "model_ids": {body.metric: registry[body.metric]},
            "protocol_version": protocol_version,
        }

    @app.post("/v1/embed")
    def embed(body: EmbedBody):
        return {
            "vectors": [embed_text(t) for t in body.texts],
            "model_ids": {"embed": registry.get("embed", "stub:hashed-bow-64")},
            "protocol_version": protocol_version,
        }

    return app

"""Native measurement kit: surface metrics and ROUGE-L.

All functions here are pure and deterministic; model-based metrics live
behind the scorer sidecar client instead.
"""

import re
from dataclasses import dataclass, asdict

_TOKEN_RE = re.compile(r"\w+")


def tokenize(text: str) -> list[str]:
    """Lowercase tokens split on whitespace and punctuation boundaries."""
    return _TOKEN_RE.findall(text.lower())


def ngrams(tokens: list[str], n: int) -> set[tuple[str, ...]]:
    if len(tokens) < n:
        return set()
    return {tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)}


def ngram_overlap(n: int, source_text: str, output_text: str) -> float:
    """Fraction of the output's unique n-grams that also occur in the source.

    Returns 0.0 when the output has fewer than n tokens.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    out = ngrams(tokenize(output_text), n)
    if not out:
        return 0.0
    src = ngrams(tokenize(source_text), n)
    return len(out & src) / len(out)


def word_count(text: str) -> int:
    return len(text.split())


_PARA_SPLIT_RE = re.compile(r"\n{2,}")


def paragraph_count(text: str) -> int:
    """Maximal blocks separated by blank lines; 1 for any non-empty text."""
    if not text.strip():
        return 0
    blocks = [b for b in _PARA_SPLIT_RE.split(text) if b.strip()]
    return max(1, len(blocks))


def citation_mark_usage(text: str, mark: str = "[REF#1]") -> bool:
    """True iff the mark occurs verbatim (no whitespace or case slack)."""
    return mark in text


def lcs_length(a: list[str], b: list[str]) -> int:
    """Length of the longest common subsequence of two token lists.

    Bit-parallel formulation: one arbitrary-precision bit vector tracks the
    DP row, giving O(len(b) * len(a)/wordsize) instead of the quadratic table.
    """
    m = len(a)
    if m == 0 or not b:
        return 0
    mask = (1 << m) - 1
    pm: dict[str, int] = {}
    for i, tok in enumerate(a):
        pm[tok] = pm.get(tok, 0) | (1 << i)
    v = mask
    for tok in b:
        u = v & pm.get(tok, 0)
        v = ((v + u) | (v - u)) & mask
    return m - v.bit_count()


def rouge_l(candidate: str, reference: str) -> dict[str, float]:
    """Summary-level ROUGE-L over whole texts as single token sequences.

    F-measure uses beta=1. Returns zeros when either side has no tokens.
    """
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand or not ref:
        return {"precision": 0.0, "recall": 0.0, "f1": 0.0}
    lcs = lcs_length(cand, ref)
    p = lcs / len(cand)
    r = lcs / len(ref)
    f1 = 0.0 if p + r == 0 else 2 * p * r / (p + r)
    return {"precision": p, "recall": r, "f1": f1}


@dataclass
class SurfaceMetrics:
    ng1: float
    ng2: float
    ng3: float
    word_count: int
    paragraph_count: int
    citation_mark_used: bool


MODEL_METRICS = ("bertscore", "scibertscore", "bleurt", "true_score", "summac")


@dataclass
class MeasurementVector:
    """Per-instance metric values for one (config, backend) cell.

    Model-based fields are None when the scorer sidecar was unavailable:
    an explicit marker, never a defaulted 0. Surface fields are None only
    for the abstracts baseline, which has no prompt.
    """

    instance_id: str
    config: str
    backend_id: str
    ng1: float | None
    ng2: float | None
    ng3: float | None
    word_count: int
    paragraph_count: int | None
    citation_mark_used: bool | None
    rouge_l: float
    bertscore: float | None = None
    scibertscore: float | None = None
    bleurt: float | None = None
    true_score: float | None = None
    summac: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "MeasurementVector":
        return cls(**{k: d[k] for k in cls.__dataclass_fields__ if k in d})


def measure_surface(prompt_text: str, output_text: str, mark: str = "[REF#1]") -> SurfaceMetrics:
    return SurfaceMetrics(
        ng1=ngram_overlap(1, prompt_text, output_text),
        ng2=ngram_overlap(2, prompt_text, output_text),
        ng3=ngram_overlap(3, prompt_text, output_text),
        word_count=word_count(output_text),
        paragraph_count=paragraph_count(output_text),
        citation_mark_used=citation_mark_usage(output_text, mark),
    )


def measure(
    instance_id: str,
    config: str,
    backend_id: str,
    prompt_text: str,
    output_text: str,
    reference_text: str,
) -> MeasurementVector:
    """Assemble the native (surface + ROUGE-L) part of a measurement vector."""
    surf = measure_surface(prompt_text, output_text)
    return MeasurementVector(
        instance_id=instance_id,
        config=config,
        backend_id=backend_id,
        ng1=surf.ng1,
        ng2=surf.ng2,
        ng3=surf.ng3,
        word_count=surf.word_count,
        paragraph_count=surf.paragraph_count,
        citation_mark_used=surf.citation_mark_used,
        rouge_l=rouge_l(output_text, reference_text)["f1"],
    )


def measure_baseline(
    instance_id: str, backend_id: str, baseline_text: str, reference_text: str
) -> MeasurementVector:
    """Vector for the abstracts baseline: no prompt, so surface cells are masked."""
    return MeasurementVector(
        instance_id=instance_id,
        config="Abs. Baseline",
        backend_id=backend_id,
        ng1=None,
        ng2=None,
        ng3=None,
        word_count=word_count(baseline_text),
        paragraph_count=None,
        citation_mark_used=None,
        rouge_l=rouge_l(baseline_text, reference_text)["f1"],
    )

"""Example sentence pool: construction and per-instance selection.

Pool sentences are citation sentences drawn from paragraphs across the whole
corpus. A sentence enters the pool for cited paper P when it contains P's
citation mark and is long enough. At selection time the most similar
sentence to the instance's gold paragraph wins, never one that originates
from the instance's own citing paper.
"""

import logging
from dataclasses import dataclass

from .segment import SegmenterHandle
from .similarity import SimilarityProvider
from .types import (
    OTHER_MARK,
    TARGET_MARK,
    CitationInstance,
    ExamplePool,
    ExampleSentence,
    IngestStats,
)

log = logging.getLogger(__name__)


def _normalize_sentence(sentence: str, target_mark: str, other_marks: list[str]) -> str:
    out = sentence.replace(target_mark, TARGET_MARK)
    for m in other_marks:
        out = out.replace(m, OTHER_MARK)
    return out


def build_example_pool(
    instances: list[CitationInstance],
    segmenter: SegmenterHandle,
    min_sentence_words: int = 10,
    stats: IngestStats | None = None,
) -> ExamplePool:
    """Collect citation sentences keyed by cited paper.

    Stored sentences are normalized: the cited paper's mark becomes [REF#1]
    and sibling citations become [OTH]. The word threshold is applied to the
    normalized sentence. Cited papers with no surviving sentence are absent
    from the map entirely.
    """
    pool: dict[str, list[ExampleSentence]] = {}
    counters: dict[str, int] = {}

    for inst in instances:
        try:
            sentences = segmenter(inst.paragraph_markup)
        except Exception as exc:  # segmenter is pluggable; stay resilient
            log.warning("segmenter failed on %s: %s", inst.instance_id, exc)
            if stats is not None:
                stats.pool_skipped_paragraphs += 1
            continue
        all_marks = [c.mark for c in inst.citations]
        for ref in inst.citations:
            others = [m for m in all_marks if m != ref.mark]
            for sent in sentences:
                if ref.mark not in sent:
                    continue
                normalized = _normalize_sentence(sent, ref.mark, others)
                if len(normalized.split()) < min_sentence_words:
                    continue
                ordinal = counters.get(ref.cited.paper_id, 0)
                counters[ref.cited.paper_id] = ordinal + 1
                pool.setdefault(ref.cited.paper_id, []).append(
                    ExampleSentence(
                        example_id=f"{ref.cited.paper_id}#{ordinal}",
                        sentence=normalized,
                        source_paragraph=inst.paragraph_markup,
                        cited_paper_id=ref.cited.paper_id,
                        mark=ref.mark,
                        source_citing_paper_id=inst.citing.paper_id,
                    )
                )

    if stats is not None:
        stats.pool_sentences = sum(len(v) for v in pool.values())
        stats.pool_cited_papers = len(pool)
    return ExamplePool(by_cited_paper=pool)


@dataclass
class SelectedExample:
    sentence: ExampleSentence
    provider: str
    score: float


def select_example(
    pool: ExamplePool,
    instance: CitationInstance,
    similarity: SimilarityProvider,
) -> SelectedExample | None:
    """Pick the pool sentence most similar to the instance's gold paragraph.

    Eligible sentences cite the instance's single cited paper and come from
    a different citing paper. Ties break on the lexicographically smallest
    example_id. Returns None when no eligible sentence exists.
    """
    if len(instance.citations) != 1:
        raise ValueError(
            f"{instance.instance_id}: example selection requires a single citation"
        )
    cited_id = instance.citations[0].cited.paper_id
    candidates = [
        s
        for s in pool.by_cited_paper.get(cited_id, [])
        if s.source_citing_paper_id != instance.citing.paper_id
    ]
    if not candidates:
        return None

    gold = instance.gold_reference()
    scores = similarity.score_many(gold, [c.sentence for c in candidates])
    best = max(zip(candidates, scores), key=lambda cs: (cs[1], _neg_id_key(cs[0].example_id)))
    return SelectedExample(sentence=best[0], provider=similarity.name, score=best[1])


class _neg_id_key:
    """Orders example ids descending, so max() prefers the smallest id on ties."""

    __slots__ = ("v",)

    def __init__(self, v: str):
        self.v = v

    def __lt__(self, other: "_neg_id_key") -> bool:
        return self.v > other.v

    def __eq__(self, other) -> bool:
        return self.v == other.v

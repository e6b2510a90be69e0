"""Citation intents: free-form generation, categorical assignment, leak audit.

Free-form intents are one-sentence statements of why a paper is cited,
produced by prompting an LLM with the gold paragraph under greedy decoding.
Categorical intents are opaque labels from an external classifier or a
column already present in the corpus. The leak audit measures how much
gold-paragraph vocabulary an intent (or the abstracts) gives away.
"""

import logging
import math
import string
from dataclasses import asdict, dataclass
from importlib import resources

from .corpus.types import CitationInstance
from .errors import UpstreamError, ValidationError
from .gateway.backends import BackendSpec, DecodingParams
from .gateway.cache import GenerationCache
from .gateway.runner import generate

log = logging.getLogger(__name__)

FREE_FORM_PROMPT = "What is intention of the following paragraph?"
MAX_INTENT_WORDS = 60
LEAK_FLAG_THRESHOLD = 0.5  # per-instance unigram overlap that flags an intent


@dataclass
class Intent:
    kind: str  # free_form | categorical
    text: str
    source: str  # generated | classifier | provided
    instance_id: str
    leak_flagged: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


class IntentError(UpstreamError):
    pass


def generate_free_form_intent(
    instance: CitationInstance,
    backend_spec: BackendSpec,
    cache: GenerationCache,
    stopwords: set[str] | None = None,
) -> Intent:
    """Zero-shot free-form intent for a gold paragraph, greedy decoded and cached.

    The first response line is the intent. Empty or degenerate (over-long)
    responses raise instead of fabricating anything. An intent whose unigram
    overlap with the gold paragraph exceeds the leak threshold is flagged
    for manual review, not dropped.
    """
    gold = instance.gold_reference()
    if not gold.strip():
        raise ValidationError(f"{instance.instance_id}: empty gold paragraph")
    params = DecodingParams(strategy="greedy")
    record = generate(
        "",
        f"{FREE_FORM_PROMPT}\n{gold}",
        backend_spec=backend_spec,
        params=params,
        cache=cache,
        config_key="intent:free_form",
        instance_id=instance.instance_id,
    )
    first_line = record.output_text.strip().splitlines()[0].strip() if record.output_text.strip() else ""
    if not first_line:
        raise IntentError(f"{instance.instance_id}: backend returned an empty intent")
    if len(first_line.split()) > MAX_INTENT_WORDS:
        raise IntentError(
            f"{instance.instance_id}: intent of {len(first_line.split())} words exceeds "
            f"the {MAX_INTENT_WORDS}-word cap"
        )

    sw = stopwords if stopwords is not None else default_stopwords()
    ratio = _overlap_ratio(content_ngrams(gold, 1, sw), content_ngrams(first_line, 1, sw))
    flagged = ratio is not None and ratio > LEAK_FLAG_THRESHOLD
    if flagged:
        log.warning(
            "%s: intent unigram overlap %.2f exceeds %.2f, flagged for review",
            instance.instance_id,
            ratio,
            LEAK_FLAG_THRESHOLD,
        )
    return Intent(
        kind="free_form",
        text=first_line,
        source="generated",
        instance_id=instance.instance_id,
        leak_flagged=flagged,
    )


def assign_categorical_intent(instance: CitationInstance, classifier=None) -> Intent:
    """Categorical label from a classifier handle or the provided corpus column."""
    if classifier is not None:
        label = classifier(instance)
        source = "classifier"
    elif instance.categorical_intent is not None:
        label = instance.categorical_intent
        source = "provided"
    else:
        raise ValidationError(
            f"{instance.instance_id}: no classifier configured and no categorical "
            "intent column in the corpus"
        )
    label = str(label).strip()
    if not label:
        raise ValidationError(f"{instance.instance_id}: empty categorical label")
    return Intent(kind="categorical", text=label, source=source, instance_id=instance.instance_id)


# --- n-gram leak audit -----------------------------------------------------


def default_stopwords() -> set[str]:
    text = resources.files("citegen").joinpath("data/stopwords.txt").read_text("utf-8")
    return {
        line.strip().lower()
        for line in text.splitlines()
        if line.strip() and not line.startswith("#")
    }


def content_ngrams(text: str, n: int, stopwords: set[str]) -> set[tuple[str, ...]]:
    """Unique n-grams over lowercased tokens, punctuation stripped at token
    boundaries, stop words removed before n-gram formation."""
    tokens = []
    for raw in text.lower().split():
        tok = raw.strip(string.punctuation)
        if tok and tok not in stopwords:
            tokens.append(tok)
    if len(tokens) < n:
        return set()
    return {tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)}


def _overlap_ratio(gold_ngrams: set, other_ngrams: set) -> float | None:
    if not gold_ngrams:
        return None
    return len(gold_ngrams & other_ngrams) / len(gold_ngrams)


@dataclass
class LeakReport:
    per_n: dict[int, dict[str, float]]
    instances_used: int
    instances_skipped: int

    def to_dict(self) -> dict:
        return {
            "per_n": {str(n): v for n, v in sorted(self.per_n.items())},
            "instances_used": self.instances_used,
            "instances_skipped": self.instances_skipped,
        }


def leak_audit(
    intents: dict[str, Intent],
    instances: list[CitationInstance],
    stopwords: set[str] | None = None,
) -> LeakReport:
    """Average overlap of gold-paragraph n-grams with intents and abstracts.

    For n in {1,2,3}: ratio = |ngrams(gold) & ngrams(other)| / |ngrams(gold)|,
    averaged over instances, for other in {intent, concatenated abstracts}.
    Instances whose gold paragraph has no content n-grams at some n are
    skipped at that n and counted.
    """
    sw = stopwords if stopwords is not None else default_stopwords()
    ratios = {n: {"gold_vs_intent": [], "gold_vs_abstract": []} for n in (1, 2, 3)}
    skipped = 0

    for inst in instances:
        intent = intents.get(inst.instance_id)
        if intent is None:
            raise ValidationError(f"{inst.instance_id}: no intent provided for audit")
        gold = inst.gold_reference() if len(inst.citations) == 1 else inst.paragraph_text
        abstracts = " ".join(
            [inst.citing.abstract] + [c.cited.abstract for c in inst.citations]
        )
        skipped_here = False
        for n in (1, 2, 3):
            gn = content_ngrams(gold, n, sw)
            ri = _overlap_ratio(gn, content_ngrams(intent.text, n, sw))
            ra = _overlap_ratio(gn, content_ngrams(abstracts, n, sw))
            if ri is None or ra is None:
                skipped_here = True
                continue
            ratios[n]["gold_vs_intent"].append(ri)
            ratios[n]["gold_vs_abstract"].append(ra)
        if skipped_here:
            skipped += 1

    per_n = {}
    used = 0
    for n in (1, 2, 3):
        vals = ratios[n]
        used = max(used, len(vals["gold_vs_intent"]))
        if not vals["gold_vs_intent"]:
            per_n[n] = {"gold_vs_intent": 0.0, "gold_vs_abstract": 0.0}
        else:
            # fsum keeps the average exactly order-invariant
            per_n[n] = {
                key: math.fsum(sorted(vs)) / len(vs) for key, vs in vals.items()
            }
    return LeakReport(per_n=per_n, instances_used=used, instances_skipped=skipped)

"""Atomic fact extraction for the pyramid evaluation.

A backend decomposes the gold paragraph into minimal standalone statements,
one per line. Everything lands in a curation queue as `extracted`; only
facts a curator accepts (`curated`) ever enter live tasks.
"""

import re
from dataclasses import asdict, dataclass
from importlib import resources

from ..corpus.types import CitationInstance
from ..gateway.backends import BackendSpec, DecodingParams
from ..gateway.cache import GenerationCache
from ..gateway.runner import generate

STATUS_EXTRACTED = "extracted"
STATUS_CURATED = "curated"
STATUS_REJECTED = "rejected"

_BULLET_RE = re.compile(r"^\s*(?:[-*•]|\d+[.)-]?)\s*")


@dataclass
class AtomicFact:
    fact_id: str
    instance_id: str
    text: str
    status: str = STATUS_EXTRACTED

    def to_dict(self) -> dict:
        return asdict(self)


def fact_extraction_prompt() -> str:
    return (
        resources.files("citegen")
        .joinpath("data/fact_extraction_prompt.txt")
        .read_text("utf-8")
        .strip()
    )


def parse_fact_lines(response: str) -> list[str]:
    """One fact per line; bullets and numbering stripped, duplicates removed
    case-insensitively (first spelling wins)."""
    seen = set()
    facts = []
    for line in response.splitlines():
        text = _BULLET_RE.sub("", line).strip()
        if not text:
            continue
        key = text.lower()
        if key in seen:
            continue
        seen.add(key)
        facts.append(text)
    return facts


@dataclass
class FactExtraction:
    facts: list[AtomicFact]
    raw_response: str
    flagged_for_manual_split: bool


def extract_facts(
    instance: CitationInstance,
    backend_spec: BackendSpec,
    cache: GenerationCache,
    prompt: str | None = None,
) -> FactExtraction:
    """Prompt the backend to decompose the gold paragraph into atomic facts.

    The raw response is always kept; when nothing parses, the extraction is
    flagged so a curator can split it manually.
    """
    gold = instance.gold_reference()
    instruction = prompt if prompt is not None else fact_extraction_prompt()
    record = generate(
        "",
        f"{instruction}\n{gold}",
        backend_spec=backend_spec,
        params=DecodingParams(strategy="greedy"),
        cache=cache,
        config_key="humeval:fact_extraction",
        instance_id=instance.instance_id,
    )
    lines = parse_fact_lines(record.output_text)
    facts = [
        AtomicFact(
            fact_id=f"{instance.instance_id}#f{k}",
            instance_id=instance.instance_id,
            text=text,
            status=STATUS_EXTRACTED,
        )
        for k, text in enumerate(lines)
    ]
    return FactExtraction(
        facts=facts,
        raw_response=record.output_text,
        flagged_for_manual_split=not facts,
    )

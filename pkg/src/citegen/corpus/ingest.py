"""Corpus ingestion: line-delimited raw records -> validated citation instances.

Raw records are JSON objects, one per line, with list-valued fields for the
cited-paper columns (marks, ids, titles, abstracts are parallel lists).
Cleanup removes records that are malformed, non-English (when tagged),
outside the related-work section title list, under the paragraph word
threshold, or duplicates of an already-seen paper (same title + abstract
under a different id). Each removal is attributed to exactly one rule so
the stats conserve: removed + kept = total.
"""

import json
import logging
from importlib import resources
from pathlib import Path

from ..errors import EmptyCorpusError, ValidationError
from .pool import build_example_pool
from .segment import SegmenterHandle, get_segmenter
from .types import (
    CitationInstance,
    CitedRef,
    CorpusBundle,
    IngestConfig,
    IngestStats,
    PaperRecord,
)

log = logging.getLogger(__name__)

# Citing-paper metadata columns carried through into venue_metadata.
_META_FIELDS = (
    "publisher",
    "booktitle",
    "author",
    "url",
    "doi",
    "journal",
    "volume",
    "number",
    "pages",
    "address",
    "month",
    "editor",
    "isbn",
)


def default_section_titles() -> frozenset[str]:
    text = resources.files("citegen").joinpath("data/related_work_titles.txt").read_text("utf-8")
    return load_section_titles_text(text)


def load_section_titles_text(text: str) -> frozenset[str]:
    titles = set()
    for line in text.splitlines():
        line = line.strip().lower()
        if line and not line.startswith("#"):
            titles.add(line)
    return frozenset(titles)


def make_config(
    min_paragraph_words: int = 40,
    min_sentence_words: int = 10,
    section_titles: frozenset[str] | None = None,
    language_filter: bool = True,
) -> IngestConfig:
    return IngestConfig(
        min_paragraph_words=min_paragraph_words,
        min_sentence_words=min_sentence_words,
        section_titles=section_titles if section_titles is not None else default_section_titles(),
        language_filter=language_filter,
    )


class MalformedRecord(ValueError):
    pass


def _require(record: dict, field: str):
    if field not in record or record[field] in (None, ""):
        raise MalformedRecord(f"missing field {field!r}")
    return record[field]


def _parse_record(record: dict, line_no: int) -> CitationInstance:
    acl_id = str(_require(record, "acl_id"))
    citing = PaperRecord(
        paper_id=acl_id,
        title=str(_require(record, "title")).strip(),
        abstract=str(_require(record, "abstract")).strip(),
        year=record.get("year"),
        venue_metadata={k: str(record[k]) for k in _META_FIELDS if record.get(k)},
    )
    if not citing.abstract:
        raise MalformedRecord("empty citing abstract")

    paragraph = str(_require(record, "paragraph")).strip()
    markup = str(_require(record, "paragraph_xml")).strip()
    section_title = str(_require(record, "section_title")).strip()

    marks = record.get("cited_paper_marks")
    ids = record.get("cited_papers_acl_ids")
    titles = record.get("cited_paper_titles")
    abstracts = record.get("cited_papers_abstracts")
    years = record.get("cited_papers_years") or [None] * len(ids or [])
    for name, val in (
        ("cited_paper_marks", marks),
        ("cited_papers_acl_ids", ids),
        ("cited_paper_titles", titles),
        ("cited_papers_abstracts", abstracts),
    ):
        if not isinstance(val, list) or not val:
            raise MalformedRecord(f"{name} must be a non-empty list")
    if not (len(marks) == len(ids) == len(titles) == len(abstracts) == len(years)):
        raise MalformedRecord("cited-paper lists have mismatched lengths")

    citations = []
    for mark, pid, title, abstract, year in zip(marks, ids, titles, abstracts, years):
        if not str(abstract).strip():
            # self-contained requirement: cited papers carry their abstract
            raise MalformedRecord(f"cited paper {pid} has an empty abstract")
        position = markup.find(mark)
        if position < 0:
            raise MalformedRecord(f"citation mark {mark!r} not found in paragraph markup")
        citations.append(
            CitedRef(
                cited=PaperRecord(
                    paper_id=str(pid),
                    title=str(title).strip(),
                    abstract=str(abstract).strip(),
                    year=year,
                ),
                mark=str(mark),
                position=position,
            )
        )

    if "\n\n" in paragraph or "\n\n" in markup:
        raise MalformedRecord("paragraph is not a single block")

    return CitationInstance(
        instance_id=f"{acl_id}@{line_no}",
        citing=citing,
        paragraph_text=paragraph,
        paragraph_markup=markup,
        citations=citations,
        section_title=section_title,
        categorical_intent=(str(record["categorical_intent"]).strip() or None)
        if record.get("categorical_intent")
        else None,
    )


def ingest_corpus(
    raw_corpus_path: str | Path,
    config: IngestConfig,
    segmenter: SegmenterHandle | None = None,
) -> CorpusBundle:
    """Ingest a raw JSONL corpus into a validated CorpusBundle.

    Malformed records are logged, counted, and skipped; the batch never
    aborts on a single bad line. Raises EmptyCorpusError when nothing
    survives cleanup.
    """
    path = Path(raw_corpus_path)
    if not path.exists():
        raise ValidationError(f"corpus file not readable: {path}")

    stats = IngestStats()
    instances: list[CitationInstance] = []
    # paper-level dedup state: (title, abstract) -> first paper_id seen
    seen_key_to_id: dict[tuple[str, str], str] = {}
    id_to_key: dict[str, tuple[str, str]] = {}

    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh):
            if not line.strip():
                continue
            stats.total_records += 1
            try:
                record = json.loads(line)
                if not isinstance(record, dict):
                    raise MalformedRecord("record is not an object")
                inst = _parse_record(record, line_no)
            except (json.JSONDecodeError, MalformedRecord) as exc:
                log.warning("line %d: skipping malformed record: %s", line_no, exc)
                stats.removed_malformed += 1
                continue

            lang = record.get("language")
            if config.language_filter and lang is not None:
                if str(lang).strip().lower() not in config.accepted_languages:
                    stats.removed_non_english += 1
                    continue

            if inst.section_title.strip().lower() not in config.section_titles:
                stats.removed_section_title += 1
                continue

            if len(inst.paragraph_text.split()) < config.min_paragraph_words:
                stats.removed_short_paragraph += 1
                continue

            key = (inst.citing.title.strip().lower(), inst.citing.abstract.strip().lower())
            prior_id = seen_key_to_id.get(key)
            if prior_id is not None and prior_id != inst.citing.paper_id:
                # same title+abstract under a different id: republished duplicate
                stats.removed_duplicate += 1
                continue
            prior_key = id_to_key.get(inst.citing.paper_id)
            if prior_key is not None and prior_key != key:
                log.warning(
                    "paper %s has inconsistent title/abstract across records", inst.citing.paper_id
                )
                stats.removed_malformed += 1
                continue
            seen_key_to_id.setdefault(key, inst.citing.paper_id)
            id_to_key.setdefault(inst.citing.paper_id, key)

            stats.kept += 1
            instances.append(inst)

    if not instances:
        raise EmptyCorpusError(
            f"no instances survived cleanup of {stats.total_records} records in {path}"
        )

    pool = build_example_pool(
        instances,
        get_segmenter(segmenter),
        min_sentence_words=config.min_sentence_words,
        stats=stats,
    )
    return CorpusBundle(instances=instances, pool=pool, stats=stats)


def select_single_citation(instances: list[CitationInstance]) -> list[CitationInstance]:
    """Instances citing exactly one paper, input order preserved."""
    return [i for i in instances if len(i.citations) == 1]

"""Domain types for the citation-paragraph corpus."""

from dataclasses import dataclass, field, asdict

TARGET_MARK = "[REF#1]"
OTHER_MARK = "[OTH]"


@dataclass
class PaperRecord:
    paper_id: str
    title: str
    abstract: str
    year: int | None = None
    venue_metadata: dict[str, str] = field(default_factory=dict)


@dataclass
class CitedRef:
    cited: PaperRecord
    mark: str
    position: int


@dataclass
class CitationInstance:
    instance_id: str
    citing: PaperRecord
    paragraph_text: str
    paragraph_markup: str
    citations: list[CitedRef]
    section_title: str
    categorical_intent: str | None = None

    def gold_reference(self) -> str:
        """Gold paragraph with the single target citation normalized to [REF#1].

        Only valid on single-citation instances; any other known marks would
        become [OTH], but by definition there are none here.
        """
        if len(self.citations) != 1:
            raise ValueError(
                f"{self.instance_id}: gold_reference requires a single citation, "
                f"got {len(self.citations)}"
            )
        return self.paragraph_markup.replace(self.citations[0].mark, TARGET_MARK)


@dataclass
class ExampleSentence:
    example_id: str
    sentence: str
    source_paragraph: str
    cited_paper_id: str
    mark: str
    source_citing_paper_id: str


@dataclass
class ExamplePool:
    by_cited_paper: dict[str, list[ExampleSentence]] = field(default_factory=dict)

    def sentence_count(self) -> int:
        return sum(len(v) for v in self.by_cited_paper.values())


@dataclass
class IngestConfig:
    min_paragraph_words: int = 40
    min_sentence_words: int = 10
    section_titles: frozenset[str] = frozenset()
    language_filter: bool = True
    accepted_languages: frozenset[str] = frozenset({"en", "eng", "english"})


@dataclass
class IngestStats:
    total_records: int = 0
    kept: int = 0
    removed_malformed: int = 0
    removed_non_english: int = 0
    removed_section_title: int = 0
    removed_short_paragraph: int = 0
    removed_duplicate: int = 0
    pool_sentences: int = 0
    pool_cited_papers: int = 0
    pool_skipped_paragraphs: int = 0

    def removed_total(self) -> int:
        return (
            self.removed_malformed
            + self.removed_non_english
            + self.removed_section_title
            + self.removed_short_paragraph
            + self.removed_duplicate
        )

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class CorpusBundle:
    instances: list[CitationInstance]
    pool: ExamplePool
    stats: IngestStats

    def to_dict(self) -> dict:
        return {
            "instances": [_instance_dict(i) for i in self.instances],
            "pool": {
                pid: [asdict(s) for s in sents]
                for pid, sents in sorted(self.pool.by_cited_paper.items())
            },
            "stats": self.stats.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CorpusBundle":
        instances = [_instance_from_dict(x) for x in d["instances"]]
        pool = ExamplePool(
            {
                pid: [ExampleSentence(**s) for s in sents]
                for pid, sents in d["pool"].items()
            }
        )
        stats = IngestStats(**d["stats"])
        return cls(instances=instances, pool=pool, stats=stats)

    def by_id(self) -> dict[str, CitationInstance]:
        return {i.instance_id: i for i in self.instances}


def _instance_dict(inst: CitationInstance) -> dict:
    return {
        "instance_id": inst.instance_id,
        "citing": asdict(inst.citing),
        "paragraph_text": inst.paragraph_text,
        "paragraph_markup": inst.paragraph_markup,
        "citations": [
            {"cited": asdict(c.cited), "mark": c.mark, "position": c.position}
            for c in inst.citations
        ],
        "section_title": inst.section_title,
        "categorical_intent": inst.categorical_intent,
    }


def _instance_from_dict(d: dict) -> CitationInstance:
    return CitationInstance(
        instance_id=d["instance_id"],
        citing=PaperRecord(**d["citing"]),
        paragraph_text=d["paragraph_text"],
        paragraph_markup=d["paragraph_markup"],
        citations=[
            CitedRef(cited=PaperRecord(**c["cited"]), mark=c["mark"], position=c["position"])
            for c in d["citations"]
        ],
        section_title=d["section_title"],
        categorical_intent=d.get("categorical_intent"),
    )

import shutil
from pathlib import Path

import pytest

from citegen.corpus.ingest import ingest_corpus, make_config
from citegen.corpus.types import CitationInstance, CitedRef, ExampleSentence, PaperRecord
from citegen.pipeline import RunConfig

FIXTURES = Path(__file__).parent / "fixtures"
GOLDENS = Path(__file__).parent / "goldens"
CORPUS_SMALL = FIXTURES / "corpus_small.jsonl"


@pytest.fixture(scope="session")
def corpus_path() -> Path:
    return CORPUS_SMALL


@pytest.fixture(scope="session")
def bundle():
    return ingest_corpus(CORPUS_SMALL, make_config())


def make_instance(
    instance_id="inst@0",
    citing_id="P1",
    citing_abstract="CITING-ABSTRACT-TEXT",
    cited_id="C1",
    cited_abstract="CITED-ABSTRACT-TEXT",
    mark="(Varga, 2015)",
    paragraph=None,
    section_title="related work",
    categorical_intent=None,
) -> CitationInstance:
    if paragraph is None:
        body = " ".join(f"word{i}" for i in range(45))
        paragraph = f"{mark} proposed a strong baseline. {body}."
    return CitationInstance(
        instance_id=instance_id,
        citing=PaperRecord(citing_id, f"title of {citing_id}", citing_abstract),
        paragraph_text=paragraph.replace(mark, mark),
        paragraph_markup=paragraph,
        citations=[
            CitedRef(PaperRecord(cited_id, f"title of {cited_id}", cited_abstract), mark, paragraph.find(mark))
        ],
        section_title=section_title,
        categorical_intent=categorical_intent,
    )


def make_example(sentence="EXAMPLE-SENTENCE [REF#1] TEXT", cited_id="C1", source_citing="P9"):
    return ExampleSentence(
        example_id=f"{cited_id}#0",
        sentence=sentence,
        source_paragraph="source paragraph",
        cited_paper_id=cited_id,
        mark="[REF#1]",
        source_citing_paper_id=source_citing,
    )


@pytest.fixture
def run_config(tmp_path) -> RunConfig:
    """A stub-backed run over the committed fixture corpus."""
    workdir = tmp_path / "run"
    return RunConfig(
        corpus=str(CORPUS_SMALL),
        workdir=str(workdir),
        templates=[1, 2],
        component_sets=["+A", "+A+IF+E"],
        parallelism=2,
        resamples=500,
        seed=0,
    )


@pytest.fixture
def canned_backend_file(tmp_path) -> Path:
    path = tmp_path / "canned.txt"
    path.write_text(
        "The approach of [REF#1] refines structured parsing with a scalable joint model.\n",
        encoding="utf-8",
    )
    return path


def copy_fixture_corpus(dest_dir: Path) -> Path:
    dest = dest_dir / "corpus_small.jsonl"
    shutil.copy(CORPUS_SMALL, dest)
    return dest

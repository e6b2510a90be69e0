from .facts import AtomicFact, extract_facts, parse_fact_lines, fact_extraction_prompt
from .tasks import PyramidTask, build_tasks, TaskBundle
from .store import JudgmentStore, CompositionStore
from .coverage import coverage, candidate_coverage, human_metric_correlation
from .service import create_app

__all__ = [
    "AtomicFact",
    "extract_facts",
    "parse_fact_lines",
    "fact_extraction_prompt",
    "PyramidTask",
    "build_tasks",
    "TaskBundle",
    "JudgmentStore",
    "CompositionStore",
    "coverage",
    "candidate_coverage",
    "human_metric_correlation",
    "create_app",
]

"""Pyramid task assembly: blinding and per-task randomization.

Each task shows the gold paragraph, its curated facts, and the candidate
generations under neutral blind labels ("a", "b", ...). The label-to-
generation mapping is sealed in a server-side table that no annotator-facing
payload ever includes. Presentation order comes from a per-task RNG seeded
from the study seed and the instance id, so any audit can reproduce it.
"""

import hashlib
import random
import string
from dataclasses import asdict, dataclass, field

from ..errors import ValidationError
from .facts import STATUS_CURATED, AtomicFact


@dataclass
class Candidate:
    blind_label: str
    text: str


@dataclass
class PyramidTask:
    task_id: str
    instance_id: str
    gold_text: str
    facts: list[AtomicFact]
    candidates: list[Candidate]
    rng_seed: int

    def to_public_dict(self) -> dict:
        """The annotator-visible shape; contains no sealed identifiers."""
        return {
            "task_id": self.task_id,
            "gold_text": self.gold_text,
            "facts": [{"fact_id": f.fact_id, "text": f.text} for f in self.facts],
            "candidates": [{"blind_label": c.blind_label, "text": c.text} for c in self.candidates],
        }

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "instance_id": self.instance_id,
            "gold_text": self.gold_text,
            "facts": [f.to_dict() for f in self.facts],
            "candidates": [asdict(c) for c in self.candidates],
            "rng_seed": self.rng_seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PyramidTask":
        return cls(
            task_id=d["task_id"],
            instance_id=d["instance_id"],
            gold_text=d["gold_text"],
            facts=[AtomicFact(**f) for f in d["facts"]],
            candidates=[Candidate(**c) for c in d["candidates"]],
            rng_seed=d["rng_seed"],
        )


@dataclass
class TaskBundle:
    tasks: list[PyramidTask]
    # sealed: task_id -> blind_label -> {backend_id, config, generation_key}
    unblinding: dict[str, dict[str, dict]] = field(default_factory=dict)
    excluded: list[dict] = field(default_factory=list)


def _task_seed(seed: int, instance_id: str) -> int:
    digest = hashlib.sha256(f"{seed}:{instance_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def build_tasks(
    instances: list,
    candidates_by_instance: dict[str, list[dict]],
    facts_by_instance: dict[str, list[AtomicFact]],
    seed: int,
) -> TaskBundle:
    """Assemble blinded tasks for a sample of instances.

    candidates_by_instance values are dicts with keys text, backend_id,
    config, generation_key. Instances without curated facts or with fewer
    than two candidates are excluded and reported, not silently dropped.
    """
    bundle = TaskBundle(tasks=[])
    for inst in instances:
        curated = [
            f for f in facts_by_instance.get(inst.instance_id, []) if f.status == STATUS_CURATED
        ]
        cands = candidates_by_instance.get(inst.instance_id, [])
        if not curated:
            bundle.excluded.append({"instance_id": inst.instance_id, "reason": "no curated facts"})
            continue
        if len(cands) < 2:
            bundle.excluded.append(
                {"instance_id": inst.instance_id, "reason": "fewer than 2 candidates"}
            )
            continue
        if len(cands) > len(string.ascii_lowercase):
            raise ValidationError(f"{inst.instance_id}: too many candidates to label")

        task_seed = _task_seed(seed, inst.instance_id)
        order = list(range(len(cands)))
        random.Random(task_seed).shuffle(order)

        task_id = f"task-{inst.instance_id}"
        candidates = []
        sealed: dict[str, dict] = {}
        for slot, idx in enumerate(order):
            label = string.ascii_lowercase[slot]
            cand = cands[idx]
            candidates.append(Candidate(blind_label=label, text=cand["text"]))
            sealed[label] = {
                "backend_id": cand["backend_id"],
                "config": cand["config"],
                "generation_key": cand.get("generation_key", ""),
            }
        bundle.tasks.append(
            PyramidTask(
                task_id=task_id,
                instance_id=inst.instance_id,
                gold_text=inst.gold_reference(),
                facts=curated,
                candidates=candidates,
                rng_seed=task_seed,
            )
        )
        bundle.unblinding[task_id] = sealed
    return bundle

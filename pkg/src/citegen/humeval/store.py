"""Append-only stores for judgments and composed paragraphs.

Resubmission never rewrites history: it appends a new version and
aggregation uses the latest version per (task, annotator).
"""

import json
import threading
from pathlib import Path

from ..artifacts import compact_dumps, now_iso
from ..errors import ValidationError


class JudgmentStore:
    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()

    def _load_all(self) -> list[dict]:
        if not self.path.exists():
            return []
        out = []
        with self.path.open(encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    out.append(json.loads(line))
        return out

    def submit(
        self,
        task: dict,
        annotator_id: str,
        grid: dict[str, dict[str, bool]],
        partial: bool = False,
    ) -> dict:
        """Validate a judgment grid against the task and append it.

        Without the partial flag the grid must cover every (candidate, fact)
        cell exactly.
        """
        labels = {c["blind_label"] for c in task["candidates"]}
        fact_ids = {f["fact_id"] for f in task["facts"]}
        got_labels = set(grid)
        if not partial:
            if got_labels != labels:
                raise ValidationError(
                    f"grid candidates {sorted(got_labels)} != task candidates {sorted(labels)}"
                )
            for label, cells in grid.items():
                if set(cells) != fact_ids:
                    raise ValidationError(
                        f"candidate {label!r}: judged facts do not cover the task's facts"
                    )
        else:
            if not got_labels <= labels:
                raise ValidationError("grid names unknown candidates")
            for cells in grid.values():
                if not set(cells) <= fact_ids:
                    raise ValidationError("grid names unknown facts")
        for label, cells in grid.items():
            for fact_id, covered in cells.items():
                if not isinstance(covered, bool):
                    raise ValidationError(f"({label}, {fact_id}): coverage must be boolean")

        with self._lock:
            prior = [
                j
                for j in self._load_all()
                if j["task_id"] == task["task_id"] and j["annotator_id"] == annotator_id
            ]
            record = {
                "task_id": task["task_id"],
                "annotator_id": annotator_id,
                "grid": grid,
                "partial": partial,
                "version": len(prior) + 1,
                "submitted_at": now_iso(),
            }
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(compact_dumps(record) + "\n")
        return record

    def latest(self) -> list[dict]:
        """Latest version per (task, annotator)."""
        best: dict[tuple[str, str], dict] = {}
        for j in self._load_all():
            key = (j["task_id"], j["annotator_id"])
            if key not in best or j["version"] > best[key]["version"]:
                best[key] = j
        return [best[k] for k in sorted(best)]

    def all_versions(self) -> list[dict]:
        return self._load_all()


class CompositionStore:
    """Human-written paragraphs from the composition flow, condition-tagged."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()

    def _load_all(self) -> list[dict]:
        if not self.path.exists():
            return []
        with self.path.open(encoding="utf-8") as fh:
            return [json.loads(line) for line in fh if line.strip()]

    def submitted_conditions(self, compose_id: str, annotator_id: str) -> list[str]:
        return [
            c["condition"]
            for c in self._load_all()
            if c["compose_id"] == compose_id and c["annotator_id"] == annotator_id
        ]

    def submit(self, compose_id: str, instance_id: str, annotator_id: str, condition: str, text: str) -> dict:
        if not text.strip():
            raise ValidationError("empty composition submission")
        with self._lock:
            record = {
                "compose_id": compose_id,
                "instance_id": instance_id,
                "annotator_id": annotator_id,
                "condition": condition,
                "text": text.strip(),
                "submitted_at": now_iso(),
            }
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(compact_dumps(record) + "\n")
        return record

    def all(self) -> list[dict]:
        return self._load_all()

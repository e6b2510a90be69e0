"""HTTP service behind the annotation UI.

Annotator-facing payloads are blinded: candidate generations appear under
neutral labels, and nothing in any response names a model, a configuration,
or a generation key. The label mapping lives in a sealed server-side table
used only by the admin coverage endpoint.

Study lifecycle: a built study starts with extracted facts and a sealed
candidate assignment per instance. Curation (accept / edit / reject / add)
runs first; finalizing curation builds the pyramid tasks; judging is only
possible after that. The composition flow is independent and staged: the
abstracts-only screen first, the full-components screen second, and the
gold paragraph is never exposed.
"""

import json
import threading
from pathlib import Path

from fastapi import Depends, FastAPI, Header, HTTPException
from pydantic import BaseModel

from ..artifacts import atomic_write_text, stable_dumps
from ..errors import ValidationError
from .facts import STATUS_CURATED, STATUS_EXTRACTED, STATUS_REJECTED, AtomicFact
from .store import CompositionStore, JudgmentStore
from .tasks import build_tasks
from .coverage import candidate_coverage, coverage


class _Instance:
    """Minimal stand-in with the fields build_tasks needs."""

    def __init__(self, instance_id: str, gold_text: str):
        self.instance_id = instance_id
        self._gold = gold_text

    def gold_reference(self) -> str:
        return self._gold


class Study:
    def __init__(self, study_dir: str | Path):
        self.dir = Path(study_dir)
        self._lock = threading.Lock()
        self.judgments = JudgmentStore(self.dir / "judgments.jsonl")
        self.compositions = CompositionStore(self.dir / "compositions.jsonl")

    # --- file-backed state ---

    def _read(self, name: str) -> dict:
        path = self.dir / name
        if not path.exists():
            raise ValidationError(f"study file missing: {path}")
        return json.loads(path.read_text(encoding="utf-8"))

    def _write(self, name: str, doc: dict) -> None:
        atomic_write_text(self.dir / name, stable_dumps(doc) + "\n")

    def annotator_for(self, token: str) -> str | None:
        return self._read("annotators.json")["tokens"].get(token)

    def is_admin(self, token: str) -> bool:
        return token == self._read("annotators.json").get("admin_token")

    def facts_doc(self) -> dict:
        return self._read("facts.json")

    def seed(self) -> int:
        return int(self._read("study.json").get("seed", 0))

    def tasks(self) -> list[dict]:
        path = self.dir / "tasks.json"
        if not path.exists():
            return []
        return json.loads(path.read_text(encoding="utf-8"))["tasks"]

    def unblinding(self) -> dict:
        return self._read("unblinding.json")["unblinding"]

    def finalized(self) -> bool:
        return (self.dir / "tasks.json").exists()

    # --- curation ---

    def curate(self, action: str, fact_id: str | None, text: str | None, instance_id: str | None):
        with self._lock:
            doc = self.facts_doc()
            if self.finalized() and action != "noop":
                raise ValidationError("curation is finalized; tasks are already built")
            facts = doc["facts"]
            if action == "add":
                if not instance_id or not (text or "").strip():
                    raise ValidationError("add requires instance_id and text")
                ordinal = sum(1 for f in facts if f["instance_id"] == instance_id)
                facts.append(
                    {
                        "fact_id": f"{instance_id}#m{ordinal}",
                        "instance_id": instance_id,
                        "text": text.strip(),
                        "status": STATUS_CURATED,
                    }
                )
            else:
                fact = next((f for f in facts if f["fact_id"] == fact_id), None)
                if fact is None:
                    raise ValidationError(f"unknown fact {fact_id!r}")
                if action == "accept":
                    fact["status"] = STATUS_CURATED
                elif action == "reject":
                    fact["status"] = STATUS_REJECTED
                elif action == "edit":
                    if not (text or "").strip():
                        raise ValidationError("edit requires text")
                    fact["text"] = text.strip()
                    fact["status"] = STATUS_CURATED
                else:
                    raise ValidationError(f"unknown curation action {action!r}")
            self._write("facts.json", doc)

    def finalize_curation(self) -> dict:
        """Build blinded tasks from curated facts and the sealed assignment."""
        with self._lock:
            if self.finalized():
                raise ValidationError("curation already finalized")
            study = self._read("study.json")
            facts_doc = self.facts_doc()
            facts_by_instance: dict[str, list[AtomicFact]] = {}
            for f in facts_doc["facts"]:
                facts_by_instance.setdefault(f["instance_id"], []).append(AtomicFact(**f))
            instances = [
                _Instance(i["instance_id"], i["gold_text"]) for i in study["instances"]
            ]
            bundle = build_tasks(
                instances,
                study["candidates_by_instance"],
                facts_by_instance,
                seed=self.seed(),
            )
            self._write("unblinding.json", {"unblinding": bundle.unblinding})
            self._write(
                "tasks.json",
                {"tasks": [t.to_dict() for t in bundle.tasks], "excluded": bundle.excluded},
            )
            return {"tasks": len(bundle.tasks), "excluded": bundle.excluded}


class CurationAction(BaseModel):
    action: str
    fact_id: str | None = None
    text: str | None = None
    instance_id: str | None = None


class JudgmentBody(BaseModel):
    grid: dict[str, dict[str, bool]]
    partial: bool = False


class CompositionBody(BaseModel):
    text: str


def create_app(study_dir: str | Path) -> FastAPI:
    study = Study(study_dir)
    app = FastAPI(title="pyramid evaluation service")

    def annotator(x_annotator_token: str = Header(default="")) -> str:
        aid = study.annotator_for(x_annotator_token)
        if aid is None:
            raise HTTPException(status_code=401, detail="unknown annotator token")
        return aid

    def admin(x_admin_token: str = Header(default="")) -> bool:
        if not study.is_admin(x_admin_token):
            raise HTTPException(status_code=401, detail="admin token required")
        return True

    @app.get("/api/tasks")
    def list_tasks(aid: str = Depends(annotator)):
        judged = {
            j["task_id"] for j in study.judgments.latest() if j["annotator_id"] == aid
        }
        tasks = study.tasks()
        return {
            "stage": "judge" if study.finalized() else "curate",
            "tasks": [
                {
                    "task_id": t["task_id"],
                    "candidates": len(t["candidates"]),
                    "facts": len(t["facts"]),
                    "done": t["task_id"] in judged,
                }
                for t in tasks
            ],
        }

    @app.get("/api/tasks/{task_id}")
    def get_task(task_id: str, aid: str = Depends(annotator)):
        task = next((t for t in study.tasks() if t["task_id"] == task_id), None)
        if task is None:
            raise HTTPException(status_code=404, detail="unknown task")
        judged = {
            j["task_id"] for j in study.judgments.latest() if j["annotator_id"] == aid
        }
        return {
            "task_id": task["task_id"],
            "gold_text": task["gold_text"],
            "facts": [{"fact_id": f["fact_id"], "text": f["text"]} for f in task["facts"]],
            "candidates": [
                {"blind_label": c["blind_label"], "text": c["text"]} for c in task["candidates"]
            ],
            "done": task["task_id"] in judged,
        }

    @app.post("/api/tasks/{task_id}/judgment")
    def submit_judgment(task_id: str, body: JudgmentBody, aid: str = Depends(annotator)):
        task = next((t for t in study.tasks() if t["task_id"] == task_id), None)
        if task is None:
            raise HTTPException(status_code=404, detail="unknown task")
        try:
            record = study.judgments.submit(task, aid, body.grid, partial=body.partial)
        except ValidationError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return {"task_id": task_id, "version": record["version"], "status": "stored"}

    @app.get("/api/facts/queue")
    def facts_queue(aid: str = Depends(annotator)):
        doc = study.facts_doc()
        return {
            "finalized": study.finalized(),
            "facts": [
                {
                    "fact_id": f["fact_id"],
                    "instance_id": f["instance_id"],
                    "text": f["text"],
                    "status": f["status"],
                }
                for f in doc["facts"]
            ],
            "raw": doc.get("raw", {}),
            "flagged": doc.get("flagged", []),
        }

    @app.post("/api/facts/queue")
    def facts_curate(body: CurationAction, aid: str = Depends(annotator)):
        try:
            if body.action == "finalize":
                return study.finalize_curation()
            study.curate(body.action, body.fact_id, body.text, body.instance_id)
        except ValidationError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return {"status": "ok"}

    @app.get("/api/compose")
    def compose_index(aid: str = Depends(annotator)):
        doc = study._read("study.json")
        out = []
        for ct in doc.get("compose_tasks", []):
            done = len(study.compositions.submitted_conditions(ct["compose_id"], aid))
            out.append(
                {
                    "compose_id": ct["compose_id"],
                    "stages_done": done,
                    "total_stages": len(ct["stages"]),
                }
            )
        return {"compose_tasks": out}

    @app.get("/api/compose/{compose_id}")
    def compose_view(compose_id: str, aid: str = Depends(annotator)):
        doc = study._read("study.json")
        ct = next((c for c in doc.get("compose_tasks", []) if c["compose_id"] == compose_id), None)
        if ct is None:
            raise HTTPException(status_code=404, detail="unknown composition task")
        done = len(study.compositions.submitted_conditions(compose_id, aid))
        if done >= len(ct["stages"]):
            return {
                "compose_id": compose_id,
                "stage": done,
                "total_stages": len(ct["stages"]),
                "done": True,
            }
        stage = ct["stages"][done]
        # staged reveal: only the current stage's input components go out
        return {
            "compose_id": compose_id,
            "stage": done + 1,
            "total_stages": len(ct["stages"]),
            "done": False,
            "components": stage["components"],
        }

    @app.post("/api/compose/{compose_id}")
    def compose_submit(compose_id: str, body: CompositionBody, aid: str = Depends(annotator)):
        doc = study._read("study.json")
        ct = next((c for c in doc.get("compose_tasks", []) if c["compose_id"] == compose_id), None)
        if ct is None:
            raise HTTPException(status_code=404, detail="unknown composition task")
        done = len(study.compositions.submitted_conditions(compose_id, aid))
        if done >= len(ct["stages"]):
            raise HTTPException(status_code=409, detail="all stages already submitted")
        condition = ct["stages"][done]["condition"]
        try:
            study.compositions.submit(compose_id, ct["instance_id"], aid, condition, body.text)
        except ValidationError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return {"compose_id": compose_id, "stage_submitted": done + 1, "status": "stored"}

    @app.get("/api/progress")
    def progress(aid: str = Depends(annotator)):
        facts = study.facts_doc()["facts"]
        tasks = study.tasks()
        judged = {j["task_id"] for j in study.judgments.latest() if j["annotator_id"] == aid}
        return {
            "facts": {
                "total": len(facts),
                "curated": sum(1 for f in facts if f["status"] == STATUS_CURATED),
                "pending": sum(1 for f in facts if f["status"] == STATUS_EXTRACTED),
            },
            "tasks": {"total": len(tasks), "done": len(judged)},
            "compositions": len(
                [c for c in study.compositions.all() if c["annotator_id"] == aid]
            ),
        }

    @app.get("/api/admin/coverage")
    def admin_coverage(_: bool = Depends(admin), partial: bool = False):
        tasks = study.tasks()
        judgments = study.judgments.latest()
        try:
            per_candidate = candidate_coverage(
                tasks, judgments, study.unblinding(), allow_partial=partial
            )
            grouped = coverage(tasks, judgments, study.unblinding(), allow_partial=partial)
        except ValidationError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return {
            "per_candidate": per_candidate,
            "per_system": [
                {"backend_id": b, "config": c, "coverage": v} for (b, c), v in grouped.items()
            ],
        }

    return app

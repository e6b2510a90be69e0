"""Pyramid evaluation: facts, blinded tasks, judgments, coverage, service."""

import json

import pytest
from fastapi.testclient import TestClient

from citegen.errors import ValidationError
from citegen.humeval import (
    JudgmentStore,
    build_tasks,
    candidate_coverage,
    coverage,
    create_app,
    human_metric_correlation,
    parse_fact_lines,
)
from citegen.humeval.facts import AtomicFact, STATUS_CURATED
from citegen.metrics import MeasurementVector

from conftest import make_instance


def curated_fact(instance_id, k, text=None):
    return AtomicFact(
        fact_id=f"{instance_id}#f{k}",
        instance_id=instance_id,
        text=text or f"Fact number {k}.",
        status=STATUS_CURATED,
    )


def two_candidates(instance_id):
    return [
        {
            "text": f"Candidate one for {instance_id} [REF#1].",
            "backend_id": "stub",
            "config": "6+A",
            "generation_key": f"key-{instance_id}-a",
        },
        {
            "text": f"Candidate two for {instance_id} [REF#1].",
            "backend_id": "stub",
            "config": "6+A+IF+E",
            "generation_key": f"key-{instance_id}-b",
        },
    ]


class TestParseFactLines:
    def test_bullets_and_numbering_stripped(self):
        response = "- Result: BERT achieves better F1 score.\n2) Second fact\n  * Third fact"
        assert parse_fact_lines(response) == [
            "Result: BERT achieves better F1 score.",
            "Second fact",
            "Third fact",
        ]

    def test_duplicates_removed_case_insensitively(self):
        response = "Fact one\nfact one\nFACT ONE\nFact two"
        assert parse_fact_lines(response) == ["Fact one", "Fact two"]

    def test_empty_response(self):
        assert parse_fact_lines("") == []
        assert parse_fact_lines("\n \n") == []


class TestBuildTasks:
    def _instances(self, n=30):
        return [
            make_instance(f"P{k:03d}@{k}", citing_id=f"P{k:03d}") for k in range(n)
        ]

    def _inputs(self, instances, n_candidates=4):
        cands = {}
        facts = {}
        for inst in instances:
            base = two_candidates(inst.instance_id)
            extra = [
                {
                    "text": f"Candidate {j} for {inst.instance_id}.",
                    "backend_id": "other",
                    "config": f"{j}+A",
                    "generation_key": f"key-{inst.instance_id}-{j}",
                }
                for j in range(3, n_candidates + 1)
            ]
            cands[inst.instance_id] = base + extra
            facts[inst.instance_id] = [curated_fact(inst.instance_id, k) for k in range(3)]
        return cands, facts

    def test_thirty_instances_four_blind_labels(self):
        instances = self._instances(30)
        cands, facts = self._inputs(instances, n_candidates=4)
        bundle = build_tasks(instances, cands, facts, seed=7)
        assert len(bundle.tasks) == 30
        for task in bundle.tasks:
            assert [c.blind_label for c in task.candidates] == ["a", "b", "c", "d"]
            assert set(bundle.unblinding[task.task_id]) == {"a", "b", "c", "d"}

    def test_same_seed_same_permutations(self):
        instances = self._instances(10)
        cands, facts = self._inputs(instances)
        b1 = build_tasks(instances, cands, facts, seed=7)
        b2 = build_tasks(instances, cands, facts, seed=7)
        texts = lambda b: [[c.text for c in t.candidates] for t in b.tasks]
        assert texts(b1) == texts(b2)
        assert b1.unblinding == b2.unblinding

    def test_seed_plus_one_changes_some_permutation(self):
        instances = self._instances(30)
        cands, facts = self._inputs(instances)
        b1 = build_tasks(instances, cands, facts, seed=7)
        b2 = build_tasks(instances, cands, facts, seed=8)
        texts = lambda b: [[c.text for c in t.candidates] for t in b.tasks]
        assert texts(b1) != texts(b2)

    def test_excludes_without_curated_facts_or_candidates(self):
        instances = self._instances(3)
        cands, facts = self._inputs(instances)
        facts[instances[0].instance_id] = []
        cands[instances[1].instance_id] = cands[instances[1].instance_id][:1]
        bundle = build_tasks(instances, cands, facts, seed=1)
        assert len(bundle.tasks) == 1
        reasons = {e["instance_id"]: e["reason"] for e in bundle.excluded}
        assert "no curated facts" in reasons[instances[0].instance_id]
        assert "fewer than 2 candidates" in reasons[instances[1].instance_id]

    def test_public_dict_is_blinded(self):
        instances = self._instances(2)
        cands, facts = self._inputs(instances)
        bundle = build_tasks(instances, cands, facts, seed=3)
        payload = json.dumps([t.to_public_dict() for t in bundle.tasks])
        assert "config" not in payload
        assert "backend" not in payload
        assert "generation_key" not in payload


class TestJudgmentStore:
    def _task(self):
        return {
            "task_id": "task-1",
            "instance_id": "i1",
            "facts": [{"fact_id": f"f{k}", "text": f"fact {k}"} for k in range(3)],
            "candidates": [{"blind_label": "a", "text": "ta"}, {"blind_label": "b", "text": "tb"}],
        }

    def _grid(self, fill=True):
        return {
            label: {f"f{k}": fill for k in range(3)} for label in ("a", "b")
        }

    def test_complete_grid_required(self, tmp_path):
        store = JudgmentStore(tmp_path / "j.jsonl")
        incomplete = self._grid()
        del incomplete["a"]["f2"]
        with pytest.raises(ValidationError):
            store.submit(self._task(), "ann1", incomplete)
        store.submit(self._task(), "ann1", self._grid())

    def test_append_only_latest_wins(self, tmp_path):
        store = JudgmentStore(tmp_path / "j.jsonl")
        store.submit(self._task(), "ann1", self._grid(fill=True))
        store.submit(self._task(), "ann1", self._grid(fill=False))
        assert len(store.all_versions()) == 2
        latest = store.latest()
        assert len(latest) == 1
        assert latest[0]["version"] == 2
        assert latest[0]["grid"]["a"]["f0"] is False

    def test_partial_flag_permits_gaps(self, tmp_path):
        store = JudgmentStore(tmp_path / "j.jsonl")
        store.submit(self._task(), "ann1", {"a": {"f0": True}}, partial=True)


class TestCoverage:
    def _setup(self):
        instances = [make_instance(f"P{k:02d}@{k}", citing_id=f"P{k:02d}") for k in range(30)]
        cands = {i.instance_id: two_candidates(i.instance_id) for i in instances}
        facts = {
            i.instance_id: [curated_fact(i.instance_id, k) for k in range(3)] for i in instances
        }
        bundle = build_tasks(instances, cands, facts, seed=13)
        return bundle

    def _judge_all(self, bundle, covered_for_config):
        """Judge every task: per blind label, cover facts per its sealed config."""
        judgments = []
        for task in bundle.tasks:
            grid = {}
            for cand in task.candidates:
                cfg = bundle.unblinding[task.task_id][cand.blind_label]["config"]
                n_cover = covered_for_config[cfg]
                grid[cand.blind_label] = {
                    f.fact_id: (idx < n_cover) for idx, f in enumerate(task.facts)
                }
            judgments.append(
                {"task_id": task.task_id, "annotator_id": "ann1", "grid": grid, "version": 1}
            )
        return judgments

    def test_two_of_three_facts_covered(self):
        bundle = self._setup()
        judgments = self._judge_all(bundle, {"6+A": 2, "6+A+IF+E": 3})
        tasks = [t.to_dict() for t in bundle.tasks]
        grouped = coverage(tasks, judgments, bundle.unblinding)
        assert grouped[("stub", "6+A")] == pytest.approx(2 / 3, abs=1e-9)
        assert grouped[("stub", "6+A+IF+E")] == pytest.approx(1.0)

    def test_unblinding_conservation(self):
        # blinded coverage totals equal unblinded totals across the join
        bundle = self._setup()
        judgments = self._judge_all(bundle, {"6+A": 1, "6+A+IF+E": 2})
        tasks = [t.to_dict() for t in bundle.tasks]
        per_candidate = candidate_coverage(tasks, judgments, bundle.unblinding)
        assert len(per_candidate) == 60  # 30 tasks x 2 candidates
        blinded_total = 0.0
        for j in judgments:
            task = next(t for t in tasks if t["task_id"] == j["task_id"])
            for cells in j["grid"].values():
                blinded_total += sum(cells.values()) / len(task["facts"])
        unblinded_total = sum(row["coverage"] for row in per_candidate)
        assert unblinded_total == pytest.approx(blinded_total, abs=1e-9)

    def test_incomplete_judgments_need_partial_flag(self):
        bundle = self._setup()
        judgments = self._judge_all(bundle, {"6+A": 1, "6+A+IF+E": 2})[:-1]
        tasks = [t.to_dict() for t in bundle.tasks]
        with pytest.raises(ValidationError):
            coverage(tasks, judgments, bundle.unblinding)
        grouped = coverage(tasks, judgments, bundle.unblinding, allow_partial=True)
        assert set(grouped) == {("stub", "6+A"), ("stub", "6+A+IF+E")}

    def test_multi_annotator_averaging_per_task_first(self):
        bundle = self._setup()
        j1 = self._judge_all(bundle, {"6+A": 3, "6+A+IF+E": 3})
        j2 = self._judge_all(bundle, {"6+A": 0, "6+A+IF+E": 3})
        for j in j2:
            j["annotator_id"] = "ann2"
        tasks = [t.to_dict() for t in bundle.tasks]
        grouped = coverage(tasks, j1 + j2, bundle.unblinding)
        assert grouped[("stub", "6+A")] == pytest.approx(0.5)

    def test_coverage_in_unit_interval(self):
        bundle = self._setup()
        judgments = self._judge_all(bundle, {"6+A": 2, "6+A+IF+E": 1})
        grouped = coverage([t.to_dict() for t in bundle.tasks], judgments, bundle.unblinding)
        assert all(0.0 <= v <= 1.0 for v in grouped.values())


class TestHumanMetricCorrelation:
    def test_exact_match_gives_r_one(self):
        per_candidate = []
        vectors = []
        for k in range(12):
            value = k / 11
            per_candidate.append(
                {
                    "task_id": f"t{k}",
                    "instance_id": f"i{k}",
                    "blind_label": "a",
                    "backend_id": "stub",
                    "config": "6+A",
                    "coverage": value,
                    "annotators": 1,
                }
            )
            vectors.append(
                MeasurementVector(
                    instance_id=f"i{k}",
                    config="6+A",
                    backend_id="stub",
                    ng1=0.1,
                    ng2=0.1,
                    ng3=0.1,
                    word_count=50,
                    paragraph_count=1,
                    citation_mark_used=True,
                    rouge_l=0.5,
                    bleurt=value,
                )
            )
        rows = {r["metric"]: r for r in human_metric_correlation(per_candidate, vectors)}
        assert rows["BLEURT"]["r"] == pytest.approx(1.0)
        assert rows["BLEURT"]["p_value"] < 1e-6
        assert rows["BERTScore"]["r"] is None  # unavailable -> explicit null

    def test_constant_coverage_reports_null(self):
        per_candidate = [
            {
                "task_id": f"t{k}",
                "instance_id": f"i{k}",
                "blind_label": "a",
                "backend_id": "stub",
                "config": "6+A",
                "coverage": 0.5,
                "annotators": 1,
            }
            for k in range(5)
        ]
        vectors = [
            MeasurementVector(
                instance_id=f"i{k}",
                config="6+A",
                backend_id="stub",
                ng1=0.1,
                ng2=0.1,
                ng3=0.1,
                word_count=50,
                paragraph_count=1,
                citation_mark_used=True,
                rouge_l=k / 5,
            )
            for k in range(5)
        ]
        rows = {r["metric"]: r for r in human_metric_correlation(per_candidate, vectors)}
        assert rows["ROUGE-L"]["r"] is None

"""Fact-coverage aggregation and the human-metric correlation table."""

from collections import defaultdict

from ..analysis.correlation import pearson_r_p
from ..errors import ValidationError
from ..metrics import MeasurementVector

_METRIC_ATTR = {
    "ROUGE-L": "rouge_l",
    "BERTScore": "bertscore",
    "SciBERTScore": "scibertscore",
    "BLEURT": "bleurt",
    "TRUE": "true_score",
    "SummaC": "summac",
}


def candidate_coverage(
    tasks: list[dict],
    judgments: list[dict],
    unblinding: dict[str, dict[str, dict]],
    allow_partial: bool = False,
) -> list[dict]:
    """Unblinded per-candidate coverage ratios.

    Per (task, blind label): covered facts / total facts, averaged over the
    task's annotators first. Requires every task to be fully judged unless
    allow_partial is set.
    """
    tasks_by_id = {t["task_id"]: t for t in tasks}
    grids: dict[tuple[str, str], list[dict]] = defaultdict(list)
    for j in judgments:
        grids[(j["task_id"], j["annotator_id"])].append(j)

    judged_tasks = {t for t, _ in grids}
    missing = sorted(set(tasks_by_id) - judged_tasks)
    if missing and not allow_partial:
        raise ValidationError(f"{len(missing)} tasks lack judgments: {missing[:5]}")

    out = []
    for task_id, task in tasks_by_id.items():
        annotator_ratios: dict[str, list[float]] = defaultdict(list)
        n_facts = len(task["facts"])
        if n_facts == 0:
            continue
        for (tid, annotator), versions in grids.items():
            if tid != task_id:
                continue
            latest = max(versions, key=lambda j: j["version"])
            for label, cells in latest["grid"].items():
                covered = sum(1 for v in cells.values() if v)
                annotator_ratios[label].append(covered / n_facts)
        sealed = unblinding.get(task_id, {})
        for label, ratios in sorted(annotator_ratios.items()):
            identity = sealed.get(label)
            if identity is None:
                raise ValidationError(f"task {task_id}: no unblinding entry for {label!r}")
            out.append(
                {
                    "task_id": task_id,
                    "instance_id": task["instance_id"],
                    "blind_label": label,
                    "backend_id": identity["backend_id"],
                    "config": identity["config"],
                    "coverage": sum(ratios) / len(ratios),
                    "annotators": len(ratios),
                }
            )
    return out


def coverage(
    tasks: list[dict],
    judgments: list[dict],
    unblinding: dict[str, dict[str, dict]],
    allow_partial: bool = False,
) -> dict[tuple[str, str], float]:
    """Mean fact-coverage ratio per (backend, config) after unblinding."""
    per_candidate = candidate_coverage(tasks, judgments, unblinding, allow_partial)
    groups: dict[tuple[str, str], list[float]] = defaultdict(list)
    for row in per_candidate:
        groups[(row["backend_id"], row["config"])].append(row["coverage"])
    return {key: sum(vals) / len(vals) for key, vals in sorted(groups.items())}


def human_metric_correlation(
    per_candidate: list[dict],
    vectors: list[MeasurementVector],
) -> list[dict]:
    """Pearson r and two-sided p between coverage and each metric.

    Pairing is candidate-level: (backend, config, instance) joins a coverage
    row to its measurement vector. Metrics with constant or unavailable
    series report null correlations explicitly.
    """
    by_key = {(v.backend_id, v.config, v.instance_id): v for v in vectors}
    rows = []
    for metric, attr in _METRIC_ATTR.items():
        cov, val = [], []
        missing = False
        for row in per_candidate:
            v = by_key.get((row["backend_id"], row["config"], row["instance_id"]))
            if v is None:
                continue
            metric_value = getattr(v, attr)
            if metric_value is None:
                missing = True
                break
            cov.append(row["coverage"])
            val.append(float(metric_value))
        if missing or len(cov) < 3:
            rows.append({"metric": metric, "r": None, "p_value": None, "n": len(cov)})
            continue
        r, p = pearson_r_p(val, cov)
        rows.append({"metric": metric, "r": r, "p_value": p, "n": len(cov)})
    return rows

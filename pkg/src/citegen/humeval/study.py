"""Build a pyramid-evaluation study from run artifacts."""

import random

from ..artifacts import atomic_write_text, stable_dumps
from ..errors import ValidationError
from ..corpus import select_single_citation
from .facts import extract_facts
from .service import Study


def build_study(
    cfg,
    study_dir,
    n_instances: int = 30,
    candidate_configs: tuple[str, ...] = ("6+A", "6+A+IF+E"),
    annotators: tuple[str, ...] = ("annotator-1",),
    admin_token: str = "admin-token",
    auto_curate: bool = False,
) -> dict:
    """Sample instances, extract facts, seal candidate assignments, and write
    the study files the annotation service reads.

    Candidates come from the run cache for the chosen configurations.
    auto_curate accepts every extracted fact and finalizes immediately,
    which suits desk-scale runs without a human curation pass.
    """
    from ..pipeline import load_bundle, load_examples, load_intents, load_manifest

    bundle = load_bundle(cfg)
    manifest = load_manifest(cfg)
    cache = cfg.cache()
    by_id = bundle.by_id()

    singles = select_single_citation(bundle.instances)
    eligible = [i for i in singles if i.instance_id in set(manifest.instance_ids)]
    rng = random.Random(cfg.seed)
    if len(eligible) > n_instances:
        sample = rng.sample(eligible, n_instances)
        sample.sort(key=lambda i: i.instance_id)
    else:
        sample = eligible
    if not sample:
        raise ValidationError("no instances available for the study")

    wanted = set(candidate_configs)
    candidates_by_instance: dict[str, list[dict]] = {}
    for cell in manifest.cells:
        if cell["config"] not in wanted or cell["status"] == "failed":
            continue
        record = cache.get(cell["key"])
        if record is None:
            continue
        candidates_by_instance.setdefault(cell["instance_id"], []).append(
            {
                "text": record.output_text,
                "backend_id": manifest.backend_id,
                "config": cell["config"],
                "generation_key": cell["key"],
            }
        )

    facts = []
    raw: dict[str, str] = {}
    flagged: list[str] = []
    backend_spec = cfg.backend_spec()
    for inst in sample:
        extraction = extract_facts(inst, backend_spec, cache)
        raw[inst.instance_id] = extraction.raw_response
        if extraction.flagged_for_manual_split:
            flagged.append(inst.instance_id)
        for f in extraction.facts:
            if auto_curate:
                f.status = "curated"
            facts.append(f.to_dict())

    intents = load_intents(cfg) if _needs(candidate_configs, ("IC", "IF")) else {}
    examples = load_examples(cfg) if _needs(candidate_configs, ("E",)) else {}
    compose_tasks = []
    for inst in sample:
        stages = [
            {
                "condition": "6+A",
                "components": {
                    "main_abstract": inst.citing.abstract,
                    "related_abstract": inst.citations[0].cited.abstract,
                },
            }
        ]
        full = {
            "main_abstract": inst.citing.abstract,
            "related_abstract": inst.citations[0].cited.abstract,
        }
        intent_entry = intents.get("free_form", {}).get(inst.instance_id) if intents else None
        example_entry = examples.get(inst.instance_id) if examples else None
        if intent_entry:
            full["intent"] = intent_entry["text"]
        if example_entry:
            full["example"] = example_entry["example"]["sentence"]
        stages.append({"condition": "6+A+IF+E", "components": full})
        compose_tasks.append(
            {
                "compose_id": f"compose-{inst.instance_id}",
                "instance_id": inst.instance_id,
                "stages": stages,
            }
        )

    study_doc = {
        "seed": cfg.seed,
        "instances": [
            {"instance_id": i.instance_id, "gold_text": i.gold_reference()} for i in sample
        ],
        "candidates_by_instance": candidates_by_instance,
        "compose_tasks": compose_tasks,
    }
    atomic_write_text(study_dir / "study.json", stable_dumps(study_doc) + "\n")
    atomic_write_text(
        study_dir / "facts.json",
        stable_dumps({"facts": facts, "raw": raw, "flagged": flagged}) + "\n",
    )
    atomic_write_text(
        study_dir / "annotators.json",
        stable_dumps(
            {
                "tokens": {f"{name}-token": name for name in annotators},
                "admin_token": admin_token,
            }
        )
        + "\n",
    )

    built = {"instances": len(sample), "facts": len(facts), "auto_curated": auto_curate}
    if auto_curate:
        built["finalize"] = Study(study_dir).finalize_curation()
    return built


def _needs(configs, flags) -> bool:
    return any(any(f"+{flag}" in c for flag in flags) for c in configs)


def compositions_to_vectors(study_dir, cfg):
    """Measure human-composed paragraphs with the same kit as model outputs.

    Returns measurement vectors with backend id "human", config tagged by
    composition condition.
    """
    import json

    from ..metrics import measure
    from ..pipeline import load_bundle

    bundle = load_bundle(cfg)
    by_id = bundle.by_id()
    path = study_dir / "compositions.jsonl"
    if not path.exists():
        return []
    vectors = []
    with path.open(encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            comp = json.loads(line)
            inst = by_id.get(comp["instance_id"])
            if inst is None:
                continue
            vectors.append(
                measure(
                    comp["instance_id"],
                    f"[H] {comp['condition']}",
                    "human",
                    "",  # no prompt text: surface NG columns are not meaningful
                    comp["text"],
                    inst.gold_reference(),
                )
            )
    return vectors

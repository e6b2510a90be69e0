"""Stage implementations behind the CLI.

Each stage reads the artifacts of earlier stages from the working directory,
validates them (naming the missing artifact when a prerequisite was skipped),
and writes its own versioned outputs stamped with the run-config hash.
"""

import dataclasses
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from . import __version__
from .artifacts import (
    atomic_write_text,
    config_hash,
    csv_meta_line,
    read_artifact,
    stable_dumps,
    write_artifact,
)
from .analysis import (
    TABLE_COLUMNS,
    aggregate,
    length_bin_compare,
    paired_bootstrap,
    pearson_matrix,
    winner_census,
)
from .corpus import (
    CorpusBundle,
    JaccardSimilarity,
    ingest_corpus,
    select_example,
    select_single_citation,
)
from .corpus.ingest import load_section_titles_text, make_config
from .corpus.similarity import resolve_similarity
from .errors import IncompleteRunError, MissingArtifactError, ValidationError
from .gateway import BackendSpec, DecodingParams, GenerationCache, run_batch
from .intents import (
    Intent,
    assign_categorical_intent,
    generate_free_form_intent,
    leak_audit,
)
from .metrics import (
    MODEL_METRICS,
    MeasurementVector,
    citation_mark_usage,
    measure,
    measure_baseline,
    paragraph_count,
    word_count,
)
from .promptgen import (
    PromptConfig,
    baseline_text,
    enumerate_run_matrix,
    load_template_dir,
    parse_config,
    render_prompt,
)
from .scorer_client import ScorerClient

log = logging.getLogger(__name__)


@dataclass
class RunConfig:
    """Everything a run needs; fully captured in artifacts for provenance."""

    corpus: str = ""
    workdir: str = "runs/default"
    titles: str | None = None
    min_paragraph_words: int = 40
    min_sentence_words: int = 10
    language_filter: bool = True
    template_dir: str | None = None
    templates: list[int] = field(default_factory=lambda: [1, 2, 3, 4, 5, 6])
    component_sets: list[str] = field(
        default_factory=lambda: ["+A", "+A+E", "+A+IC", "+A+IF", "+A+IC+E", "+A+IF+E"]
    )
    backend: dict = field(
        default_factory=lambda: {
            "backend_id": "stub",
            "endpoint": "stub:echo",
            "model_name": "stub",
            "auth_env": "",
            "wire_dialect": "local_stub",
        }
    )
    decoding: dict = field(
        default_factory=lambda: {
            "strategy": "greedy",
            "max_new_tokens": 1024,
            "temperature": 0.0,
            "seed": None,
        }
    )
    parallelism: int = 4
    rate_limit_per_s: float = 10.0
    log_requests: bool = False
    sidecar: str | None = None
    seed: int = 0
    resamples: int = 10000
    sample_ratio: float = 0.5
    stopwords: str | None = None

    def hash(self) -> str:
        # the output location is not part of the run's identity
        fields = dataclasses.asdict(self)
        fields.pop("workdir")
        return config_hash(fields)

    @property
    def root(self) -> Path:
        return Path(self.workdir)

    def backend_spec(self) -> BackendSpec:
        return BackendSpec(**self.backend)

    def decoding_params(self) -> DecodingParams:
        return DecodingParams(**self.decoding)

    def cache(self) -> GenerationCache:
        return GenerationCache(self.root / "cache" / "generations")

    @classmethod
    def load(cls, path: str | Path | None, overrides: dict | None = None) -> "RunConfig":
        data: dict = {}
        if path is not None:
            raw = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
            if not isinstance(raw, dict):
                raise ValidationError(f"run config {path} must be a mapping")
            data.update(raw)
        for key, value in (overrides or {}).items():
            if value is None:
                continue
            if key in ("backend", "decoding") and isinstance(value, dict):
                merged = dict(data.get(key, {}))
                merged.update({k: v for k, v in value.items() if v is not None})
                data[key] = merged
            else:
                data[key] = value
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown run-config fields: {sorted(unknown)}")
        cfg = cls(**data)
        for key in ("backend", "decoding"):
            defaults = getattr(cls(), key)
            merged = dict(defaults)
            merged.update(getattr(cfg, key) or {})
            bad = set(merged) - set(defaults)
            if bad:
                raise ValidationError(f"unknown {key} fields: {sorted(bad)}")
            setattr(cfg, key, merged)
        return cfg


# --- artifact paths --------------------------------------------------------


def _p(cfg: RunConfig, *parts: str) -> Path:
    return cfg.root.joinpath(*parts)


def _require_file(path: Path, producing_stage: str) -> Path:
    if not path.exists():
        raise MissingArtifactError(str(path), f"run `citegen {producing_stage}` first")
    return path


# --- ingest ----------------------------------------------------------------


def stage_ingest(cfg: RunConfig) -> dict:
    if not cfg.corpus:
        raise ValidationError("no corpus path configured")
    titles = None
    if cfg.titles:
        titles = load_section_titles_text(Path(cfg.titles).read_text(encoding="utf-8"))
    ingest_cfg = make_config(
        min_paragraph_words=cfg.min_paragraph_words,
        min_sentence_words=cfg.min_sentence_words,
        section_titles=titles,
        language_filter=cfg.language_filter,
    )
    bundle = ingest_corpus(cfg.corpus, ingest_cfg)
    write_artifact(
        _p(cfg, "corpus.bundle.json"),
        {"bundle": bundle.to_dict()},
        run_hash=cfg.hash(),
        tool_version=__version__,
    )
    write_artifact(
        _p(cfg, "ingest_stats.json"),
        {"stats": bundle.stats.to_dict()},
        run_hash=cfg.hash(),
        tool_version=__version__,
    )
    return bundle.stats.to_dict()


def load_bundle(cfg: RunConfig) -> CorpusBundle:
    doc = read_artifact(
        _require_file(_p(cfg, "corpus.bundle.json"), "ingest"), expect_hash=cfg.hash()
    )
    return CorpusBundle.from_dict(doc["bundle"])


# --- example selection -------------------------------------------------------


def stage_pool(cfg: RunConfig) -> dict:
    bundle = load_bundle(cfg)
    singles = select_single_citation(bundle.instances)
    if cfg.sidecar:
        client = ScorerClient(cfg.sidecar)
        provider = resolve_similarity(client, allow_fallback=True)
    else:
        provider = JaccardSimilarity()
    examples: dict[str, dict | None] = {}
    for inst in singles:
        chosen = select_example(bundle.pool, inst, provider)
        if chosen is None:
            examples[inst.instance_id] = None
        else:
            examples[inst.instance_id] = {
                "example": dataclasses.asdict(chosen.sentence),
                "provider": chosen.provider,
                "score": chosen.score,
            }
    write_artifact(
        _p(cfg, "examples.json"),
        {"examples": examples, "provider": provider.name},
        run_hash=cfg.hash(),
        tool_version=__version__,
    )
    return {"selected": sum(1 for v in examples.values() if v), "total": len(examples)}


def load_examples(cfg: RunConfig) -> dict:
    doc = read_artifact(_require_file(_p(cfg, "examples.json"), "pool"), expect_hash=cfg.hash())
    return doc["examples"]


# --- intents -----------------------------------------------------------------


def stage_intents_generate(cfg: RunConfig, kinds: list[str]) -> dict:
    bundle = load_bundle(cfg)
    singles = select_single_citation(bundle.instances)
    path = _p(cfg, "intents.json")
    doc = (
        read_artifact(path, expect_hash=cfg.hash())
        if path.exists()
        else {"intents": {"free_form": {}, "categorical": {}}}
    )
    intents = doc["intents"]
    counts = {}
    for kind in kinds:
        if kind == "free_form":
            spec = cfg.backend_spec()
            cache = cfg.cache()
            for inst in singles:
                intent = generate_free_form_intent(inst, spec, cache)
                intents["free_form"][inst.instance_id] = intent.to_dict()
            counts["free_form"] = len(singles)
        elif kind == "categorical":
            for inst in singles:
                intent = assign_categorical_intent(inst)
                intents["categorical"][inst.instance_id] = intent.to_dict()
            counts["categorical"] = len(singles)
        else:
            raise ValidationError(f"unknown intent kind {kind!r}")
    write_artifact(path, {"intents": intents}, run_hash=cfg.hash(), tool_version=__version__)
    return counts


def load_intents(cfg: RunConfig) -> dict:
    doc = read_artifact(_require_file(_p(cfg, "intents.json"), "intents"), expect_hash=cfg.hash())
    return doc["intents"]


def stage_intents_audit(cfg: RunConfig, kind: str = "free_form") -> dict:
    bundle = load_bundle(cfg)
    intents_doc = load_intents(cfg)
    table = intents_doc.get(kind, {})
    singles = [i for i in select_single_citation(bundle.instances) if i.instance_id in table]
    if not singles:
        raise ValidationError(f"no {kind} intents to audit")
    intents = {iid: Intent(**d) for iid, d in table.items()}
    stopwords = None
    if cfg.stopwords:
        stopwords = {
            w.strip().lower()
            for w in Path(cfg.stopwords).read_text(encoding="utf-8").splitlines()
            if w.strip() and not w.startswith("#")
        }
    report = leak_audit(intents, singles, stopwords)
    write_artifact(
        _p(cfg, "leak_report.json"),
        {"kind": kind, "report": report.to_dict()},
        run_hash=cfg.hash(),
        tool_version=__version__,
    )
    return report.to_dict()


# --- render ------------------------------------------------------------------


def _matrix(cfg: RunConfig, configs: list[str] | None) -> list[PromptConfig]:
    if configs:
        return [parse_config(c) for c in configs]
    return enumerate_run_matrix(cfg.templates, cfg.component_sets)


def _components_for(cfg: RunConfig, pconf: PromptConfig, inst, examples, intents):
    from .corpus.types import ExampleSentence

    intent_text = None
    if pconf.intent_kind != "none":
        table = intents.get(pconf.intent_kind, {})
        entry = table.get(inst.instance_id)
        if entry is None:
            raise MissingArtifactError(
                f"intents.json[{pconf.intent_kind}][{inst.instance_id}]",
                "run `citegen intents generate` first",
            )
        intent_text = entry["text"]
    example = None
    if pconf.use_example:
        entry = examples.get(inst.instance_id)
        if entry is None:
            raise ValidationError(
                f"{inst.instance_id}: no example sentence available for config {pconf}"
            )
        example = ExampleSentence(**entry["example"])
    return intent_text, example


def stage_render(
    cfg: RunConfig, configs: list[str] | None = None, instance_id: str | None = None
) -> dict:
    bundle = load_bundle(cfg)
    singles = select_single_citation(bundle.instances)
    if instance_id is not None:
        singles = [i for i in singles if i.instance_id == instance_id]
        if not singles:
            raise ValidationError(f"unknown single-citation instance {instance_id!r}")
    matrix = _matrix(cfg, configs)
    templates = load_template_dir(cfg.template_dir)
    needs_example = any(c.use_example for c in matrix)
    needs_intent = any(c.intent_kind != "none" for c in matrix)
    examples = load_examples(cfg) if needs_example else {}
    intents = load_intents(cfg) if needs_intent else {}

    written = 0
    for pconf in matrix:
        template = templates.get(pconf.template_id)
        if template is None:
            raise ValidationError(f"no template file for id {pconf.template_id}")
        out_dir = _p(cfg, "prompts", pconf.to_string())
        for inst in singles:
            intent_text, example = _components_for(cfg, pconf, inst, examples, intents)
            prompt = render_prompt(template, pconf, inst, intent_text, example)
            atomic_write_text(
                out_dir / f"{inst.instance_id}.json", stable_dumps(prompt.to_dict()) + "\n"
            )
            written += 1
    write_artifact(
        _p(cfg, "prompts", "manifest.json"),
        {
            "configs": [c.to_string() for c in matrix],
            "instance_ids": [i.instance_id for i in singles],
            "prompts": written,
        },
        run_hash=cfg.hash(),
        tool_version=__version__,
    )
    return {"prompts": written, "configs": len(matrix), "instances": len(singles)}


def load_prompts(cfg: RunConfig) -> tuple[dict, list[str], list[str]]:
    doc = read_artifact(
        _require_file(_p(cfg, "prompts", "manifest.json"), "render"), expect_hash=cfg.hash()
    )
    prompts = {}
    for config in doc["configs"]:
        for iid in doc["instance_ids"]:
            path = _p(cfg, "prompts", config, f"{iid}.json")
            _require_file(path, "render")
            pd = json.loads(path.read_text(encoding="utf-8"))
            prompts[(config, iid)] = (pd["system"], pd["user"])
    return prompts, doc["configs"], doc["instance_ids"]


# --- run ---------------------------------------------------------------------


def stage_run(cfg: RunConfig) -> dict:
    prompts, _, _ = load_prompts(cfg)
    manifest = run_batch(
        prompts,
        backend_spec=cfg.backend_spec(),
        params=cfg.decoding_params(),
        cache=cfg.cache(),
        parallelism=cfg.parallelism,
        backend_options={
            "rate_per_s": cfg.rate_limit_per_s,
            "log_requests": cfg.log_requests,
        },
    )
    write_artifact(
        _p(cfg, "run_manifest.json"),
        {"manifest": manifest.to_dict()},
        run_hash=cfg.hash(),
        tool_version=__version__,
    )
    if not manifest.complete:
        raise IncompleteRunError(
            f"{manifest.counts()['failed']} cells failed; rerun `citegen run` to fill them"
        )
    return manifest.counts()


def load_manifest(cfg: RunConfig):
    from .gateway.runner import RunManifest

    doc = read_artifact(
        _require_file(_p(cfg, "run_manifest.json"), "run"), expect_hash=cfg.hash()
    )
    return RunManifest.from_dict(doc["manifest"])


# --- score -------------------------------------------------------------------


def stage_score(cfg: RunConfig, with_baseline: bool = True) -> dict:
    bundle = load_bundle(cfg)
    by_id = bundle.by_id()
    manifest = load_manifest(cfg)
    if not manifest.complete:
        raise IncompleteRunError("run manifest is incomplete; fill failed cells first")
    cache = cfg.cache()

    vectors: list[MeasurementVector] = []
    outputs: list[str] = []
    for cell in manifest.cells:
        record = cache.get(cell["key"])
        if record is None:
            raise MissingArtifactError(f"cache record {cell['key']}", "rerun `citegen run`")
        inst = by_id.get(cell["instance_id"])
        if inst is None:
            raise ValidationError(f"manifest references unknown instance {cell['instance_id']}")
        prompt_text = (
            record.system_text + "\n" + record.user_text
            if record.system_text
            else record.user_text
        )
        vectors.append(
            measure(
                inst.instance_id,
                cell["config"],
                manifest.backend_id,
                prompt_text,
                record.output_text,
                inst.gold_reference(),
            )
        )
        outputs.append(record.output_text)

    if with_baseline:
        for iid in manifest.instance_ids:
            inst = by_id[iid]
            base = baseline_text(inst)
            vectors.append(
                measure_baseline(iid, manifest.backend_id, base, inst.gold_reference())
            )
            outputs.append(base)

    available: list[str] = []
    if cfg.sidecar:
        client = ScorerClient(cfg.sidecar)
        available = _attach_model_scores(client, vectors, outputs, by_id)

    meta = {
        "kind": "measurements",
        "schema_version": 1,
        "tool_version": __version__,
        "config_hash": cfg.hash(),
        "backend_id": manifest.backend_id,
        "available_model_metrics": available,
    }
    lines = [json.dumps({"_meta": meta}, sort_keys=True, ensure_ascii=False)]
    lines += [
        json.dumps(v.to_dict(), sort_keys=True, ensure_ascii=False)
        for v in sorted(vectors, key=lambda v: (v.config, v.instance_id))
    ]
    atomic_write_text(_p(cfg, "measurements.jsonl"), "\n".join(lines) + "\n")
    return {"vectors": len(vectors), "model_metrics": available}


_SIDE_METRIC_FIELD = {
    "bertscore": "bertscore",
    "scibertscore": "scibertscore",
    "bleurt": "bleurt",
    "true_nli": "true_score",
    "summac": "summac",
}


def _attach_model_scores(client: ScorerClient, vectors, outputs, by_id) -> list[str]:
    """Score (gold, output) pairs for every available sidecar metric.

    Unavailability is total per metric per run: a metric either fills every
    vector or none of them (partial sidecar failures leave the metric
    unavailable rather than mixing scored and defaulted values).
    """
    if not client.is_healthy():
        log.warning("scorer sidecar unavailable; model-based metrics stay unavailable")
        return []
    # NLI pair order is {gold reference, model output}
    pairs = [
        (by_id[v.instance_id].gold_reference(), output) for v, output in zip(vectors, outputs)
    ]

    attached = []
    for metric in client.available_metrics():
        field_name = _SIDE_METRIC_FIELD.get(metric)
        if field_name is None:
            continue
        try:
            resp = client.score_batch(metric, pairs)
        except Exception as exc:
            log.warning("metric %s failed (%s); leaving it unavailable", metric, exc)
            continue
        if any(s is None for s in resp.scores):
            log.warning("metric %s returned per-pair failures; leaving it unavailable", metric)
            continue
        for v, score in zip(vectors, resp.scores):
            setattr(v, field_name, float(score))
        attached.append(field_name)
    return attached


def load_measurements(cfg: RunConfig) -> tuple[dict, list[MeasurementVector]]:
    path = _require_file(_p(cfg, "measurements.jsonl"), "score")
    meta: dict = {}
    vectors: list[MeasurementVector] = []
    with path.open(encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            doc = json.loads(line)
            if "_meta" in doc:
                meta = doc["_meta"]
                if meta.get("config_hash") != cfg.hash():
                    raise ValidationError(
                        "measurements.jsonl was produced under a different run config"
                    )
                continue
            vectors.append(MeasurementVector.from_dict(doc))
    if not vectors:
        raise ValidationError("measurements.jsonl holds no vectors")
    return meta, vectors


# --- analyze -----------------------------------------------------------------


def _format_cell(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "1" if value else "0"
    return f"{value:.2f}"


def write_aggregate_csv(cfg: RunConfig, table, path: Path) -> None:
    lines = [csv_meta_line(run_hash=cfg.hash(), tool_version=__version__).rstrip("\n")]
    lines.append(",".join(["Configuration"] + list(TABLE_COLUMNS)))
    for row_key, cells in table.rows.items():
        lines.append(
            ",".join([row_key] + [_format_cell(cells[col]) for col in TABLE_COLUMNS])
        )
    atomic_write_text(path, "\n".join(lines) + "\n")


def stage_analyze_aggregate(cfg: RunConfig) -> dict:
    _, vectors = load_measurements(cfg)
    table = aggregate(vectors)
    out_json = _p(cfg, "analysis", f"aggregate_{table.backend_id}.json")
    write_artifact(
        out_json, {"table": table.to_dict()}, run_hash=cfg.hash(), tool_version=__version__
    )
    write_aggregate_csv(cfg, table, _p(cfg, "analysis", "aggregate.csv"))
    return {"rows": len(table.rows), "backend_id": table.backend_id}


def stage_analyze_correlations(cfg: RunConfig) -> dict:
    _, vectors = load_measurements(cfg)
    matrix = pearson_matrix(vectors)
    write_artifact(
        _p(cfg, "analysis", "correlations.json"),
        {"matrix": matrix.to_dict()},
        run_hash=cfg.hash(),
        tool_version=__version__,
    )
    lines = [csv_meta_line(run_hash=cfg.hash(), tool_version=__version__).rstrip("\n")]
    lines.append(",".join(["metric"] + list(matrix.metrics)))
    for name, row in zip(matrix.metrics, matrix.values):
        lines.append(
            ",".join([name] + ["" if v is None else f"{v:.6f}" for v in row])
        )
    atomic_write_text(_p(cfg, "analysis", "correlations.csv"), "\n".join(lines) + "\n")
    return {"n": matrix.n}


def stage_analyze_significance(
    cfg: RunConfig, config_a: str, config_b: str, metric: str
) -> dict:
    _, vectors = load_measurements(cfg)
    attr = {
        "ng1": "ng1",
        "ng2": "ng2",
        "ng3": "ng3",
        "rouge_l": "rouge_l",
        "bertscore": "bertscore",
        "scibertscore": "scibertscore",
        "bleurt": "bleurt",
        "true": "true_score",
        "summac": "summac",
        "wc": "word_count",
    }.get(metric.lower())
    if attr is None:
        raise ValidationError(f"unknown metric {metric!r} for significance testing")
    rows_a = {v.instance_id: v for v in vectors if v.config == config_a}
    rows_b = {v.instance_id: v for v in vectors if v.config == config_b}
    if not rows_a or not rows_b:
        raise ValidationError(f"no vectors for {config_a!r} or {config_b!r}")
    shared = sorted(set(rows_a) & set(rows_b))
    if len(shared) < 2:
        raise ValidationError("fewer than 2 paired instances")
    a = [getattr(rows_a[i], attr) for i in shared]
    b = [getattr(rows_b[i], attr) for i in shared]
    if any(x is None for x in a) or any(x is None for x in b):
        raise ValidationError(f"metric {metric} unavailable for one of the systems")
    result = paired_bootstrap(
        a,
        b,
        resamples=cfg.resamples,
        ratio=cfg.sample_ratio,
        seed=cfg.seed,
        system_a=config_a,
        system_b=config_b,
        metric=metric,
    )
    safe = f"{config_a}_vs_{config_b}_{metric}".replace("+", "")
    write_artifact(
        _p(cfg, "analysis", f"significance_{safe}.json"),
        {"result": result.to_dict()},
        run_hash=cfg.hash(),
        tool_version=__version__,
    )
    _rebuild_significance_csv(cfg)
    return result.to_dict()


def _rebuild_significance_csv(cfg: RunConfig) -> None:
    rows = []
    for path in sorted(_p(cfg, "analysis").glob("significance_*.json")):
        doc = read_artifact(path, expect_hash=cfg.hash())
        rows.append(doc["result"])
    lines = [csv_meta_line(run_hash=cfg.hash(), tool_version=__version__).rstrip("\n")]
    lines.append("system_a,system_b,metric,p_value,resamples,sample_ratio,seed,a_significantly_better")
    for r in rows:
        lines.append(
            f"{r['system_a']},{r['system_b']},{r['metric']},{r['p_value']:.6f},"
            f"{r['resamples']},{r['sample_ratio']},{r['seed']},{r['a_significantly_better']}"
        )
    atomic_write_text(_p(cfg, "analysis", "significance.csv"), "\n".join(lines) + "\n")


def stage_analyze_winners(cfg: RunConfig) -> dict:
    _, vectors = load_measurements(cfg)
    table = aggregate(vectors)
    census = winner_census({table.backend_id: table})
    write_artifact(
        _p(cfg, "analysis", "winner_census.json"),
        {"census": census.to_dict()},
        run_hash=cfg.hash(),
        tool_version=__version__,
    )
    lines = [csv_meta_line(run_hash=cfg.hash(), tool_version=__version__).rstrip("\n")]
    lines.append("backend_id,template_id,metric,winner,value,tied")
    for cell in census.cells:
        lines.append(
            f"{cell['backend_id']},{cell['template_id']},{cell['metric']},"
            f"{cell['winner']},{cell['value']:.2f},{cell['tied']}"
        )
    atomic_write_text(_p(cfg, "analysis", "winner_census.csv"), "\n".join(lines) + "\n")
    return census.to_dict()["shares"]


def stage_analyze_length_bins(
    cfg: RunConfig, config_a: str, config_b: str, threshold: str = "mean"
) -> dict:
    _, vectors = load_measurements(cfg)
    prompts, _, _ = load_prompts(cfg)
    lengths = {
        key: len(system.split()) + len(user.split()) for key, (system, user) in prompts.items()
    }
    va = [v for v in vectors if v.config == config_a]
    vb = [v for v in vectors if v.config == config_b]
    report = length_bin_compare(
        va,
        vb,
        lengths,
        threshold=threshold if threshold == "mean" else float(threshold),
        resamples=cfg.resamples,
        ratio=cfg.sample_ratio,
        seed=cfg.seed,
    )
    write_artifact(
        _p(cfg, "analysis", "length_bins.json"),
        {"report": report.to_dict()},
        run_hash=cfg.hash(),
        tool_version=__version__,
    )
    return report.to_dict()


# --- report ------------------------------------------------------------------


def stage_report(cfg: RunConfig) -> dict:
    """Assemble the final table set, refusing inputs with mixed config hashes."""
    meta, vectors = load_measurements(cfg)
    bundle = load_bundle(cfg)
    table = aggregate(vectors)
    report_dir = _p(cfg, "report")

    write_aggregate_csv(cfg, table, report_dir / f"aggregate_{table.backend_id}.csv")

    # surface summary: model average across configurations vs the reference row
    singles = select_single_citation(bundle.instances)
    refs = [i.gold_reference() for i in singles]
    ref_wc = sum(word_count(r) for r in refs) / len(refs)
    ref_pc = sum(paragraph_count(r) for r in refs) / len(refs)
    ref_cm = 100.0 * sum(citation_mark_usage(r) for r in refs) / len(refs)
    config_rows = [table.rows[r] for r in table.config_rows()]

    def _avg(col: str):
        vals = [r[col] for r in config_rows if r[col] is not None]
        return sum(vals) / len(vals) if vals else None

    lines = [csv_meta_line(run_hash=cfg.hash(), tool_version=__version__).rstrip("\n")]
    lines.append("row,NG-3,WC,PC,CM")
    lines.append(
        ",".join(
            [
                table.backend_id,
                _format_cell(_avg("NG-3")),
                _format_cell(_avg("WC")),
                _format_cell(_avg("PC")),
                _format_cell(_avg("CM")),
            ]
        )
    )
    lines.append(
        ",".join(["Reference", "-", _format_cell(ref_wc), _format_cell(ref_pc), _format_cell(ref_cm)])
    )
    atomic_write_text(report_dir / "surface_summary.csv", "\n".join(lines) + "\n")

    census = winner_census({table.backend_id: table})
    lines = [csv_meta_line(run_hash=cfg.hash(), tool_version=__version__).rstrip("\n")]
    lines.append("component_set,share")
    for comp, share in census.shares().items():
        lines.append(f"{comp},{share:.4f}")
    atomic_write_text(report_dir / "winner_shares.csv", "\n".join(lines) + "\n")

    copied = []
    for name in ("correlations.csv", "significance.csv", "winner_census.csv", "length_bins.json"):
        src = _p(cfg, "analysis", name)
        if src.exists():
            if name.endswith(".json"):
                read_artifact(src, expect_hash=cfg.hash())
            else:
                from .artifacts import read_csv_meta

                if read_csv_meta(src).get("config_hash") != cfg.hash():
                    raise ValidationError(f"{src}: config hash mismatch; refusing mixed inputs")
            atomic_write_text(report_dir / name, src.read_text(encoding="utf-8"))
            copied.append(name)
    return {
        "backend_id": table.backend_id,
        "rows": len(table.rows),
        "copied": copied,
        "reference": {"WC": ref_wc, "PC": ref_pc, "CM": ref_cm},
    }

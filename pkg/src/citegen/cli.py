"""Command-line entry point wiring the pipeline stages together.

Exit codes: 0 success, 2 validation problem (bad config, missing or
mismatched artifacts), 3 upstream service failure, 4 incomplete run.
"""

import json
import logging
import sys
from pathlib import Path

import click

from . import __version__, pipeline
from .errors import IncompleteRunError, UpstreamError, ValidationError

log = logging.getLogger(__name__)

EXIT_VALIDATION = 2
EXIT_UPSTREAM = 3
EXIT_INCOMPLETE = 4


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _guard(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ValidationError as exc:
        _fail(EXIT_VALIDATION, str(exc))
    except IncompleteRunError as exc:
        _fail(EXIT_INCOMPLETE, str(exc))
    except UpstreamError as exc:
        _fail(EXIT_UPSTREAM, str(exc))


def _echo(result):
    click.echo(json.dumps(result, sort_keys=True, default=str))


def _build_config(ctx) -> pipeline.RunConfig:
    params = ctx.obj
    backend = {
        "backend_id": params.pop("backend_id", None),
        "endpoint": params.pop("endpoint", None),
        "model_name": params.pop("model_name", None),
        "auth_env": params.pop("auth_env", None),
        "wire_dialect": params.pop("wire_dialect", None),
    }
    overrides = {k: v for k, v in params.items() if k != "run_config"}
    if any(v is not None for v in backend.values()):
        overrides["backend"] = backend
    return _guard(pipeline.RunConfig.load, params.get("run_config"), overrides)


@click.group()
@click.version_option(version=__version__)
@click.option("--run-config", "-c", type=click.Path(exists=True), default=None,
              help="YAML run configuration; flags override its fields.")
@click.option("--workdir", type=click.Path(), default=None, help="Artifact directory.")
@click.option("--corpus", type=click.Path(), default=None, help="Raw corpus JSONL.")
@click.option("--titles", type=click.Path(), default=None, help="Section title list override.")
@click.option("--template-dir", type=click.Path(), default=None)
@click.option("--sidecar", default=None, help="Scorer sidecar endpoint, e.g. http://127.0.0.1:8601")
@click.option("--parallelism", type=int, default=None)
@click.option("--rate-limit", "rate_limit_per_s", type=float, default=None,
              help="Requests per second per backend.")
@click.option("--log-requests/--no-log-requests", default=None,
              help="Log bit-exact request bodies.")
@click.option("--seed", type=int, default=None)
@click.option("--backend-id", default=None)
@click.option("--endpoint", default=None, help="Backend endpoint URL or stub:echo / stub:const:<file>.")
@click.option("--model-name", default=None)
@click.option("--auth-env", default=None, help="Env var holding the backend API key.")
@click.option("--wire-dialect", type=click.Choice(["openai_chat_v1", "local_stub"]), default=None)
@click.option("--verbose", "-v", is_flag=True, default=False)
@click.pass_context
def main(ctx, **params):
    """Citation text generation experiment harness."""
    logging.basicConfig(
        level=logging.DEBUG if params.pop("verbose") else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    ctx.obj = params


@main.command()
@click.option("--min-paragraph-words", type=int, default=None)
@click.option("--min-sentence-words", type=int, default=None)
@click.option("--language-filter/--no-language-filter", default=None)
@click.pass_context
def ingest(ctx, min_paragraph_words, min_sentence_words, language_filter):
    """Ingest the raw corpus into a validated bundle plus stats."""
    ctx.obj.update(
        {
            "min_paragraph_words": min_paragraph_words,
            "min_sentence_words": min_sentence_words,
            "language_filter": language_filter,
        }
    )
    cfg = _build_config(ctx)
    _echo(_guard(pipeline.stage_ingest, cfg))


@main.command()
@click.pass_context
def pool(ctx):
    """Select the most similar example sentence for every instance."""
    cfg = _build_config(ctx)
    _echo(_guard(pipeline.stage_pool, cfg))


@main.group()
def intents():
    """Generate intents or audit them for information leakage."""


@intents.command("generate")
@click.option("--kind", "kinds", multiple=True,
              type=click.Choice(["free_form", "categorical"]), default=("free_form",))
@click.pass_context
def intents_generate(ctx, kinds):
    cfg = _build_config(ctx)
    _echo(_guard(pipeline.stage_intents_generate, cfg, list(kinds)))


@intents.command("audit")
@click.option("--kind", type=click.Choice(["free_form", "categorical"]), default="free_form")
@click.pass_context
def intents_audit(ctx, kind):
    cfg = _build_config(ctx)
    _echo(_guard(pipeline.stage_intents_audit, cfg, kind))


@main.command()
@click.option("--config", "configs", multiple=True,
              help="Configuration string like 1+A+IF+E; defaults to the full matrix.")
@click.option("--instance", default=None, help="Render a single instance id.")
@click.pass_context
def render(ctx, configs, instance):
    """Render prompts for (configuration, instance) pairs."""
    cfg = _build_config(ctx)
    _echo(_guard(pipeline.stage_render, cfg, list(configs) or None, instance))


@main.command()
@click.pass_context
def run(ctx):
    """Collect generations for every rendered prompt (cache-first)."""
    cfg = _build_config(ctx)
    _echo(_guard(pipeline.stage_run, cfg))


@main.command()
@click.option("--with-baseline/--no-baseline", default=True)
@click.pass_context
def score(ctx, with_baseline):
    """Measure generations: surface metrics, ROUGE-L, sidecar metrics."""
    cfg = _build_config(ctx)
    _echo(_guard(pipeline.stage_score, cfg, with_baseline))


@main.group()
def analyze():
    """Aggregation, correlation, significance, and length-bin analyses."""


@analyze.command("aggregate")
@click.pass_context
def analyze_aggregate(ctx):
    cfg = _build_config(ctx)
    _echo(_guard(pipeline.stage_analyze_aggregate, cfg))


@analyze.command("correlations")
@click.pass_context
def analyze_correlations(ctx):
    cfg = _build_config(ctx)
    _echo(_guard(pipeline.stage_analyze_correlations, cfg))


@analyze.command("significance")
@click.option("--a", "config_a", required=True)
@click.option("--b", "config_b", required=True)
@click.option("--metric", required=True)
@click.pass_context
def analyze_significance(ctx, config_a, config_b, metric):
    cfg = _build_config(ctx)
    _echo(_guard(pipeline.stage_analyze_significance, cfg, config_a, config_b, metric))


@analyze.command("length-bins")
@click.option("--a", "config_a", required=True)
@click.option("--b", "config_b", required=True)
@click.option("--threshold", default="mean")
@click.pass_context
def analyze_length_bins(ctx, config_a, config_b, threshold):
    cfg = _build_config(ctx)
    _echo(_guard(pipeline.stage_analyze_length_bins, cfg, config_a, config_b, threshold))


@analyze.command("winners")
@click.pass_context
def analyze_winners(ctx):
    cfg = _build_config(ctx)
    _echo(_guard(pipeline.stage_analyze_winners, cfg))


@main.command("humeval-serve")
@click.option("--study", "study_dir", type=click.Path(), required=True)
@click.option("--build", is_flag=True, default=False, help="Build the study before serving.")
@click.option("--build-only", is_flag=True, default=False)
@click.option("--instances", "n_instances", type=int, default=30)
@click.option("--candidate-config", "candidate_configs", multiple=True,
              default=("6+A", "6+A+IF+E"))
@click.option("--annotator", "annotators", multiple=True, default=("annotator-1",))
@click.option("--admin-token", default="admin-token")
@click.option("--auto-curate", is_flag=True, default=False)
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8600)
@click.pass_context
def humeval_serve(ctx, study_dir, build, build_only, n_instances, candidate_configs,
                  annotators, admin_token, auto_curate, host, port):
    """Serve the pyramid-evaluation API consumed by the annotation UI."""
    study_path = Path(study_dir)
    if build or build_only:
        from .humeval.study import build_study

        cfg = _build_config(ctx)
        study_path.mkdir(parents=True, exist_ok=True)
        result = _guard(
            build_study,
            cfg,
            study_path,
            n_instances=n_instances,
            candidate_configs=tuple(candidate_configs),
            annotators=tuple(annotators),
            admin_token=admin_token,
            auto_curate=auto_curate,
        )
        _echo(result)
        if build_only:
            return
    if not (study_path / "study.json").exists():
        _fail(EXIT_VALIDATION, f"no study at {study_path}; use --build")

    import uvicorn

    from .humeval.service import create_app

    app = create_app(study_path)
    frontend = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if frontend.exists():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(frontend), html=True), name="ui")
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command()
@click.pass_context
def report(ctx):
    """Assemble the final table set from the run's artifacts."""
    cfg = _build_config(ctx)
    _echo(_guard(pipeline.stage_report, cfg))


if __name__ == "__main__":
    main()

"""Model registry: metric -> scorer binding, loaded from configuration.

Model identifiers use a scheme prefix:
  lexical:<name>  deterministic scorers shipped with this service
  hf:<repo-id>    transformer-backed scorers (loaded when available)

A metric whose model fails to load is reported absent from /v1/health;
requests for it are rejected, never silently defaulted.
"""

import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import yaml

from .scorers import (
    BlendScorer,
    HashedBowEmbedder,
    RuleEntailmentScorer,
    SentenceGridScorer,
    SentenceTransformerEmbedder,
    TokenF1Scorer,
)

log = logging.getLogger(__name__)

KNOWN_METRICS = ("bertscore", "scibertscore", "bleurt", "true_nli", "summac", "embed")

_LEXICAL = {
    "token-f1": TokenF1Scorer,
    "token-f1-sci": TokenF1Scorer,
    "rule-entailment": RuleEntailmentScorer,
    "zs-grid": SentenceGridScorer,
    "blend": BlendScorer,
}


@dataclass
class RegistryEntry:
    metric: str
    model_id: str
    normalization: str = "raw"
    variant: str = ""
    scorer: object = None


@dataclass
class Registry:
    entries: dict[str, RegistryEntry] = field(default_factory=dict)
    failed: dict[str, str] = field(default_factory=dict)

    def models(self) -> dict[str, str]:
        return {metric: e.model_id for metric, e in sorted(self.entries.items())}

    def declared(self) -> dict[str, dict]:
        return {
            metric: {"model_id": e.model_id, "normalization": e.normalization, "variant": e.variant}
            for metric, e in sorted(self.entries.items())
        }


def default_registry_path() -> Path:
    return Path(str(resources.files("model_scorer"))) / "registry.yaml"


def _build_scorer(metric: str, model_id: str, device: str):
    scheme, _, name = model_id.partition(":")
    if scheme == "lexical":
        if metric == "embed":
            if not name.startswith("hashed-bow"):
                raise ValueError(f"unknown lexical embedder {name!r}")
            dim = int(name.rsplit("-", 1)[1]) if name[-1].isdigit() else 256
            return HashedBowEmbedder(model_id, dim=dim)
        cls = _LEXICAL.get(name)
        if cls is None:
            raise ValueError(f"unknown lexical scorer {name!r}")
        return cls(model_id)
    if scheme == "hf":
        if metric == "embed":
            return SentenceTransformerEmbedder(model_id, device=device)
        raise ValueError(f"no transformer loader wired for metric {metric!r} yet")
    raise ValueError(f"unknown model scheme {scheme!r}")


def load_registry(path: str | Path | None = None, device: str = "cpu") -> Registry:
    registry_path = Path(path) if path else default_registry_path()
    doc = yaml.safe_load(registry_path.read_text(encoding="utf-8")) or {}
    registry = Registry()
    for metric, spec in (doc.get("metrics") or {}).items():
        if metric not in KNOWN_METRICS:
            log.warning("registry names unknown metric %s; skipping", metric)
            continue
        model_id = str(spec["model"])
        try:
            scorer = _build_scorer(metric, model_id, device)
        except Exception as exc:
            # absent from health rather than half-working
            log.warning("metric %s (%s) failed to load: %s", metric, model_id, exc)
            registry.failed[metric] = str(exc)
            continue
        registry.entries[metric] = RegistryEntry(
            metric=metric,
            model_id=model_id,
            normalization=str(spec.get("normalization", "raw")),
            variant=str(spec.get("variant", "")),
            scorer=scorer,
        )
    return registry

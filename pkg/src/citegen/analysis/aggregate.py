"""Aggregation tables over measurement vectors.

Rows are configuration strings (plus the abstracts baseline), columns the
standard metric set in fixed order. Ratio metrics are reported on a 0-100
scale; WC and PC stay raw. A cell is None when that metric is masked or
unavailable for the row, never silently zero.
"""

from dataclasses import dataclass, field

from ..errors import ValidationError
from ..metrics import MeasurementVector

BASELINE_ROW = "Abs. Baseline"

TABLE_COLUMNS = (
    "NG-1",
    "NG-2",
    "NG-3",
    "WC",
    "PC",
    "CM",
    "ROUGE-L",
    "BERTScore",
    "SciBERTScore",
    "BLEURT",
    "TRUE",
    "SummaC",
)

# column -> (vector attribute, scale factor)
_COLUMN_SPEC = {
    "NG-1": ("ng1", 100.0),
    "NG-2": ("ng2", 100.0),
    "NG-3": ("ng3", 100.0),
    "WC": ("word_count", 1.0),
    "PC": ("paragraph_count", 1.0),
    "CM": ("citation_mark_used", 100.0),
    "ROUGE-L": ("rouge_l", 100.0),
    "BERTScore": ("bertscore", 100.0),
    "SciBERTScore": ("scibertscore", 100.0),
    "BLEURT": ("bleurt", 100.0),
    "TRUE": ("true_score", 100.0),
    "SummaC": ("summac", 100.0),
}

WINNER_METRICS = ("ROUGE-L", "BERTScore", "SciBERTScore", "BLEURT", "TRUE", "SummaC")


@dataclass
class AggregateTable:
    backend_id: str
    rows: dict[str, dict[str, float | None]]
    counts: dict[str, int]
    columns: tuple[str, ...] = TABLE_COLUMNS

    def config_rows(self) -> list[str]:
        """Row keys excluding the baseline, template-major order preserved."""
        return [r for r in self.rows if r != BASELINE_ROW]

    def to_dict(self) -> dict:
        return {
            "backend_id": self.backend_id,
            "columns": list(self.columns),
            "rows": self.rows,
            "counts": self.counts,
        }


def _row_sort_key(config: str):
    if config == BASELINE_ROW:
        return (0, "", "")
    head = config.split("+", 1)[0]
    rest = config[len(head) :]
    return (1, int(head), rest)


def aggregate(vectors: list[MeasurementVector], allow_ragged: bool = False) -> AggregateTable:
    """Arithmetic means over instances for every (config, metric) cell.

    The (config x instance) grid must be rectangular: every configuration
    row is averaged over the identical instance set. Missing cells raise
    with an explicit list unless allow_ragged is set.
    """
    if not vectors:
        raise ValidationError("no measurement vectors to aggregate")
    backends = {v.backend_id for v in vectors}
    if len(backends) > 1:
        raise ValidationError(f"aggregate expects one backend per table, got {sorted(backends)}")

    by_config: dict[str, dict[str, MeasurementVector]] = {}
    for v in vectors:
        slot = by_config.setdefault(v.config, {})
        if v.instance_id in slot:
            raise ValidationError(f"duplicate vector for ({v.config}, {v.instance_id})")
        slot[v.instance_id] = v

    all_instances = sorted({v.instance_id for v in vectors})
    if not allow_ragged:
        missing = [
            (config, iid)
            for config, slot in sorted(by_config.items())
            for iid in all_instances
            if iid not in slot
        ]
        if missing:
            listing = ", ".join(f"({c}, {i})" for c, i in missing[:20])
            raise ValidationError(
                f"ragged measurement grid, {len(missing)} missing cells: {listing}"
            )

    rows: dict[str, dict[str, float | None]] = {}
    counts: dict[str, int] = {}
    for config in sorted(by_config, key=_row_sort_key):
        cells: dict[str, float | None] = {}
        group = list(by_config[config].values())
        counts[config] = len(group)
        for col in TABLE_COLUMNS:
            attr, scale = _COLUMN_SPEC[col]
            raw = [getattr(v, attr) for v in group]
            present = [r for r in raw if r is not None]
            if not present:
                cells[col] = None
                continue
            if len(present) != len(raw):
                raise ValidationError(
                    f"column {col} mixes available and unavailable values in row {config}"
                )
            cells[col] = sum(float(x) for x in present) * scale / len(present)
        rows[config] = cells
    return AggregateTable(backend_id=backends.pop(), rows=rows, counts=counts)


@dataclass
class WinnerCensus:
    """Argmax component set per (backend, template, metric) cell."""

    cells: list[dict] = field(default_factory=list)

    def shares(self) -> dict[str, float]:
        if not self.cells:
            return {}
        tally: dict[str, int] = {}
        for cell in self.cells:
            tally[cell["winner"]] = tally.get(cell["winner"], 0) + 1
        total = len(self.cells)
        return {k: v / total for k, v in sorted(tally.items())}

    def to_dict(self) -> dict:
        return {"cells": self.cells, "shares": self.shares()}


def winner_census(tables: dict[str, AggregateTable], metrics=WINNER_METRICS) -> WinnerCensus:
    """Which component set wins each (backend, template, metric) cell.

    Unavailable metrics are skipped; ties go to the lexicographically first
    component set and are flagged.
    """
    census = WinnerCensus()
    for backend_id, table in sorted(tables.items()):
        by_template: dict[int, list[str]] = {}
        for config in table.config_rows():
            tid = int(config.split("+", 1)[0])
            by_template.setdefault(tid, []).append(config)
        for tid, configs in sorted(by_template.items()):
            for metric in metrics:
                scored = [
                    (config, table.rows[config][metric])
                    for config in configs
                    if table.rows[config][metric] is not None
                ]
                if not scored:
                    continue
                best_value = max(s for _, s in scored)
                winners = sorted(
                    c[len(str(tid)) :] for c, s in scored if s == best_value
                )
                census.cells.append(
                    {
                        "backend_id": backend_id,
                        "template_id": tid,
                        "metric": metric,
                        "winner": winners[0],
                        "value": best_value,
                        "tied": len(winners) > 1,
                    }
                )
    return census

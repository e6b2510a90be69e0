"""Pearson correlation over instance-level measurements."""

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from ..errors import ValidationError
from ..metrics import MeasurementVector

CORRELATION_METRICS = (
    "WC",
    "ROUGE-L",
    "BERTScore",
    "SciBERTScore",
    "BLEURT",
    "TRUE",
    "SummaC",
)

_METRIC_ATTR = {
    "WC": "word_count",
    "ROUGE-L": "rouge_l",
    "BERTScore": "bertscore",
    "SciBERTScore": "scibertscore",
    "BLEURT": "bleurt",
    "TRUE": "true_score",
    "SummaC": "summac",
}


def pearson_r(x: list[float], y: list[float]) -> float | None:
    """Plain Pearson r; None when either series is constant."""
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.size != ya.size:
        raise ValidationError("series lengths differ")
    if xa.size < 3:
        raise ValidationError("need at least 3 points for a correlation")
    dx = xa - xa.mean()
    dy = ya - ya.mean()
    sx = math.sqrt(float(dx @ dx))
    sy = math.sqrt(float(dy @ dy))
    if sx == 0.0 or sy == 0.0:
        return None
    r = float(dx @ dy) / (sx * sy)
    return max(-1.0, min(1.0, r))


def pearson_r_p(x: list[float], y: list[float]) -> tuple[float | None, float | None]:
    """Pearson r with a two-sided p-value; (None, None) on a constant series."""
    r = pearson_r(x, y)
    if r is None:
        return None, None
    res = stats.pearsonr(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    return float(res.statistic), float(res.pvalue)


@dataclass
class CorrelationMatrix:
    metrics: tuple[str, ...]
    values: list[list[float | None]]
    n: int

    def get(self, a: str, b: str) -> float | None:
        return self.values[self.metrics.index(a)][self.metrics.index(b)]

    def to_dict(self) -> dict:
        return {"metrics": list(self.metrics), "values": self.values, "n": self.n}


def pearson_matrix(
    vectors: list[MeasurementVector],
    metrics: tuple[str, ...] = CORRELATION_METRICS,
) -> CorrelationMatrix:
    """Symmetric correlation matrix over pooled instance-level values.

    Instances from all configurations are pooled; the baseline row is not a
    configuration and is excluded. Metrics that are unavailable or constant
    get an undefined (None) row and column rather than a fake 0.
    """
    pool = [v for v in vectors if v.config != "Abs. Baseline"]
    if len(pool) < 3:
        raise ValidationError("need at least 3 instance-level vectors")

    series: dict[str, list[float] | None] = {}
    for metric in metrics:
        attr = _METRIC_ATTR[metric]
        vals = [getattr(v, attr) for v in pool]
        if any(x is None for x in vals):
            series[metric] = None
        else:
            series[metric] = [float(x) for x in vals]

    k = len(metrics)
    values: list[list[float | None]] = [[None] * k for _ in range(k)]
    for i, mi in enumerate(metrics):
        si = series[mi]
        if si is None:
            continue
        for j, mj in enumerate(metrics):
            if j < i:
                values[i][j] = values[j][i]
                continue
            sj = series[mj]
            if sj is None:
                continue
            r = pearson_r(si, sj)
            values[i][j] = r
    return CorrelationMatrix(metrics=tuple(metrics), values=values, n=len(pool))

"""Prompt-length control experiment.

Compares long prompts of configuration A against short prompts of
configuration B: instances of A above the length threshold vs instances of
B at or below it. The bins are generally different instance sets, so the
significance test resamples each side independently.
"""

from dataclasses import dataclass

from ..errors import ValidationError
from ..metrics import MeasurementVector
from .bootstrap import BootstrapResult, unpaired_bootstrap

BIN_METRICS = ("ROUGE-L", "BERTScore", "SciBERTScore", "BLEURT", "TRUE", "SummaC")

_METRIC_ATTR = {
    "ROUGE-L": "rouge_l",
    "BERTScore": "bertscore",
    "SciBERTScore": "scibertscore",
    "BLEURT": "bleurt",
    "TRUE": "true_score",
    "SummaC": "summac",
}


@dataclass
class LengthBinReport:
    config_a: str
    config_b: str
    threshold: float
    n_long_a: int
    n_short_b: int
    metrics: dict[str, dict]

    def to_dict(self) -> dict:
        return {
            "config_a": self.config_a,
            "config_b": self.config_b,
            "threshold": self.threshold,
            "n_long_a": self.n_long_a,
            "n_short_b": self.n_short_b,
            "metrics": self.metrics,
        }


def resolve_threshold(lengths: list[int], threshold: float | str) -> float:
    if threshold == "mean":
        if not lengths:
            raise ValidationError("no prompt lengths to average")
        return sum(lengths) / len(lengths)
    return float(threshold)


def length_bin_compare(
    vectors_a: list[MeasurementVector],
    vectors_b: list[MeasurementVector],
    prompt_lengths: dict[tuple[str, str], int],
    threshold: float | str = "mean",
    resamples: int = 10000,
    ratio: float = 0.5,
    seed: int = 0,
) -> LengthBinReport:
    """Per-metric means and bootstrap p-values for long-A vs short-B bins.

    prompt_lengths maps (config, instance_id) -> token estimate; the "mean"
    threshold averages over both configurations' prompts.
    """
    if not vectors_a or not vectors_b:
        raise ValidationError("both configurations need measurement vectors")
    config_a = vectors_a[0].config
    config_b = vectors_b[0].config

    def length_of(v: MeasurementVector) -> int:
        key = (v.config, v.instance_id)
        if key not in prompt_lengths:
            raise ValidationError(f"no prompt length for {key}")
        return prompt_lengths[key]

    all_lengths = [length_of(v) for v in vectors_a] + [length_of(v) for v in vectors_b]
    cut = resolve_threshold(all_lengths, threshold)

    long_a = [v for v in vectors_a if length_of(v) > cut]
    short_b = [v for v in vectors_b if length_of(v) <= cut]
    if not long_a:
        raise ValidationError(f"empty bin: no {config_a} prompts longer than {cut:.1f}")
    if not short_b:
        raise ValidationError(f"empty bin: no {config_b} prompts at or below {cut:.1f}")

    report: dict[str, dict] = {}
    for metric in BIN_METRICS:
        attr = _METRIC_ATTR[metric]
        va = [getattr(v, attr) for v in long_a]
        vb = [getattr(v, attr) for v in short_b]
        if any(x is None for x in va) or any(x is None for x in vb):
            report[metric] = {"available": False}
            continue
        entry = {
            "available": True,
            "mean_long_a": sum(va) / len(va),
            "mean_short_b": sum(vb) / len(vb),
        }
        if len(va) >= 2 and len(vb) >= 2:
            # directional test both ways; small p = that side is better
            a_better: BootstrapResult = unpaired_bootstrap(
                va,
                vb,
                resamples=resamples,
                ratio=ratio,
                seed=seed,
                system_a=f"{config_a} (long)",
                system_b=f"{config_b} (short)",
                metric=metric,
            )
            b_better: BootstrapResult = unpaired_bootstrap(
                vb,
                va,
                resamples=resamples,
                ratio=ratio,
                seed=seed,
                system_a=f"{config_b} (short)",
                system_b=f"{config_a} (long)",
                metric=metric,
            )
            entry["p_value_a_better"] = a_better.p_value
            entry["p_value_b_better"] = b_better.p_value
        report[metric] = entry

    return LengthBinReport(
        config_a=config_a,
        config_b=config_b,
        threshold=cut,
        n_long_a=len(long_a),
        n_short_b=len(short_b),
        metrics=report,
    )

"""Bootstrap significance testing between two systems' per-instance scores.

The paired test resamples index-aligned score pairs: each resample draws
ceil(ratio * N) indices with replacement and compares subsample means.
p = fraction of resamples in which system B's mean is >= system A's mean,
ties counting against A. "A significantly better" is declared at p < 0.05.

Resampling is chunked, with per-chunk seeds derived from the master seed,
so results are deterministic regardless of how chunks are scheduled.
"""

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError

ALPHA = 0.05
_CHUNK = 1000


@dataclass
class BootstrapResult:
    system_a: str
    system_b: str
    metric: str
    p_value: float
    resamples: int
    sample_ratio: float
    seed: int
    n: int
    mean_a: float
    mean_b: float
    paired: bool = True

    @property
    def a_significantly_better(self) -> bool:
        return self.p_value < ALPHA

    def to_dict(self) -> dict:
        return {
            "system_a": self.system_a,
            "system_b": self.system_b,
            "metric": self.metric,
            "p_value": self.p_value,
            "resamples": self.resamples,
            "sample_ratio": self.sample_ratio,
            "seed": self.seed,
            "n": self.n,
            "mean_a": self.mean_a,
            "mean_b": self.mean_b,
            "paired": self.paired,
            "a_significantly_better": self.a_significantly_better,
        }


def _chunk_seeds(seed: int, n_chunks: int) -> list[np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    return [np.random.default_rng(c) for c in children]


def paired_bootstrap(
    scores_a: list[float],
    scores_b: list[float],
    resamples: int = 10000,
    ratio: float = 0.5,
    seed: int = 0,
    system_a: str = "A",
    system_b: str = "B",
    metric: str = "",
) -> BootstrapResult:
    a = np.asarray(scores_a, dtype=float)
    b = np.asarray(scores_b, dtype=float)
    if a.size != b.size:
        raise ValidationError(f"paired scores differ in length: {a.size} vs {b.size}")
    if a.size < 2:
        raise ValidationError("paired bootstrap needs at least 2 paired scores")
    if not (0 < ratio <= 1):
        raise ValidationError(f"sample ratio must be in (0, 1], got {ratio}")
    n = a.size
    m = math.ceil(ratio * n)

    hits = 0
    done = 0
    rngs = _chunk_seeds(seed, math.ceil(resamples / _CHUNK))
    for rng in rngs:
        take = min(_CHUNK, resamples - done)
        idx = rng.integers(0, n, size=(take, m))
        hits += int(np.count_nonzero(b[idx].mean(axis=1) >= a[idx].mean(axis=1)))
        done += take

    return BootstrapResult(
        system_a=system_a,
        system_b=system_b,
        metric=metric,
        p_value=hits / resamples,
        resamples=resamples,
        sample_ratio=ratio,
        seed=seed,
        n=n,
        mean_a=float(a.mean()),
        mean_b=float(b.mean()),
        paired=True,
    )


def unpaired_bootstrap(
    scores_a: list[float],
    scores_b: list[float],
    resamples: int = 10000,
    ratio: float = 0.5,
    seed: int = 0,
    system_a: str = "A",
    system_b: str = "B",
    metric: str = "",
) -> BootstrapResult:
    """Variant for bins that are not index-aligned (e.g. length-bin subsets):
    each side is resampled independently."""
    a = np.asarray(scores_a, dtype=float)
    b = np.asarray(scores_b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise ValidationError("unpaired bootstrap needs at least 2 scores per side")
    if not (0 < ratio <= 1):
        raise ValidationError(f"sample ratio must be in (0, 1], got {ratio}")
    ma = math.ceil(ratio * a.size)
    mb = math.ceil(ratio * b.size)

    hits = 0
    done = 0
    rngs = _chunk_seeds(seed, math.ceil(resamples / _CHUNK))
    for rng in rngs:
        take = min(_CHUNK, resamples - done)
        ia = rng.integers(0, a.size, size=(take, ma))
        ib = rng.integers(0, b.size, size=(take, mb))
        hits += int(np.count_nonzero(b[ib].mean(axis=1) >= a[ia].mean(axis=1)))
        done += take

    return BootstrapResult(
        system_a=system_a,
        system_b=system_b,
        metric=metric,
        p_value=hits / resamples,
        resamples=resamples,
        sample_ratio=ratio,
        seed=seed,
        n=int(min(a.size, b.size)),
        mean_a=float(a.mean()),
        mean_b=float(b.mean()),
        paired=False,
    )

"""Diversity, quality, recall, precision, and decreasing-utility metrics
over selection trajectories, plus percentile-bootstrap intervals.

Diversity values are 1 minus an average cosine similarity, so they live in
[0, 2] and larger means more diverse.  Within-day diversity averages all
ordered pairs inside a day's set; across-step diversity averages, for each
item, its similarity to the closest item shown ``lag`` days later.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, UndefinedMetricError
from .kernel import Subset
from .rng import RandomSource

DEFAULT_RESAMPLES = 10_000


@dataclass(frozen=True)
class TrajectoryMetrics:
    """Per-run results; fixed-quality runs fill the diversity/quality side,
    learning runs fill the curves."""

    marginal_diversity: float | None = None
    step_diversity: dict[int, float] | None = None
    avg_quality: float | None = None
    recall_curve: np.ndarray | None = None
    precision_curve: np.ndarray | None = None
    utility_curve: np.ndarray | None = None


def marginal_diversity(sets: list[Subset], similarity: np.ndarray) -> float:
    """1 - mean over days of the mean pairwise similarity within the day.

    Days with fewer than two items contribute no pairs and are skipped;
    if every day is degenerate the metric is undefined.
    """
    day_means = []
    for day in sets:
        if len(day) < 2:
            continue
        idx = day.as_array()
        block = similarity[np.ix_(idx, idx)]
        pairs = block[np.triu_indices(len(day), k=1)]
        day_means.append(float(pairs.mean()))
    if not day_means:
        raise UndefinedMetricError("no day has two or more items")
    return 1.0 - float(np.mean(day_means))


def step_diversity(sets: list[Subset], similarity: np.ndarray, lag: int) -> float:
    """1 - mean over (day t, item i in day t) of the maximum similarity
    between i and anything shown on day t + lag."""
    if lag < 1:
        raise InvalidArgumentError(f"lag must be >= 1, got {lag}")
    if len(sets) <= lag:
        raise UndefinedMetricError(f"trajectory of length {len(sets)} has no lag-{lag} pairs")
    closest: list[float] = []
    for t in range(len(sets) - lag):
        current, later = sets[t], sets[t + lag]
        if len(current) == 0 or len(later) == 0:
            continue
        block = similarity[np.ix_(current.as_array(), later.as_array())]
        closest.extend(block.max(axis=1).tolist())
    if not closest:
        raise UndefinedMetricError("no nonempty day pairs at this lag")
    return 1.0 - float(np.mean(closest))


def recall_curve(shown_log: list[Subset], preferred: Subset) -> np.ndarray:
    """Cumulative fraction of the preferred set displayed so far."""
    if len(preferred) == 0:
        raise UndefinedMetricError("empty preferred set")
    seen: set[int] = set()
    out = np.zeros(len(shown_log))
    target = set(preferred.indices)
    for t, shown in enumerate(shown_log):
        seen |= set(shown.indices) & target
        out[t] = len(seen) / len(preferred)
    return out


def precision_curve(shown_log: list[Subset], preferred: Subset, cumulative: bool = False) -> np.ndarray:
    """Fraction of displayed items that were preferred, per day or
    cumulatively; empty days count 0."""
    target = set(preferred.indices)
    hits = np.array([len(set(s.indices) & target) for s in shown_log], dtype=float)
    shown = np.array([len(s) for s in shown_log], dtype=float)
    if cumulative:
        hits, shown = np.cumsum(hits), np.cumsum(shown)
    return np.divide(hits, shown, out=np.zeros_like(hits), where=shown > 0)


def utility_curve(shown_log: list[Subset], preferred: Subset) -> np.ndarray:
    """Cumulative decreasing utility: a preferred item's (l+1)-th showing is
    worth 1/(l+1); non-preferred items are worth nothing."""
    target = set(preferred.indices)
    times_shown: dict[int, int] = {}
    out = np.zeros(len(shown_log))
    running = 0.0
    for t, shown in enumerate(shown_log):
        for i in shown:
            if i in target:
                prior = times_shown.get(i, 0)
                running += 1.0 / (prior + 1)
                times_shown[i] = prior + 1
        out[t] = running
    return out


def bootstrap_ci(
    run_values,
    level: float = 0.95,
    n_resamples: int = DEFAULT_RESAMPLES,
    rng: RandomSource | None = None,
) -> tuple[float, float]:
    """Percentile bootstrap interval for the mean of per-run values."""
    values = np.asarray(run_values, dtype=float)
    if values.ndim != 1 or values.shape[0] < 2:
        raise InvalidArgumentError("need at least two run values")
    if not 0.0 < level < 1.0:
        raise InvalidArgumentError(f"level must be in (0, 1), got {level}")
    if n_resamples < 1:
        raise InvalidArgumentError("need n_resamples >= 1")
    if rng is None:
        rng = RandomSource(0)
    n = values.shape[0]
    draws = rng.integers(0, n, size=(n_resamples, n))
    means = values[draws].mean(axis=1)
    tail = 100.0 * (1.0 - level) / 2.0
    low, high = np.percentile(means, [tail, 100.0 - tail])
    return float(low), float(high)

"""Desk-scale experiment harness.

Two protocols over synthetic corpora:

* fixed quality: weekly blocks of days share one freshly generated corpus
  with proximity-derived quality; every strategy picks one size-k set per
  day (the across-step chain restarts each week), and diversity/quality
  metrics are averaged per run.
* learning: one corpus per run, a synthetic user with a sparse topic
  preference, and the feedback loop of the learning module; recall,
  cumulative precision, and decreasing utility are logged per step.

Corpora are seeded by (root seed, run, week) only, so every strategy faces
identical article pools; selection streams are seeded by (root seed,
strategy, run), so adding a strategy never perturbs the others.  All rows
are emitted in a fixed order, making output byte-reproducible.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .corpus import (
    Corpus,
    CorpusConfig,
    generate_synthetic,
    neighbor_features,
    proximity_quality,
)
from .errors import DynamicRangeError, IllConditionedError, InfeasibleCardinalityError
from .kernel import Subset
from .learning import Strategy, SyntheticUser, run_learning, select
from .metrics import (
    bootstrap_ci,
    marginal_diversity,
    precision_curve,
    recall_curve,
    step_diversity,
    utility_curve,
)
from .rng import RandomSource, derive_seed

log = logging.getLogger(__name__)

FIXED_METRICS = ("marginal_diversity", "step_diversity_1", "step_diversity_2", "avg_quality")
LEARNING_METRICS = ("recall", "precision_cum", "utility")


@dataclass(frozen=True)
class Row:
    run: str
    strategy: str
    metric: str
    t: int | None
    value: float


@dataclass(frozen=True)
class ExperimentResult:
    rows: list[Row]
    summaries: list[Row]
    exclusions: list[tuple[str, int, str]]  # (strategy, run, reason)

    def final_values(self, strategy: str, metric: str) -> list[float]:
        """Per-run values of a metric (at the last step for curve metrics)."""
        by_run: dict[str, tuple[int, float]] = {}
        for row in self.rows:
            if row.strategy != strategy or row.metric != metric:
                continue
            t = -1 if row.t is None else row.t
            if row.run not in by_run or t >= by_run[row.run][0]:
                by_run[row.run] = (t, row.value)
        return [v for _, v in sorted(by_run.items(), key=lambda kv: int(kv[0]))]


@dataclass(frozen=True)
class FixedQualityConfig:
    n_items: int = 200
    n_topics: int = 10
    vocab_size: int = 400
    topic_concentration: float = 0.1
    m_neighbors: int = 20
    alpha: float = 0.4
    k: int = 5
    days: int = 30
    days_per_week: int = 7
    runs: int = 20
    strategies: tuple[Strategy, ...] = ()
    seed: int = 0
    bootstrap_level: float = 0.95
    bootstrap_resamples: int = 10_000


@dataclass(frozen=True)
class LearningExperimentConfig:
    n_items: int = 500
    n_topics: int = 10
    vocab_size: int = 600
    topic_concentration: float = 0.1
    m_neighbors: int = 50
    preference: tuple[float, ...] = (0.7, 0.2, 0.1)
    n_preferred: int = 50
    k: int = 10
    steps: int = 100
    eta: float = 2.0
    runs: int = 20
    strategies: tuple[Strategy, ...] = ()
    seed: int = 0
    bootstrap_level: float = 0.95
    bootstrap_resamples: int = 10_000


def _week_lengths(days: int, days_per_week: int) -> list[int]:
    full, tail = divmod(days, days_per_week)
    return [days_per_week] * full + ([tail] if tail else [])


def _prepared_week(config: FixedQualityConfig, run: int, week: int) -> tuple[Corpus, np.ndarray]:
    """Corpus for one (run, week) block with neighbor features installed and
    relative proximity quality (max 1, so kernel spectra stay in range)."""
    corpus_cfg = CorpusConfig(
        n_items=config.n_items,
        n_topics=config.n_topics,
        vocab_size=config.vocab_size,
        topic_concentration=config.topic_concentration,
        seed=derive_seed(config.seed, "corpus", run, week),
    )
    corpus = generate_synthetic(corpus_cfg)
    features = neighbor_features(corpus.similarity, config.m_neighbors)
    quality = proximity_quality(corpus.similarity, config.alpha)
    quality = quality / quality.max()
    return corpus.with_features(features=features, qualities=quality), quality


def _fixed_quality_single(config: FixedQualityConfig, strategy: Strategy, run: int) -> dict[str, float]:
    per_week: dict[str, list[float]] = {m: [] for m in FIXED_METRICS}
    for week, n_days in enumerate(_week_lengths(config.days, config.days_per_week)):
        corpus, quality = _prepared_week(config, run, week)
        rng = RandomSource(derive_seed(config.seed, "select", strategy.name, run, week))
        sets: list[Subset] = []
        previous: Subset | None = None
        for day in range(n_days):
            shown = select(strategy, corpus, quality, config.k, previous, rng.derive("day", day))
            sets.append(shown)
            previous = shown
        per_week["marginal_diversity"].append(marginal_diversity(sets, corpus.similarity))
        if n_days > 1:
            per_week["step_diversity_1"].append(step_diversity(sets, corpus.similarity, 1))
        if n_days > 2:
            per_week["step_diversity_2"].append(step_diversity(sets, corpus.similarity, 2))
        per_week["avg_quality"].append(
            float(np.mean([quality[list(s.indices)].mean() for s in sets]))
        )
    return {m: float(np.mean(vals)) for m, vals in per_week.items() if vals}


def _learning_single(config: LearningExperimentConfig, strategy: Strategy, run: int) -> dict[str, np.ndarray]:
    corpus_cfg = CorpusConfig(
        n_items=config.n_items,
        n_topics=config.n_topics,
        vocab_size=config.vocab_size,
        topic_concentration=config.topic_concentration,
        seed=derive_seed(config.seed, "corpus", run),
    )
    corpus = generate_synthetic(corpus_cfg)
    features = neighbor_features(corpus.similarity, config.m_neighbors)
    corpus = corpus.with_features(features=features)
    preference = np.zeros(config.n_topics)
    preference[: len(config.preference)] = config.preference
    user = SyntheticUser.from_topic_preference(preference, corpus, config.n_preferred)
    steps = run_learning(
        corpus,
        user,
        strategy,
        k=config.k,
        steps=config.steps,
        eta=config.eta,
        seed=derive_seed(config.seed, "learn", strategy.name, run),
    )
    shown = [s.shown for s in steps]
    return {
        "recall": recall_curve(shown, user.preferred_set),
        "precision_cum": precision_curve(shown, user.preferred_set, cumulative=True),
        "utility": utility_curve(shown, user.preferred_set),
    }


def _dispatch(tasks, worker, threads: int) -> dict:
    """Run (strategy, run) tasks, catching per-run strategy infeasibility.

    Returns {key: result-or-exception-string}; ordering of execution does
    not matter because every task derives its own random streams.
    """
    results: dict = {}

    def guarded(key):
        strategy, run = key
        try:
            return worker(strategy, run)
        except (InfeasibleCardinalityError, IllConditionedError, DynamicRangeError) as exc:
            log.warning("run %d of %s excluded: %s", run, strategy.name, exc)
            return exc

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for key, res in zip(tasks, pool.map(guarded, tasks)):
                results[key] = res
    else:
        for key in tasks:
            results[key] = guarded(key)
    return results


def _summaries(
    strategies: tuple[Strategy, ...],
    metrics: tuple[str, ...],
    values: dict[tuple[str, str], list[float]],
    seed: int,
    level: float,
    resamples: int,
) -> list[Row]:
    out: list[Row] = []
    for strategy in strategies:
        for metric in metrics:
            vals = values.get((strategy.name, metric), [])
            if len(vals) < 2:
                continue
            rng = RandomSource(derive_seed(seed, "bootstrap", strategy.name, metric))
            low, high = bootstrap_ci(vals, level=level, n_resamples=resamples, rng=rng)
            out.append(Row("summary", strategy.name, f"{metric}_mean", None, float(np.mean(vals))))
            out.append(Row("summary", strategy.name, f"{metric}_ci_low", None, low))
            out.append(Row("summary", strategy.name, f"{metric}_ci_high", None, high))
    return out


def run_fixed_quality(config: FixedQualityConfig, threads: int = 1) -> ExperimentResult:
    tasks = [(s, r) for s in config.strategies for r in range(config.runs)]
    results = _dispatch(tasks, lambda s, r: _fixed_quality_single(config, s, r), threads)
    rows: list[Row] = []
    exclusions: list[tuple[str, int, str]] = []
    values: dict[tuple[str, str], list[float]] = {}
    for strategy in config.strategies:
        for run in range(config.runs):
            res = results[(strategy, run)]
            if isinstance(res, Exception):
                exclusions.append((strategy.name, run, str(res)))
                rows.append(Row(str(run), strategy.name, "excluded", None, 1.0))
                continue
            for metric in FIXED_METRICS:
                if metric not in res:
                    continue
                rows.append(Row(str(run), strategy.name, metric, None, res[metric]))
                values.setdefault((strategy.name, metric), []).append(res[metric])
    summaries = _summaries(
        config.strategies, FIXED_METRICS, values, config.seed,
        config.bootstrap_level, config.bootstrap_resamples,
    )
    return ExperimentResult(rows, summaries, exclusions)


def run_learning_experiment(config: LearningExperimentConfig, threads: int = 1) -> ExperimentResult:
    tasks = [(s, r) for s in config.strategies for r in range(config.runs)]
    results = _dispatch(tasks, lambda s, r: _learning_single(config, s, r), threads)
    rows: list[Row] = []
    exclusions: list[tuple[str, int, str]] = []
    finals: dict[tuple[str, str], list[float]] = {}
    for strategy in config.strategies:
        for run in range(config.runs):
            res = results[(strategy, run)]
            if isinstance(res, Exception):
                exclusions.append((strategy.name, run, str(res)))
                rows.append(Row(str(run), strategy.name, "excluded", None, 1.0))
                continue
            for metric in LEARNING_METRICS:
                curve = res[metric]
                for t, value in enumerate(curve, start=1):
                    rows.append(Row(str(run), strategy.name, metric, t, float(value)))
                finals.setdefault((strategy.name, f"{metric}_final"), []).append(float(curve[-1]))
    summaries = _summaries(
        config.strategies,
        tuple(f"{m}_final" for m in LEARNING_METRICS),
        finals,
        config.seed,
        config.bootstrap_level,
        config.bootstrap_resamples,
    )
    return ExperimentResult(rows, summaries, exclusions)

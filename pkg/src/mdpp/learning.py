"""Interactive quality learning: log-linear scores, additive feedback
updates, and the five selection strategies they drive.

Quality is exp(theta . f_i) over topic-mixture features.  After each shown
set the parameter vector moves toward the average features of preferred
items and away from the average features of rejected ones.  Selection
ranges from quality-blind (uniform) through quality-only (weighted) to the
kernel methods that trade quality against within-set and across-step
diversity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Corpus
from .errors import InfeasibleCardinalityError, InvalidArgumentError
from .kernel import Kernel, Subset, build_ensemble
from .markov import mkdpp_initial_sample, mkdpp_transition_sample
from .rng import RandomSource
from .sampler import sample_kdpp


@dataclass(frozen=True)
class QualityModel:
    theta: np.ndarray
    eta: float

    def __post_init__(self):
        if not np.all(np.isfinite(self.theta)):
            raise InvalidArgumentError("theta must be finite")
        if not self.eta > 0:
            raise InvalidArgumentError("learning rate must be positive")

    @classmethod
    def initial(cls, dim: int, eta: float) -> QualityModel:
        return cls(np.zeros(dim), eta)


@dataclass(frozen=True)
class Feedback:
    preferred: Subset
    rejected: Subset

    def __post_init__(self):
        if not self.preferred.isdisjoint(self.rejected):
            raise InvalidArgumentError("preferred and rejected sets overlap")

    @property
    def shown(self) -> Subset:
        return self.preferred.union(self.rejected)


@dataclass(frozen=True)
class SyntheticUser:
    """Deterministic judge: an item is preferred iff it belongs to the
    fixed preferred set (the top scorers against a topic preference)."""

    preference: np.ndarray
    preferred_set: Subset

    @classmethod
    def from_topic_preference(cls, preference, corpus: Corpus, n_preferred: int) -> SyntheticUser:
        pref = np.asarray(preference, dtype=float)
        if pref.shape != (corpus.topic_dim,):
            raise InvalidArgumentError(
                f"preference has shape {pref.shape}, corpus topics {corpus.topic_dim}"
            )
        if np.any(pref < 0):
            raise InvalidArgumentError("preference weights must be nonnegative")
        if not 1 <= n_preferred <= corpus.n_items:
            raise InvalidArgumentError("n_preferred out of range")
        scores = corpus.topic_mixtures @ pref
        top = np.argsort(-scores, kind="stable")[:n_preferred]
        return cls(pref, Subset.of(top.tolist(), corpus.n_items))


def quality_scores(model: QualityModel, corpus: Corpus) -> np.ndarray:
    """q_i = exp(theta . f_i), strictly positive."""
    feats = corpus.topic_mixtures
    if feats.shape[1] != model.theta.shape[0]:
        raise InvalidArgumentError(
            f"model dimension {model.theta.shape[0]} != corpus topics {feats.shape[1]}"
        )
    return np.exp(feats @ model.theta)


def update(model: QualityModel, feedback: Feedback, corpus: Corpus) -> QualityModel:
    """One additive step: theta += eta * (mean preferred f - mean rejected f).

    An empty side contributes the zero vector, the continuous completion of
    the averaged rule.
    """
    feats = corpus.topic_mixtures
    dim = feats.shape[1]
    pos = feats[list(feedback.preferred)].mean(axis=0) if len(feedback.preferred) else np.zeros(dim)
    neg = feats[list(feedback.rejected)].mean(axis=0) if len(feedback.rejected) else np.zeros(dim)
    return QualityModel(model.theta + model.eta * (pos - neg), model.eta)


def simulate_user(user: SyntheticUser, shown: Subset) -> Feedback:
    """Partition the shown set by membership in the preferred set."""
    liked = [i for i in shown if i in user.preferred_set]
    disliked = [i for i in shown if i not in user.preferred_set]
    return Feedback(Subset.of(liked, shown.n), Subset.of(disliked, shown.n))


@dataclass(frozen=True)
class Strategy:
    """One of: uniform, weighted, kdpp, kdpp-threshold:<t>, mkdpp."""

    kind: str
    threshold: float | None = None

    _KINDS = ("uniform", "weighted", "kdpp", "kdpp-threshold", "mkdpp")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise InvalidArgumentError(f"unknown strategy {self.kind!r}")
        if (self.kind == "kdpp-threshold") != (self.threshold is not None):
            raise InvalidArgumentError("exactly the kdpp-threshold strategy takes a threshold")

    @classmethod
    def parse(cls, text: str) -> Strategy:
        if text.startswith("kdpp-threshold:"):
            return cls("kdpp-threshold", float(text.split(":", 1)[1]))
        return cls(text)

    @property
    def name(self) -> str:
        if self.threshold is not None:
            return f"kdpp-threshold:{self.threshold:g}"
        return self.kind

    @property
    def uses_previous(self) -> bool:
        return self.kind in ("kdpp-threshold", "mkdpp")


def _weighted_without_replacement(weights: np.ndarray, k: int, rng: RandomSource) -> list[int]:
    """Sequential proportional draws, renormalizing after each removal."""
    weights = weights.astype(float).copy()
    picks: list[int] = []
    for _ in range(k):
        total = weights.sum()
        if total <= 0:
            raise InfeasibleCardinalityError("weights exhausted before k draws")
        cdf = np.cumsum(weights / total)
        idx = int(np.searchsorted(cdf, rng.uniform(), side="right"))
        idx = min(idx, weights.shape[0] - 1)
        while weights[idx] <= 0.0 and idx > 0:
            idx -= 1
        picks.append(idx)
        weights[idx] = 0.0
    return picks


def _diversity_kernel(quality: np.ndarray, features: np.ndarray) -> Kernel:
    # Rescaling quality leaves every fixed-size selection law unchanged
    # (numerator and normalizer pick up the same power) and keeps the
    # eigenvalue range floating-point friendly.
    return build_ensemble(quality / quality.max(), features)


def select(
    strategy: Strategy,
    corpus: Corpus,
    quality: np.ndarray,
    k: int,
    previous: Subset | None,
    rng: RandomSource,
) -> Subset:
    """Draw the size-k display set for one round.

    ``previous`` (the set shown last round) matters only to the threshold
    heuristic and to the across-step chain; with no previous set the chain
    falls back to its stationary initial draw.
    """
    n = corpus.n_items
    if not 1 <= k <= n:
        raise InvalidArgumentError(f"need 1 <= k <= {n}, got k={k}")
    if quality.shape != (n,):
        raise InvalidArgumentError("quality vector does not match the corpus")
    if strategy.kind == "uniform":
        return Subset.of(rng.permutation(n)[:k].tolist(), n)
    if strategy.kind == "weighted":
        return Subset.of(_weighted_without_replacement(quality, k, rng), n)
    if strategy.kind == "kdpp":
        kern = _diversity_kernel(quality, corpus.features)
        return sample_kdpp(kern.decomposition, k, rng)
    if strategy.kind == "kdpp-threshold":
        survivors = np.arange(n)
        if previous is not None and len(previous):
            too_close = (
                corpus.similarity[:, previous.as_array()].max(axis=1) > strategy.threshold
            )
            survivors = np.flatnonzero(~too_close)
        if survivors.shape[0] < k:
            raise InfeasibleCardinalityError(
                f"threshold {strategy.threshold} leaves {survivors.shape[0]} items, need {k}"
            )
        kern = _diversity_kernel(quality[survivors], corpus.features[survivors])
        local = sample_kdpp(kern.decomposition, k, rng)
        return Subset.of(survivors[list(local.indices)].tolist(), n)
    # mkdpp
    kern = _diversity_kernel(quality, corpus.features)
    if previous is None:
        return mkdpp_initial_sample(kern, k, rng)
    return mkdpp_transition_sample(kern, previous, k, rng)


@dataclass(frozen=True)
class LearningStep:
    shown: Subset
    feedback: Feedback
    theta: np.ndarray


def run_learning(
    corpus: Corpus,
    user: SyntheticUser,
    strategy: Strategy,
    k: int,
    steps: int,
    eta: float,
    seed: int,
) -> list[LearningStep]:
    """Run the feedback loop for ``steps`` rounds and log every round.

    theta starts at zero (the first selection is quality-blind), and the
    whole trajectory is a pure function of (corpus, user, strategy, seed).
    """
    if steps < 1:
        raise InvalidArgumentError(f"need steps >= 1, got {steps}")
    rng = RandomSource(seed)
    model = QualityModel.initial(corpus.topic_dim, eta)
    previous: Subset | None = None
    log: list[LearningStep] = []
    for t in range(1, steps + 1):
        scores = quality_scores(model, corpus)
        shown = select(strategy, corpus, scores, k, previous, rng.derive("select", t))
        feedback = simulate_user(user, shown)
        model = update(model, feedback, corpus)
        log.append(LearningStep(shown, feedback, model.theta))
        previous = shown
    return log

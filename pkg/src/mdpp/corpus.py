"""Synthetic article corpora and the feature pipeline built on them.

Items carry three representations: a sparse tf-idf style term vector (used
only to compute cosine similarities), a topic-mixture vector used by the
quality-learning loop, and a unit-length similarity feature vector used to
assemble ensemble kernels.  The generator draws topic mixtures from a
Dirichlet and tokens from topic-specific term distributions, so cosine
similarity correlates with topic overlap.

Similarity features for experiments come from ``neighbor_features``: the
j-th coordinate of item i's vector is set when j is among i's m nearest
neighbors by cosine similarity, then the vector is scaled to unit length
(inner products stay proportional to shared-neighbor counts).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .errors import DynamicRangeError, InvalidArgumentError
from .rng import RandomSource

EXP_OVERFLOW_LIMIT = 700.0  # log of float64 max, rounded down


@dataclass(frozen=True)
class Item:
    id: int
    raw_vector: dict[int, float]  # sparse unit-norm term weights
    topic_mixture: np.ndarray  # nonnegative, sums to 1
    features: np.ndarray  # unit length
    quality: float

    def __post_init__(self):
        if abs(float(self.topic_mixture.sum()) - 1.0) > 1e-8:
            raise InvalidArgumentError(f"topic mixture of item {self.id} does not sum to 1")
        norm = float(np.linalg.norm(self.features))
        if abs(norm - 1.0) > 1e-8:
            raise InvalidArgumentError(f"feature vector of item {self.id} is not unit length")
        if not self.quality > 0:
            raise InvalidArgumentError(f"quality of item {self.id} must be positive")


@dataclass(frozen=True)
class Corpus:
    items: tuple[Item, ...]
    similarity: np.ndarray  # cosine similarities, diagonal exactly 1

    def __post_init__(self):
        n = len(self.items)
        if self.similarity.shape != (n, n):
            raise InvalidArgumentError("similarity matrix shape does not match item count")
        if np.max(np.abs(self.similarity - self.similarity.T), initial=0.0) > 1e-10:
            raise InvalidArgumentError("similarity matrix must be symmetric")
        if n and np.max(np.abs(np.diag(self.similarity) - 1.0)) > 0.0:
            raise InvalidArgumentError("similarity diagonal must be exactly 1")
        self.similarity.setflags(write=False)

    @property
    def n_items(self) -> int:
        return len(self.items)

    @property
    def topic_dim(self) -> int:
        return self.items[0].topic_mixture.shape[0]

    @property
    def topic_mixtures(self) -> np.ndarray:
        return np.stack([it.topic_mixture for it in self.items])

    @property
    def features(self) -> np.ndarray:
        return np.stack([it.features for it in self.items])

    @property
    def qualities(self) -> np.ndarray:
        return np.array([it.quality for it in self.items])

    def with_features(self, features: np.ndarray | None = None,
                      qualities: np.ndarray | None = None) -> Corpus:
        """Copy of the corpus with replaced similarity features and/or
        quality scores (the usual step after ``neighbor_features`` /
        ``proximity_quality``)."""
        items = []
        for i, it in enumerate(self.items):
            changes = {}
            if features is not None:
                changes["features"] = features[i].copy()
            if qualities is not None:
                changes["quality"] = float(qualities[i])
            items.append(replace(it, **changes) if changes else it)
        return Corpus(tuple(items), self.similarity)


@dataclass(frozen=True)
class CorpusConfig:
    n_items: int
    n_topics: int
    vocab_size: int
    topic_concentration: float
    seed: int

    def __post_init__(self):
        if min(self.n_items, self.n_topics, self.vocab_size) < 1:
            raise InvalidArgumentError("all corpus counts must be >= 1")
        if not self.topic_concentration > 0:
            raise InvalidArgumentError("topic concentration must be positive")


# Term-distribution sharpness and tokens per item; fixed rather than exposed
# because only the topic mixture structure matters downstream.
_TERM_CONCENTRATION = 0.05
_TOKENS_LOW, _TOKENS_HIGH = 80, 160


def generate_synthetic(config: CorpusConfig) -> Corpus:
    """Deterministic synthetic corpus: topic mixtures from a Dirichlet with
    the configured concentration, token counts from the mixed topic-term
    distributions, tf-idf weighting, and cosine similarities.

    Similarity features default to the normalized tf-idf vector itself and
    quality to 1; experiments typically replace both via ``with_features``.
    """
    rng = RandomSource(config.seed)
    n, m, v = config.n_items, config.n_topics, config.vocab_size
    topic_rng = rng.derive("topic-terms")
    topic_terms = np.stack(
        [topic_rng.dirichlet(np.full(v, _TERM_CONCENTRATION)) for _ in range(m)]
    )
    mix_rng = rng.derive("mixtures")
    mixtures = np.stack(
        [mix_rng.dirichlet(np.full(m, config.topic_concentration)) for _ in range(n)]
    )
    mixtures /= mixtures.sum(axis=1, keepdims=True)
    token_rng = rng.derive("tokens")
    counts = np.zeros((n, v))
    for i in range(n):
        n_tokens = int(token_rng.integers(_TOKENS_LOW, _TOKENS_HIGH + 1))
        term_probs = mixtures[i] @ topic_terms
        term_probs = term_probs / term_probs.sum()
        counts[i] = token_rng.multinomial(n_tokens, term_probs)

    tf = np.where(counts > 0, 1.0 + np.log(np.maximum(counts, 1.0)), 0.0)
    doc_freq = (counts > 0).sum(axis=0)
    idf = np.log((1.0 + n) / (1.0 + doc_freq)) + 1.0
    weights = tf * idf
    norms = np.linalg.norm(weights, axis=1, keepdims=True)
    weights = weights / np.where(norms > 0, norms, 1.0)

    sim = weights @ weights.T
    sim = np.clip((sim + sim.T) / 2.0, -1.0, 1.0)
    np.fill_diagonal(sim, 1.0)

    items = []
    for i in range(n):
        sparse = {int(j): float(weights[i, j]) for j in np.flatnonzero(weights[i])}
        items.append(
            Item(
                id=i,
                raw_vector=sparse,
                topic_mixture=mixtures[i].copy(),
                features=weights[i].copy(),
                quality=1.0,
            )
        )
    return Corpus(tuple(items), sim)


def neighbor_features(similarity: np.ndarray, m: int) -> np.ndarray:
    """Unit-scaled nearest-neighbor indicator features.

    Row i marks the m most similar other items (self excluded, ties broken
    by ascending index) with 1/sqrt(m).  A pure function of its inputs.
    """
    n = similarity.shape[0]
    if not 1 <= m < n:
        raise InvalidArgumentError(f"need 1 <= m < {n}, got m={m}")
    features = np.zeros((n, n))
    fill = 1.0 / np.sqrt(m)
    for i in range(n):
        scores = similarity[i].copy()
        scores[i] = -np.inf
        nearest = np.argsort(-scores, kind="stable")[:m]
        features[i, nearest] = fill
    return features


def proximity_quality(similarity: np.ndarray, alpha: float) -> np.ndarray:
    """Quality scores exp(alpha * d_i) where d_i sums item i's cosine
    similarity to every other item.  Rejects alpha large enough to overflow."""
    if not np.isfinite(alpha):
        raise InvalidArgumentError("alpha must be finite")
    totals = similarity.sum(axis=1) - np.diag(similarity)
    scaled = alpha * totals
    if np.max(scaled, initial=0.0) > EXP_OVERFLOW_LIMIT:
        raise DynamicRangeError(
            f"alpha * proximity reaches {np.max(scaled):.1f} > {EXP_OVERFLOW_LIMIT}; "
            "use a smaller alpha"
        )
    return np.exp(scaled)


def save_corpus(corpus: Corpus, path) -> None:
    """JSON serialization: per-item sparse term vectors plus metadata.

    The similarity matrix is recomputed on load from the sparse vectors (or
    cache it separately as CSV via the matrix I/O helpers).
    """
    payload = {
        "n_items": corpus.n_items,
        "items": [
            {
                "id": it.id,
                "raw_vector": {str(k): v for k, v in sorted(it.raw_vector.items())},
                "topic_mixture": [float(x) for x in it.topic_mixture],
                "features": [float(x) for x in it.features],
                "quality": it.quality,
            }
            for it in corpus.items
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, separators=(",", ":"), sort_keys=True)


def load_corpus(path, similarity: np.ndarray | None = None) -> Corpus:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    items = tuple(
        Item(
            id=int(rec["id"]),
            raw_vector={int(k): float(v) for k, v in rec["raw_vector"].items()},
            topic_mixture=np.array(rec["topic_mixture"]),
            features=np.array(rec["features"]),
            quality=float(rec["quality"]),
        )
        for rec in payload["items"]
    )
    if similarity is None:
        dim = 1 + max((max(it.raw_vector) for it in items if it.raw_vector), default=0)
        dense = np.zeros((len(items), dim))
        for i, it in enumerate(items):
            for j, w in it.raw_vector.items():
                dense[i, j] = w
        similarity = np.clip(dense @ dense.T, -1.0, 1.0)
        similarity = (similarity + similarity.T) / 2.0
        np.fill_diagonal(similarity, 1.0)
    return Corpus(items, similarity)

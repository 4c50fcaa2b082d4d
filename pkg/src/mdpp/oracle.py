"""Brute-force enumeration of exact set probabilities on small ground sets.

Everything here is computed directly from determinant ratios, deliberately
bypassing the eigenbasis shortcuts and conditional-kernel machinery used by
the samplers, so that agreement between the two paths is meaningful
evidence of correctness.  Ground sets are capped at 16 items (2^16
determinants); chain compositions at 10.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Callable

import numpy as np

from .errors import (
    ChainUndefinedError,
    GroundSetTooLargeError,
    InvalidArgumentError,
    OracleInconsistencyError,
)
from .kernel import Kernel, KernelForm, Subset, elementary_symmetric
from .markov import ChainVariant
from .rng import RandomSource

ENUM_MAX_N = 16
CHAIN_MAX_N = 10
NORMALIZER_RTOL = 1e-8
PROB_SUM_TOL = 1e-8


@dataclass(frozen=True)
class SetDistribution:
    """Probabilities over subsets of {0..n-1}, keyed by bitmask."""

    n: int
    probabilities: dict[int, float]

    def __post_init__(self):
        limit = 1 << self.n
        for mask, p in self.probabilities.items():
            if not 0 <= mask < limit:
                raise InvalidArgumentError(f"bitmask {mask} invalid for n={self.n}")
            if p < -PROB_SUM_TOL:
                raise InvalidArgumentError(f"negative probability {p} for mask {mask}")
        total = sum(self.probabilities.values())
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise InvalidArgumentError(f"probabilities sum to {total!r}, not 1")

    def prob(self, subset: Subset) -> float:
        return self.probabilities.get(subset.bitmask(), 0.0)

    def items_sorted(self) -> list[tuple[int, float]]:
        return sorted(self.probabilities.items())


def tv_distance(p: SetDistribution, q: SetDistribution) -> float:
    """Total variation distance: half the l1 distance over the union support."""
    if p.n != q.n:
        raise InvalidArgumentError(f"distributions on different ground sets ({p.n} vs {q.n})")
    keys = set(p.probabilities) | set(q.probabilities)
    return 0.5 * sum(abs(p.probabilities.get(m, 0.0) - q.probabilities.get(m, 0.0)) for m in keys)


def _mask_indices(mask: int, n: int) -> np.ndarray:
    return np.array([i for i in range(n) if mask >> i & 1], dtype=np.intp)


def _det_sub(entries: np.ndarray, idx: np.ndarray) -> float:
    if idx.size == 0:
        return 1.0
    return float(np.linalg.det(entries[np.ix_(idx, idx)]))


def _det_masked(entries: np.ndarray, mask: int, n: int) -> float:
    return _det_sub(entries, _mask_indices(mask, n))


def _guard(n: int, limit: int) -> None:
    if n > limit:
        raise GroundSetTooLargeError(f"enumeration supports n <= {limit}, got {n}")


def _ensemble_entries(kernel: Kernel) -> np.ndarray:
    if kernel.form is not KernelForm.ENSEMBLE:
        raise InvalidArgumentError("enumeration needs an ensemble-form kernel")
    return kernel.entries


def _transition_base_direct(entries: np.ndarray) -> np.ndarray:
    """Chain transition base computed by a direct solve of (I - L) X = L,
    independent of the eigenvalue-map construction it is used to verify."""
    n = entries.shape[0]
    eigmax = float(np.linalg.eigvalsh(entries).max(initial=0.0))
    if eigmax >= 1.0 - 1e-10:
        raise ChainUndefinedError(
            f"chain undefined: ensemble kernel has eigenvalue {eigmax:.12g} >= 1"
        )
    base = np.linalg.solve(np.eye(n) - entries, entries)
    return (base + base.T) / 2.0


def enumerate_dpp(kernel: Kernel) -> SetDistribution:
    """Exact DPP probabilities for every subset, with the brute-force sum
    cross-checked against det(L + I)."""
    entries = _ensemble_entries(kernel)
    n = kernel.n
    _guard(n, ENUM_MAX_N)
    dets = {mask: max(_det_masked(entries, mask, n), 0.0) for mask in range(1 << n)}
    total = sum(dets.values())
    closed = float(np.linalg.det(entries + np.eye(n)))
    if abs(total - closed) > NORMALIZER_RTOL * max(1.0, abs(closed)):
        raise OracleInconsistencyError(
            f"subset-determinant sum {total!r} != det(L+I) {closed!r}"
        )
    return SetDistribution(n, {m: d / total for m, d in dets.items()})


def enumerate_kdpp(kernel: Kernel, k: int) -> SetDistribution:
    """Exact size-k DPP probabilities; the brute-force normalizer is checked
    against the elementary symmetric polynomial e_k of the eigenvalues."""
    entries = _ensemble_entries(kernel)
    n = kernel.n
    _guard(n, ENUM_MAX_N)
    if not 0 <= k <= n:
        raise InvalidArgumentError(f"need 0 <= k <= {n}, got {k}")
    dets: dict[int, float] = {}
    for combo in combinations(range(n), k):
        idx = np.array(combo, dtype=np.intp)
        mask = sum(1 << i for i in combo)
        dets[mask] = max(_det_sub(entries, idx), 0.0)
    total = sum(dets.values())
    closed = float(elementary_symmetric(kernel.decomposition.eigenvalues, k)[k])
    if abs(total - closed) > NORMALIZER_RTOL * max(1.0, abs(closed)):
        raise OracleInconsistencyError(
            f"size-{k} determinant sum {total!r} != e_k {closed!r}"
        )
    if total <= 0.0:
        raise InvalidArgumentError(f"size-{k} sets carry no probability mass")
    return SetDistribution(n, {m: d / total for m, d in dets.items()})


def _mdpp_transition_row(base: np.ndarray, prev_mask: int, n: int) -> dict[int, float]:
    """Transition probabilities out of ``prev_mask``: next sets are subsets
    of the complement, with mass det(M_{prev u next}) / det(M + I_comp)."""
    comp_mask = ((1 << n) - 1) ^ prev_mask
    comp = _mask_indices(comp_mask, n)
    shifted = base.copy()
    shifted[comp, comp] += 1.0
    denom = float(np.linalg.det(shifted))
    row: dict[int, float] = {}
    sub = comp_mask
    while True:
        union = prev_mask | sub
        row[sub] = max(_det_masked(base, union, n), 0.0) / denom
        if sub == 0:
            break
        sub = (sub - 1) & comp_mask
    return row


def _mkdpp_transition_row(entries: np.ndarray, prev_mask: int, k: int, n: int) -> dict[int, float]:
    """Fixed-size transition out of ``prev_mask``: size-k disjoint sets with
    mass det(L_{prev u next}) normalized over all such sets."""
    comp = [i for i in range(n) if not prev_mask >> i & 1]
    weights: dict[int, float] = {}
    for combo in combinations(comp, k):
        mask = sum(1 << i for i in combo)
        weights[mask] = max(_det_masked(entries, prev_mask | mask, n), 0.0)
    total = sum(weights.values())
    if total <= 0.0:
        raise InvalidArgumentError(
            f"no size-{k} continuation has positive mass after mask {prev_mask:b}"
        )
    return {m: w / total for m, w in weights.items()}


def enumerate_mkdpp_margin(kernel: Kernel, k: int) -> SetDistribution:
    """Stationary margin of the fixed-size chain: P(Y) proportional to the
    sum over disjoint size-k completions A of det(L_{Y u A})."""
    entries = _ensemble_entries(kernel)
    n = kernel.n
    _guard(n, CHAIN_MAX_N)
    if not 1 <= k <= n // 2:
        raise InvalidArgumentError(f"need 1 <= k <= n/2, got k={k} with n={n}")
    weights: dict[int, float] = {}
    for combo in combinations(range(n), k):
        mask = sum(1 << i for i in combo)
        others = [i for i in range(n) if not mask >> i & 1]
        acc = 0.0
        for completion in combinations(others, k):
            union = mask | sum(1 << i for i in completion)
            acc += max(_det_masked(entries, union, n), 0.0)
        weights[mask] = acc
    total = sum(weights.values())
    closed = comb(2 * k, k) * sum(
        max(_det_sub(entries, np.array(c, dtype=np.intp)), 0.0)
        for c in combinations(range(n), 2 * k)
    )
    if abs(total - closed) > NORMALIZER_RTOL * max(1.0, abs(closed)):
        raise OracleInconsistencyError(
            f"margin normalizer {total!r} != binom(2k,k) * size-2k sum {closed!r}"
        )
    if total <= 0.0:
        raise InvalidArgumentError(f"no size-{k} set has positive stationary mass")
    return SetDistribution(n, {m: w / total for m, w in weights.items()})


def enumerate_chain_marginal(
    kernel: Kernel, variant: ChainVariant, t: int = 2, k: int | None = None
) -> SetDistribution:
    """Margin of Y_t obtained by composing the initial distribution with
    t - 1 exact transition steps (no sampling)."""
    entries = _ensemble_entries(kernel)
    n = kernel.n
    _guard(n, CHAIN_MAX_N)
    if t < 1:
        raise InvalidArgumentError(f"need t >= 1, got {t}")
    if variant is ChainVariant.MDPP:
        current = enumerate_dpp(kernel).probabilities
        base = _transition_base_direct(entries)
        row: Callable[[int], dict[int, float]] = lambda prev: _mdpp_transition_row(base, prev, n)
    else:
        if k is None:
            raise InvalidArgumentError("fixed-size chain needs k")
        current = enumerate_mkdpp_margin(kernel, k).probabilities
        row = lambda prev: _mkdpp_transition_row(entries, prev, k, n)
    for _ in range(t - 1):
        nxt: dict[int, float] = defaultdict(float)
        for prev_mask, p_prev in current.items():
            if p_prev == 0.0:
                continue
            for next_mask, p_step in row(prev_mask).items():
                nxt[next_mask] += p_prev * p_step
        current = dict(nxt)
    return SetDistribution(n, current)


def enumerate_union(kernel: Kernel, variant: ChainVariant, k: int | None = None) -> SetDistribution:
    """Distribution of the union of two consecutive sets, composed from the
    initial distribution and one exact transition step."""
    entries = _ensemble_entries(kernel)
    n = kernel.n
    _guard(n, CHAIN_MAX_N)
    if variant is ChainVariant.MDPP:
        init = enumerate_dpp(kernel).probabilities
        base = _transition_base_direct(entries)
        row = lambda prev: _mdpp_transition_row(base, prev, n)
    else:
        if k is None:
            raise InvalidArgumentError("fixed-size chain needs k")
        init = enumerate_mkdpp_margin(kernel, k).probabilities
        row = lambda prev: _mkdpp_transition_row(entries, prev, k, n)
    union: dict[int, float] = defaultdict(float)
    for prev_mask, p_prev in init.items():
        if p_prev == 0.0:
            continue
        for next_mask, p_step in row(prev_mask).items():
            union[prev_mask | next_mask] += p_prev * p_step
    return SetDistribution(n, dict(union))


def empirical_distribution(
    sample_fn: Callable[[RandomSource], Subset], n_samples: int, rng: RandomSource
) -> SetDistribution:
    """Frequency distribution of ``n_samples`` draws from ``sample_fn``."""
    if n_samples < 1:
        raise InvalidArgumentError(f"need n_samples >= 1, got {n_samples}")
    counts: dict[int, int] = defaultdict(int)
    n = None
    for _ in range(n_samples):
        drawn = sample_fn(rng)
        if n is None:
            n = drawn.n
        counts[drawn.bitmask()] += 1
    assert n is not None
    return SetDistribution(n, {m: c / n_samples for m, c in counts.items()})

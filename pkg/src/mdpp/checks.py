"""Invariant battery: analytic identities checked by brute force.

Each check pits a closed form against an independent computation
(enumeration, direct solves, subset sums) and reports the worst deviation.
These are equalities up to round-off, not statistical claims, so the
tolerances are tight.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .kernel import (
    Kernel,
    Subset,
    elementary_symmetric,
    ensemble_from_marginal,
    marginal_from_ensemble,
    markov_base,
)
from .markov import ChainVariant
from .oracle import (
    enumerate_chain_marginal,
    enumerate_dpp,
    enumerate_kdpp,
    enumerate_mkdpp_margin,
    enumerate_union,
)

ANALYTIC_TOL = 1e-8


@dataclass(frozen=True)
class CheckResult:
    name: str
    deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tolerance


def _det(entries: np.ndarray, idx) -> float:
    idx = np.asarray(idx, dtype=np.intp)
    if idx.size == 0:
        return 1.0
    return float(np.linalg.det(entries[np.ix_(idx, idx)]))


def check_dpp_normalization(kernel: Kernel) -> CheckResult:
    """Brute-force subset-determinant sum against det(L + I)."""
    n = kernel.n
    total = sum(
        _det(kernel.entries, [i for i in range(n) if m >> i & 1]) for m in range(1 << n)
    )
    closed = float(np.linalg.det(kernel.entries + np.eye(n)))
    dev = abs(total - closed) / max(1.0, abs(closed))
    return CheckResult("dpp_normalizer_vs_det", dev, ANALYTIC_TOL)


def check_kdpp_normalization(kernel: Kernel, k: int) -> CheckResult:
    """Brute-force size-k determinant sum against e_k of the eigenvalues."""
    total = sum(_det(kernel.entries, c) for c in combinations(range(kernel.n), k))
    closed = float(elementary_symmetric(kernel.decomposition.eigenvalues, k)[k])
    dev = abs(total - closed) / max(1.0, abs(closed))
    return CheckResult("kdpp_normalizer_vs_esp", dev, ANALYTIC_TOL)


def check_conversion_round_trip(kernel: Kernel) -> CheckResult:
    """ensemble -> marginal -> ensemble is the identity."""
    back = ensemble_from_marginal(marginal_from_ensemble(kernel))
    dev = float(np.max(np.abs(back.entries - kernel.entries), initial=0.0))
    return CheckResult("conversion_round_trip", dev, ANALYTIC_TOL)


def check_union_marginal_kernel(kernel: Kernel) -> CheckResult:
    """Doubled transition base has marginal kernel equal to twice the
    base kernel's marginal: 2M(2M + I)^-1 = 2K."""
    n = kernel.n
    doubled = 2.0 * markov_base(kernel).entries
    lhs = doubled @ np.linalg.inv(doubled + np.eye(n))
    rhs = 2.0 * marginal_from_ensemble(kernel).entries
    dev = float(np.max(np.abs(lhs - rhs), initial=0.0))
    return CheckResult("union_marginal_kernel", dev, ANALYTIC_TOL)


def check_determinant_identity(kernel: Kernel) -> CheckResult:
    """det(M + I) det(L + I) = det(2M + I)."""
    n = kernel.n
    base = markov_base(kernel).entries
    lhs = float(np.linalg.det(base + np.eye(n)) * np.linalg.det(kernel.entries + np.eye(n)))
    rhs = float(np.linalg.det(2.0 * base + np.eye(n)))
    dev = abs(lhs - rhs) / max(1.0, abs(rhs))
    return CheckResult("determinant_identity", dev, ANALYTIC_TOL)


def check_superset_sum(kernel: Kernel, conditioned: Subset) -> CheckResult:
    """Sum of det(M_B) over supersets B of A equals det(M + I_complement)."""
    n = kernel.n
    base = markov_base(kernel).entries
    anchor = conditioned.bitmask()
    total = sum(
        _det(base, [i for i in range(n) if m >> i & 1])
        for m in range(1 << n)
        if m & anchor == anchor
    )
    comp = conditioned.complement().as_array()
    shifted = base.copy()
    shifted[comp, comp] += 1.0
    closed = float(np.linalg.det(shifted))
    dev = abs(total - closed) / max(1.0, abs(closed))
    return CheckResult("superset_sum_identity", dev, ANALYTIC_TOL)


def check_pairwise_repulsion(kernel: Kernel) -> CheckResult:
    """Pair containment never exceeds the product of single containments:
    K_ii K_jj - K_ij^2 <= K_ii K_jj."""
    marg = marginal_from_ensemble(kernel).entries
    n = kernel.n
    worst = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            pair = marg[i, i] * marg[j, j] - marg[i, j] ** 2
            worst = max(worst, pair - marg[i, i] * marg[j, j])
    return CheckResult("pairwise_repulsion", worst, 0.0)


def check_mdpp_stationarity(kernel: Kernel) -> CheckResult:
    """One exact transition step preserves the DPP margin."""
    composed = enumerate_chain_marginal(kernel, ChainVariant.MDPP, t=2)
    target = enumerate_dpp(kernel)
    keys = set(composed.probabilities) | set(target.probabilities)
    dev = max(
        abs(composed.probabilities.get(m, 0.0) - target.probabilities.get(m, 0.0)) for m in keys
    )
    return CheckResult("mdpp_stationarity", dev, ANALYTIC_TOL)


def check_mdpp_union_law(kernel: Kernel) -> CheckResult:
    """The union of consecutive sets is a DPP with doubled transition base."""
    n = kernel.n
    union = enumerate_union(kernel, ChainVariant.MDPP)
    doubled = 2.0 * markov_base(kernel).entries
    normalizer = float(np.linalg.det(doubled + np.eye(n)))
    dev = 0.0
    for mask in range(1 << n):
        closed = _det(doubled, [i for i in range(n) if mask >> i & 1]) / normalizer
        dev = max(dev, abs(union.probabilities.get(mask, 0.0) - closed))
    return CheckResult("mdpp_union_law", dev, ANALYTIC_TOL)


def check_mkdpp_stationarity(kernel: Kernel, k: int) -> CheckResult:
    """One exact fixed-size transition preserves the stationary margin."""
    composed = enumerate_chain_marginal(kernel, ChainVariant.MKDPP, t=2, k=k)
    target = enumerate_mkdpp_margin(kernel, k)
    keys = set(composed.probabilities) | set(target.probabilities)
    dev = max(
        abs(composed.probabilities.get(m, 0.0) - target.probabilities.get(m, 0.0)) for m in keys
    )
    return CheckResult("mkdpp_stationarity", dev, ANALYTIC_TOL)


def check_mkdpp_union_law(kernel: Kernel, k: int) -> CheckResult:
    """The union of consecutive fixed-size sets is a size-2k DPP of the base."""
    n = kernel.n
    union = enumerate_union(kernel, ChainVariant.MKDPP, k=k)
    normalizer = float(elementary_symmetric(kernel.decomposition.eigenvalues, 2 * k)[2 * k])
    dev = 0.0
    for combo in combinations(range(n), 2 * k):
        mask = sum(1 << i for i in combo)
        closed = _det(kernel.entries, combo) / normalizer
        dev = max(dev, abs(union.probabilities.get(mask, 0.0) - closed))
    stray = sum(
        p for m, p in union.probabilities.items() if bin(m).count("1") != 2 * k
    )
    return CheckResult("mkdpp_union_law", max(dev, stray), ANALYTIC_TOL)


def run_battery(kernel: Kernel, k: int) -> list[CheckResult]:
    """Every analytic check on one kernel.  ``k`` is the fixed set size for
    the size-constrained checks (the kernel needs rank >= 2k)."""
    anchor = Subset.of(range(min(2, kernel.n)), kernel.n)
    return [
        check_dpp_normalization(kernel),
        check_kdpp_normalization(kernel, k),
        check_conversion_round_trip(kernel),
        check_union_marginal_kernel(kernel),
        check_determinant_identity(kernel),
        check_superset_sum(kernel, anchor),
        check_pairwise_repulsion(kernel),
        check_mdpp_stationarity(kernel),
        check_mdpp_union_law(kernel),
        check_mkdpp_stationarity(kernel, k),
        check_mkdpp_union_law(kernel, k),
    ]

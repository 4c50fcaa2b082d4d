"""Exact DPP and fixed-size DPP samplers plus log-probability evaluators.

Sampling follows the classical spectral scheme: pick a random set of
eigenvectors (independent coin flips for the free-size process, an
elementary-symmetric-polynomial recursion for the fixed-size one), then
select items one at a time from the squared row mass of the current basis,
projecting the basis orthogonal to each chosen coordinate.
"""

from __future__ import annotations

import numpy as np

from .errors import InfeasibleCardinalityError, InvalidArgumentError
from .kernel import (
    EigenDecomposition,
    Kernel,
    KernelForm,
    Subset,
    elementary_symmetric,
    elementary_symmetric_table,
)
from .rng import RandomSource

NEG_INF = float("-inf")


def sample_dpp(decomp: EigenDecomposition, rng: RandomSource) -> Subset:
    """Draw one subset from the ensemble DPP of the decomposed kernel.

    Eigenvector n enters the projection basis with probability
    lam_n / (lam_n + 1); the basis size equals the output size.
    """
    lam = decomp.eigenvalues
    if lam.size == 0:
        return Subset.empty(0)
    coins = rng.uniform(size=lam.shape[0])
    keep = coins < lam / (lam + 1.0)
    basis = decomp.eigenvectors[:, keep].copy()
    return _projection_sample(basis, decomp.n, rng)


def sample_kdpp(decomp: EigenDecomposition, k: int, rng: RandomSource) -> Subset:
    """Draw one subset of size exactly ``k`` from the fixed-size DPP.

    The eigenvector-selection pass walks n = N..1 accepting eigenvector n
    with probability lam_n * E[k-1, n-1] / E[k, n]; the projection pass is
    shared with the free-size sampler.
    """
    lam = decomp.eigenvalues
    n = lam.shape[0]
    if k < 1 or k > n:
        raise InvalidArgumentError(f"need 1 <= k <= {n}, got k={k}")
    rank = int(np.count_nonzero(lam > 0))
    if k > rank:
        raise InfeasibleCardinalityError(
            f"cannot draw {k} items: kernel rank is {rank}"
        )
    table = elementary_symmetric_table(lam, k)
    chosen_cols: list[int] = []
    remaining = k
    for col in range(n, 0, -1):
        if remaining == 0:
            break
        if col == remaining:
            accept_prob = 1.0
        elif table[remaining, col] <= 0.0:
            accept_prob = 0.0
        else:
            accept_prob = lam[col - 1] * table[remaining - 1, col - 1] / table[remaining, col]
        if rng.uniform() < accept_prob:
            chosen_cols.append(col - 1)
            remaining -= 1
    basis = decomp.eigenvectors[:, chosen_cols].copy()
    return _projection_sample(basis, decomp.n, rng)


def _projection_sample(basis: np.ndarray, n: int, rng: RandomSource) -> Subset:
    """Item-selection phase: repeatedly pick a coordinate from the squared
    row mass of ``basis`` and shrink the basis to the orthogonal complement
    of that coordinate."""
    chosen: list[int] = []
    while basis.shape[1] > 0:
        probs = np.einsum("ij,ij->i", basis, basis)
        probs = probs / probs.sum()
        item = _inverse_cdf_draw(probs, rng)
        chosen.append(item)
        basis = _eliminate_coordinate(basis, item)
    return Subset.of(chosen, n)


def _inverse_cdf_draw(probs: np.ndarray, rng: RandomSource) -> int:
    cdf = np.cumsum(probs)
    idx = int(np.searchsorted(cdf, rng.uniform(), side="right"))
    idx = min(idx, probs.shape[0] - 1)
    while probs[idx] <= 0.0 and idx > 0:
        idx -= 1
    return idx


def _eliminate_coordinate(basis: np.ndarray, item: int) -> np.ndarray:
    """Orthonormal basis of span(basis) intersected with {v : v[item] = 0}.

    One pivot column (largest coordinate at ``item``, first on ties) is used
    to zero the row.  For an orthonormal input the eliminated columns have
    Gram matrix I + alpha alpha^T, so a single symmetric rank-one correction
    restores orthonormality exactly; no per-column sweep is needed.
    """
    row = basis[item, :]
    pivot_col = int(np.argmax(np.abs(row)))
    keep = np.ones(basis.shape[1], dtype=bool)
    keep[pivot_col] = False
    alpha = row[keep] / row[pivot_col]
    rest = basis[:, keep] - np.outer(basis[:, pivot_col], alpha)
    weight = float(alpha @ alpha)
    if weight > 0.0:
        gamma = (1.0 - 1.0 / np.sqrt(1.0 + weight)) / weight
        rest -= gamma * np.outer(rest @ alpha, alpha)
    return rest


def log_prob_dpp(kernel: Kernel, subset: Subset) -> float:
    """log P(Y = subset) under the ensemble DPP of ``kernel``.

    Zero-probability subsets return -inf rather than raising; the empty
    submatrix has determinant 1 by convention.
    """
    _check_ensemble(kernel, subset)
    log_num = _logdet_submatrix(kernel.entries, subset)
    if log_num == NEG_INF:
        return NEG_INF
    log_norm = float(np.sum(np.log1p(kernel.decomposition.eigenvalues)))
    return log_num - log_norm


def log_prob_kdpp(kernel: Kernel, subset: Subset, k: int) -> float:
    """log P(Y = subset) under the size-``k`` DPP of ``kernel``.

    The normalizer is the k-th elementary symmetric polynomial of the
    eigenvalues, not a subset enumeration.
    """
    _check_ensemble(kernel, subset)
    if len(subset) != k:
        raise InvalidArgumentError(f"subset has {len(subset)} items, expected k={k}")
    norm = float(elementary_symmetric(kernel.decomposition.eigenvalues, k)[k])
    if norm <= 0.0:
        raise InfeasibleCardinalityError(
            f"size-{k} sets carry no probability mass for this kernel"
        )
    log_num = _logdet_submatrix(kernel.entries, subset)
    if log_num == NEG_INF:
        return NEG_INF
    return log_num - float(np.log(norm))


def _logdet_submatrix(entries: np.ndarray, subset: Subset) -> float:
    if len(subset) == 0:
        return 0.0
    idx = subset.as_array()
    sign, logdet = np.linalg.slogdet(entries[np.ix_(idx, idx)])
    if sign <= 0.0:
        return NEG_INF
    return float(logdet)


def _check_ensemble(kernel: Kernel, subset: Subset) -> None:
    if kernel.form is not KernelForm.ENSEMBLE:
        raise InvalidArgumentError("probability evaluation needs an ensemble-form kernel")
    if subset.n != kernel.n:
        raise InvalidArgumentError(
            f"subset ground set size {subset.n} does not match kernel size {kernel.n}"
        )

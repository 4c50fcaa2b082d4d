"""Kernel algebra for determinantal point processes.

A DPP over a ground set of N items is parameterized either by a marginal
kernel (containment probabilities read off submatrix determinants directly)
or by an ensemble kernel (set probabilities proportional to submatrix
determinants).  Both are symmetric positive-semidefinite matrices; the two
forms are related by the eigenvalue maps

    ensemble -> marginal:   lam -> lam / (1 + lam)
    marginal -> ensemble:   lam -> lam / (1 - lam)

All conversions here happen in a shared eigenbasis: the decomposition is
computed once per kernel and eigenvalues are remapped, which is better
conditioned than chained matrix inverses and lets the samplers reuse the
decomposition.  Conditional kernels, which have no eigenvalue shortcut, are
computed as written via checked dense solves.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import (
    ChainUndefinedError,
    DynamicRangeError,
    IllConditionedError,
    InvalidArgumentError,
    SingularKernelError,
)
from .rng import RandomSource

SYMMETRY_TOL = 1e-10
# Negative eigenvalues within this (scaled by the spectral radius when it
# exceeds 1) are treated as round-off and clamped to zero; anything more
# negative means a genuinely indefinite matrix and is rejected.
PSD_TOL = 1e-8
MARGINAL_EIG_TOL = 1e-8
# Inverse eigenvalue maps require eigenvalues at least this far below 1.
UNIT_EIG_GAP = 1e-10
CONDITION_LIMIT = 1e12


class KernelForm(enum.Enum):
    MARGINAL = "marginal"
    ENSEMBLE = "ensemble"


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues in descending order with matching orthonormal columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        self.eigenvalues.setflags(write=False)
        self.eigenvectors.setflags(write=False)

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]


@dataclass(frozen=True)
class Subset:
    """Strictly increasing item indices into a ground set of size ``n``."""

    indices: tuple[int, ...]
    n: int

    def __post_init__(self):
        prev = -1
        for i in self.indices:
            if not isinstance(i, int):
                raise InvalidArgumentError(f"subset index {i!r} is not an int")
            if i <= prev:
                raise InvalidArgumentError(
                    f"subset indices must be strictly increasing, got {self.indices}"
                )
            prev = i
        if self.indices and (self.indices[0] < 0 or self.indices[-1] >= self.n):
            raise InvalidArgumentError(
                f"subset indices {self.indices} out of range for ground set size {self.n}"
            )

    @classmethod
    def of(cls, items, n: int) -> Subset:
        idx = tuple(sorted(int(i) for i in items))
        if len(set(idx)) != len(idx):
            raise InvalidArgumentError(f"duplicate indices in subset: {idx}")
        return cls(idx, n)

    @classmethod
    def empty(cls, n: int) -> Subset:
        return cls((), n)

    @classmethod
    def full(cls, n: int) -> Subset:
        return cls(tuple(range(n)), n)

    @classmethod
    def from_bitmask(cls, mask: int, n: int) -> Subset:
        return cls(tuple(i for i in range(n) if mask >> i & 1), n)

    def bitmask(self) -> int:
        mask = 0
        for i in self.indices:
            mask |= 1 << i
        return mask

    def as_array(self) -> np.ndarray:
        return np.array(self.indices, dtype=np.intp)

    def complement(self) -> Subset:
        inside = set(self.indices)
        return Subset(tuple(i for i in range(self.n) if i not in inside), self.n)

    def union(self, other: Subset) -> Subset:
        self._check_same_ground(other)
        return Subset.of(set(self.indices) | set(other.indices), self.n)

    def intersection(self, other: Subset) -> Subset:
        self._check_same_ground(other)
        return Subset.of(set(self.indices) & set(other.indices), self.n)

    def isdisjoint(self, other: Subset) -> bool:
        self._check_same_ground(other)
        return set(self.indices).isdisjoint(other.indices)

    def _check_same_ground(self, other: Subset) -> None:
        if self.n != other.n:
            raise InvalidArgumentError(
                f"subsets live on different ground sets ({self.n} vs {other.n})"
            )

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, item) -> bool:
        return item in self.indices


class Kernel:
    """Square symmetric PSD matrix tagged as marginal- or ensemble-form.

    Validation happens at construction: symmetry within ``SYMMETRY_TOL``,
    positive semidefiniteness up to eigenvalue round-off (clamped to zero),
    and for marginal form all eigenvalues at most 1.  The eigendecomposition
    is computed once and carried with the kernel.
    """

    __slots__ = ("entries", "form", "decomposition")

    def __init__(self, entries, form: KernelForm, _decomposition: EigenDecomposition | None = None):
        arr = np.array(entries, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InvalidArgumentError(f"kernel must be square, got shape {arr.shape}")
        if _decomposition is None:
            asym = float(np.max(np.abs(arr - arr.T), initial=0.0))
            if asym > SYMMETRY_TOL:
                raise InvalidArgumentError(
                    f"kernel asymmetric: max |A - A^T| = {asym:.3e} > {SYMMETRY_TOL:.0e}"
                )
            arr = (arr + arr.T) / 2.0
            _decomposition = _decompose(arr, form)
        arr.setflags(write=False)
        self.entries = arr
        self.form = form
        self.decomposition = _decomposition

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __repr__(self) -> str:
        return f"Kernel(n={self.n}, form={self.form.value})"


def _decompose(arr: np.ndarray, form: KernelForm) -> EigenDecomposition:
    if arr.shape[0] == 0:
        return EigenDecomposition(np.empty(0), np.empty((0, 0)))
    w, v = np.linalg.eigh(arr)
    w = w[::-1].copy()
    v = v[:, ::-1].copy()
    scale = max(1.0, float(w[0]) if w.size else 1.0)
    if w[-1] < -PSD_TOL * scale:
        raise InvalidArgumentError(
            f"kernel is not positive semidefinite: min eigenvalue {w[-1]:.3e}"
        )
    np.clip(w, 0.0, None, out=w)
    if form is KernelForm.MARGINAL and w[0] > 1.0 + MARGINAL_EIG_TOL:
        raise InvalidArgumentError(
            f"marginal kernel needs eigenvalues <= 1, got max {w[0]:.12g}"
        )
    return EigenDecomposition(w, v)


def _from_eigenbasis(w: np.ndarray, v: np.ndarray, form: KernelForm) -> Kernel:
    entries = (v * w) @ v.T
    entries = (entries + entries.T) / 2.0
    return Kernel(entries, form, _decomposition=EigenDecomposition(w, v))


def build_ensemble(quality, features) -> Kernel:
    """Gram-form ensemble kernel: entries[i, j] = q_i <phi_i, phi_j> q_j.

    ``quality`` is a length-N positive vector and ``features`` an N x d
    matrix whose rows are unit length.  The result is PSD by construction.
    """
    q = np.asarray(quality, dtype=float)
    phi = np.asarray(features, dtype=float)
    if q.ndim != 1 or phi.ndim != 2 or phi.shape[0] != q.shape[0]:
        raise InvalidArgumentError(
            f"need length-N quality and N x d features, got {q.shape} and {phi.shape}"
        )
    if not np.all(q > 0):
        raise InvalidArgumentError("quality scores must be strictly positive")
    norms = np.linalg.norm(phi, axis=1)
    worst = float(np.max(np.abs(norms - 1.0), initial=0.0))
    if worst > 1e-8:
        raise InvalidArgumentError(
            f"feature rows must be unit length (max deviation {worst:.3e}); normalize first"
        )
    b = phi * q[:, None]
    entries = b @ b.T
    entries = (entries + entries.T) / 2.0
    return Kernel(entries, KernelForm.ENSEMBLE)


def marginal_from_ensemble(kernel: Kernel) -> Kernel:
    """Marginal kernel of an ensemble kernel via lam -> lam/(1+lam)."""
    _require_form(kernel, KernelForm.ENSEMBLE)
    d = kernel.decomposition
    return _from_eigenbasis(d.eigenvalues / (1.0 + d.eigenvalues), d.eigenvectors,
                            KernelForm.MARGINAL)


def ensemble_from_marginal(kernel: Kernel) -> Kernel:
    """Ensemble kernel of a marginal kernel via lam -> lam/(1-lam).

    Requires every eigenvalue strictly below 1; otherwise the map has no
    finite image and ``SingularKernelError`` is raised.
    """
    _require_form(kernel, KernelForm.MARGINAL)
    d = kernel.decomposition
    if d.n and d.eigenvalues[0] >= 1.0 - UNIT_EIG_GAP:
        raise SingularKernelError(
            f"marginal kernel has eigenvalue {d.eigenvalues[0]:.12g} at 1; "
            "no finite ensemble kernel exists"
        )
    return _from_eigenbasis(d.eigenvalues / (1.0 - d.eigenvalues), d.eigenvectors,
                            KernelForm.ENSEMBLE)


def markov_base(kernel: Kernel) -> Kernel:
    """Transition base kernel of the disjoint-consecutive-sets chain.

    Maps an ensemble kernel through lam -> lam/(1-lam).  Defined only while
    all eigenvalues stay strictly below 1; at or above that the chain whose
    transitions it drives does not exist.
    """
    _require_form(kernel, KernelForm.ENSEMBLE)
    d = kernel.decomposition
    if d.n and d.eigenvalues[0] >= 1.0 - UNIT_EIG_GAP:
        raise ChainUndefinedError(
            f"chain undefined: ensemble kernel has eigenvalue {d.eigenvalues[0]:.12g} >= 1"
        )
    return _from_eigenbasis(d.eigenvalues / (1.0 - d.eigenvalues), d.eigenvectors,
                            KernelForm.ENSEMBLE)


def _checked_inverse(mat: np.ndarray, step: str) -> np.ndarray:
    """Dense inverse with a 1-norm condition estimate; fails loudly rather
    than regularize, so downstream oracle comparisons stay honest."""
    if mat.shape[0] == 0:
        return mat.copy()
    try:
        inv = np.linalg.inv(mat)
    except np.linalg.LinAlgError as exc:
        raise IllConditionedError(f"singular matrix while trying to {step}") from exc
    kappa = float(np.linalg.norm(mat, 1) * np.linalg.norm(inv, 1))
    if not np.isfinite(kappa) or kappa > CONDITION_LIMIT:
        raise IllConditionedError(
            f"condition estimate {kappa:.3e} exceeds {CONDITION_LIMIT:.0e} "
            f"while trying to {step}"
        )
    return inv


def _shifted_by_complement_identity(kernel: Kernel, conditioned: Subset) -> tuple[np.ndarray, np.ndarray]:
    """kernel + identity restricted to the complement of ``conditioned``.

    Realized by adding 1.0 to the complement's diagonal entries; returns the
    shifted matrix and the complement index array.
    """
    comp = conditioned.complement().as_array()
    shifted = kernel.entries.copy()
    shifted[comp, comp] += 1.0
    return shifted, comp


def conditional_ensemble(kernel: Kernel, conditioned: Subset) -> Kernel:
    """Ensemble kernel of the leftover set given containment of ``conditioned``.

    The result lives on the complement ground set (dimension N - |A|),
    indexed in ascending order of the surviving items.
    """
    _require_form(kernel, KernelForm.ENSEMBLE)
    _require_ground(kernel, conditioned)
    if len(conditioned) == kernel.n:
        return Kernel(np.empty((0, 0)), KernelForm.ENSEMBLE)
    shifted, comp = _shifted_by_complement_identity(kernel, conditioned)
    inv_shifted = _checked_inverse(shifted, "invert kernel plus complement identity")
    block = inv_shifted[np.ix_(comp, comp)]
    inv_block = _checked_inverse(block, "invert the restricted inverse block")
    result = inv_block - np.eye(comp.shape[0])
    result = (result + result.T) / 2.0
    return Kernel(result, KernelForm.ENSEMBLE)


def conditional_marginal(kernel: Kernel, conditioned: Subset) -> Kernel:
    """Marginal kernel of the leftover set given containment of ``conditioned``."""
    _require_form(kernel, KernelForm.ENSEMBLE)
    _require_ground(kernel, conditioned)
    if len(conditioned) == kernel.n:
        return Kernel(np.empty((0, 0)), KernelForm.MARGINAL)
    shifted, comp = _shifted_by_complement_identity(kernel, conditioned)
    inv_shifted = _checked_inverse(shifted, "invert kernel plus complement identity")
    result = np.eye(kernel.n)[np.ix_(comp, comp)] - inv_shifted[np.ix_(comp, comp)]
    result = (result + result.T) / 2.0
    return Kernel(result, KernelForm.MARGINAL)


def elementary_symmetric_table(eigenvalues, k_max: int) -> np.ndarray:
    """Table E with E[k, m] = sum over size-k subsets of the first m
    eigenvalues of their product, for k <= k_max and m <= N.

    Built by the two-index recursion E[k, m] = E[k, m-1] + lam_m E[k-1, m-1]
    in O(N * k_max).
    """
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.ndim != 1:
        raise InvalidArgumentError("eigenvalues must be a vector")
    n = lam.shape[0]
    if not 0 <= k_max <= n:
        raise InvalidArgumentError(f"k_max must be in [0, {n}], got {k_max}")
    table = np.zeros((k_max + 1, n + 1))
    table[0, :] = 1.0
    for m in range(1, n + 1):
        table[1:, m] = table[1:, m - 1] + lam[m - 1] * table[:k_max, m - 1]
    if not np.all(np.isfinite(table)):
        raise DynamicRangeError(
            "elementary symmetric polynomials overflowed; rescale the kernel"
        )
    return table


def elementary_symmetric(eigenvalues, k_max: int) -> np.ndarray:
    """Vector (e_0, ..., e_k_max) of elementary symmetric polynomials."""
    return elementary_symmetric_table(eigenvalues, k_max)[:, -1].copy()


def random_ensemble_kernel(
    n: int,
    rng: RandomSource,
    lambda_max: float | None = None,
    decay: float = 1.0,
) -> Kernel:
    """Random PSD ensemble kernel with a dense eigenbasis.

    ``lambda_max`` rescales the spectrum to a chosen largest eigenvalue;
    ``decay`` < 1 multiplies eigenvalue i by decay**i, giving the fast-falling
    spectra typical of similarity kernels (and a concentrated DPP, which the
    sampler-versus-enumeration tests need to beat Monte Carlo noise).
    """
    if n < 1:
        raise InvalidArgumentError("need n >= 1")
    if not 0.0 < decay <= 1.0:
        raise InvalidArgumentError(f"decay must be in (0, 1], got {decay}")
    gauss = rng.normal(size=(n, n))
    q, _ = np.linalg.qr(gauss)
    w = (rng.uniform(size=n) * 0.9 + 0.1) * decay ** np.arange(n)
    if lambda_max is not None:
        w *= lambda_max / w.max()
    w = np.sort(w)[::-1].copy()
    return _from_eigenbasis(w, q, KernelForm.ENSEMBLE)


def _require_form(kernel: Kernel, form: KernelForm) -> None:
    if kernel.form is not form:
        raise InvalidArgumentError(f"expected a {form.value} kernel, got {kernel.form.value}")


def _require_ground(kernel: Kernel, subset: Subset) -> None:
    if subset.n != kernel.n:
        raise InvalidArgumentError(
            f"subset ground set size {subset.n} does not match kernel size {kernel.n}"
        )

"""Markov chains over subsets with consecutive sets forced disjoint.

Two variants share one skeleton.  The free-size chain starts from a DPP
draw and transitions through a conditional DPP of the remapped base kernel,
which keeps every margin an exact DPP and makes the union of consecutive
sets a DPP with twice the transition kernel.  The fixed-size chain starts
by splitting a size-2k draw in half and transitions through a conditional
size-k DPP of the base kernel itself, making consecutive unions an exact
size-2k DPP.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleCardinalityError, InvalidArgumentError
from .kernel import Kernel, Subset, conditional_ensemble, markov_base
from .rng import RandomSource
from .sampler import NEG_INF, log_prob_kdpp, sample_dpp, sample_kdpp


class ChainVariant(enum.Enum):
    MDPP = "mdpp"
    MKDPP = "mkdpp"


@dataclass
class ChainState:
    """Mutable cursor of a running chain.

    ``base`` is the kernel whose margins the chain preserves;
    ``transition_base`` drives the conditional step (the remapped kernel for
    the free-size chain, ``base`` itself for the fixed-size one).  A single
    state must only be stepped from one thread.
    """

    variant: ChainVariant
    base: Kernel
    transition_base: Kernel
    previous: Subset
    t: int
    k: int | None = None


def _to_global(local: Subset, remaining: Subset) -> Subset:
    pool = remaining.indices
    return Subset.of((pool[i] for i in local.indices), remaining.n)


def _to_local(global_subset: Subset, remaining: Subset) -> Subset:
    positions = {item: pos for pos, item in enumerate(remaining.indices)}
    return Subset.of((positions[i] for i in global_subset.indices), len(remaining))


def mdpp_init(base: Kernel, rng: RandomSource) -> tuple[ChainState, Subset]:
    """Start the free-size chain: the first set is a plain DPP draw."""
    transition = markov_base(base)  # raises ChainUndefinedError at eigenvalue >= 1
    first = sample_dpp(base.decomposition, rng.derive("step", 1))
    state = ChainState(ChainVariant.MDPP, base, transition, first, 1)
    return state, first


def mdpp_transition_sample(transition_base: Kernel, previous: Subset, rng: RandomSource) -> Subset:
    """One free-size transition: DPP draw from the conditional kernel on the
    complement of ``previous``, mapped back to global indices."""
    conditional = conditional_ensemble(transition_base, previous)
    remaining = previous.complement()
    local = sample_dpp(conditional.decomposition, rng)
    return _to_global(local, remaining)


def mdpp_step(state: ChainState, rng: RandomSource) -> Subset:
    """Advance the free-size chain by one step (mutates ``state``)."""
    if state.variant is not ChainVariant.MDPP:
        raise InvalidArgumentError("state does not belong to a free-size chain")
    step_rng = rng.derive("step", state.t + 1)
    nxt = mdpp_transition_sample(state.transition_base, state.previous, step_rng)
    state.previous = nxt
    state.t += 1
    return nxt


def mkdpp_init(base: Kernel, k: int, rng: RandomSource) -> tuple[ChainState, Subset]:
    """Start the fixed-size chain: draw a size-2k set and keep a uniformly
    random half of it."""
    if k < 1:
        raise InvalidArgumentError(f"need k >= 1, got {k}")
    rank = int(np.count_nonzero(base.decomposition.eigenvalues > 0))
    if 2 * k > rank:
        raise InfeasibleCardinalityError(
            f"chain needs rank >= 2k = {2 * k}, kernel rank is {rank}"
        )
    first = mkdpp_initial_sample(base, k, rng.derive("step", 1))
    state = ChainState(ChainVariant.MKDPP, base, base, first, 1, k)
    return state, first


def mkdpp_initial_sample(base: Kernel, k: int, rng: RandomSource) -> Subset:
    double = sample_kdpp(base.decomposition, 2 * k, rng.derive("union"))
    picks = rng.derive("split").permutation(2 * k)[:k]
    items = [double.indices[i] for i in picks]
    return Subset.of(items, base.n)


def mkdpp_transition_sample(base: Kernel, previous: Subset, k: int, rng: RandomSource) -> Subset:
    """One fixed-size transition: size-k DPP draw from the conditional
    kernel on the complement of ``previous``."""
    conditional = conditional_ensemble(base, previous)
    rank = int(np.count_nonzero(conditional.decomposition.eigenvalues > 0))
    if rank < k:
        raise InfeasibleCardinalityError(
            f"conditional kernel rank {rank} cannot support {k} further items"
        )
    remaining = previous.complement()
    local = sample_kdpp(conditional.decomposition, k, rng)
    return _to_global(local, remaining)


def mkdpp_step(state: ChainState, rng: RandomSource) -> Subset:
    """Advance the fixed-size chain by one step (mutates ``state``)."""
    if state.variant is not ChainVariant.MKDPP or state.k is None:
        raise InvalidArgumentError("state does not belong to a fixed-size chain")
    step_rng = rng.derive("step", state.t + 1)
    nxt = mkdpp_transition_sample(state.base, state.previous, state.k, step_rng)
    state.previous = nxt
    state.t += 1
    return nxt


def run_chain(state: ChainState, steps: int, rng: RandomSource) -> list[Subset]:
    """Trajectory of length ``steps`` starting from the state's current set.

    Consecutive sets are disjoint by construction of the transitions.
    """
    if steps < 1:
        raise InvalidArgumentError(f"need steps >= 1, got {steps}")
    trajectory = [state.previous]
    step = mdpp_step if state.variant is ChainVariant.MDPP else mkdpp_step
    for _ in range(steps - 1):
        trajectory.append(step(state, rng))
    return trajectory


def mdpp_transition_logprob(base: Kernel, previous: Subset, nxt: Subset) -> float:
    """log P(Y_t = nxt | Y_{t-1} = previous) for the free-size chain:
    det of the union under the transition base, normalized by det of the
    base plus the complement identity."""
    _check_disjoint(previous, nxt, base)
    transition = markov_base(base)
    union = previous.union(nxt)
    idx = union.as_array()
    if idx.size == 0:
        sign, log_num = 1.0, 0.0
    else:
        sign, log_num = np.linalg.slogdet(transition.entries[np.ix_(idx, idx)])
    if sign <= 0.0:
        return NEG_INF
    comp = previous.complement().as_array()
    shifted = transition.entries.copy()
    shifted[comp, comp] += 1.0
    den_sign, log_den = np.linalg.slogdet(shifted)
    if den_sign <= 0.0:
        raise InvalidArgumentError(
            "previous set has zero stationary mass; transition undefined"
        )
    return float(log_num - log_den)


def mkdpp_transition_logprob(base: Kernel, previous: Subset, nxt: Subset, k: int) -> float:
    """log P(Y_t = nxt | Y_{t-1} = previous) for the fixed-size chain,
    evaluated as a size-k DPP on the conditional kernel (the shared
    det factor between numerator and normalizer cancels)."""
    _check_disjoint(previous, nxt, base)
    if len(nxt) != k:
        raise InvalidArgumentError(f"next set has {len(nxt)} items, expected k={k}")
    conditional = conditional_ensemble(base, previous)
    local = _to_local(nxt, previous.complement())
    return log_prob_kdpp(conditional, local, k)


def _check_disjoint(previous: Subset, nxt: Subset, base: Kernel) -> None:
    if previous.n != base.n or nxt.n != base.n:
        raise InvalidArgumentError("subset ground set does not match the kernel")
    if not previous.isdisjoint(nxt):
        raise InvalidArgumentError(
            f"consecutive sets must be disjoint, both contain "
            f"{sorted(set(previous.indices) & set(nxt.indices))}"
        )

"""Exception hierarchy shared across the package."""


class DppError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgumentError(DppError, ValueError):
    """An argument violates an operation's precondition."""


class SingularKernelError(DppError):
    """Marginal-to-ensemble conversion requested for a kernel with an
    eigenvalue at (or numerically at) 1, where the inverse map blows up."""


class ChainUndefinedError(DppError):
    """The Markov chain's transition kernel does not exist because the base
    ensemble kernel has an eigenvalue at or above 1."""


class IllConditionedError(DppError):
    """A conditional-kernel solve was too ill conditioned to trust; the
    message names the offending step."""


class InfeasibleCardinalityError(DppError):
    """A fixed-size sample of the requested cardinality has zero probability
    (rank too low, or too few items survive a filter)."""


class DynamicRangeError(DppError, OverflowError):
    """An intermediate quantity left floating-point range; rescale inputs."""


class UndefinedMetricError(DppError):
    """A metric was requested on degenerate input (no qualifying sets)."""


class GroundSetTooLargeError(DppError):
    """Brute-force enumeration was requested beyond the supported size."""


class OracleInconsistencyError(DppError):
    """An enumerator's brute-force normalizer disagreed with its closed form,
    indicating a numerical or logic fault in the verification path."""

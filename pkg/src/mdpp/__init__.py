"""Determinantal point processes, their disjoint-step Markov extensions,
and a desk-scale experiment harness with brute-force verification."""

from .errors import (
    ChainUndefinedError,
    DppError,
    DynamicRangeError,
    GroundSetTooLargeError,
    IllConditionedError,
    InfeasibleCardinalityError,
    InvalidArgumentError,
    OracleInconsistencyError,
    SingularKernelError,
    UndefinedMetricError,
)
from .kernel import (
    EigenDecomposition,
    Kernel,
    KernelForm,
    Subset,
    build_ensemble,
    conditional_ensemble,
    conditional_marginal,
    elementary_symmetric,
    elementary_symmetric_table,
    ensemble_from_marginal,
    marginal_from_ensemble,
    markov_base,
    random_ensemble_kernel,
)
from .markov import (
    ChainState,
    ChainVariant,
    mdpp_init,
    mdpp_step,
    mdpp_transition_logprob,
    mkdpp_init,
    mkdpp_step,
    mkdpp_transition_logprob,
    run_chain,
)
from .oracle import (
    SetDistribution,
    empirical_distribution,
    enumerate_chain_marginal,
    enumerate_dpp,
    enumerate_kdpp,
    enumerate_mkdpp_margin,
    enumerate_union,
    tv_distance,
)
from .corpus import (
    Corpus,
    CorpusConfig,
    Item,
    generate_synthetic,
    load_corpus,
    neighbor_features,
    proximity_quality,
    save_corpus,
)
from .learning import (
    Feedback,
    LearningStep,
    QualityModel,
    Strategy,
    SyntheticUser,
    quality_scores,
    run_learning,
    select,
    simulate_user,
    update,
)
from .metrics import (
    TrajectoryMetrics,
    bootstrap_ci,
    marginal_diversity,
    precision_curve,
    recall_curve,
    step_diversity,
    utility_curve,
)
from .rng import RandomSource, derive_seed
from .sampler import log_prob_dpp, log_prob_kdpp, sample_dpp, sample_kdpp

__version__ = "0.1.0"

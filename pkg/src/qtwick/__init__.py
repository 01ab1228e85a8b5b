"""Crossing/nesting pairing statistics, two-parameter Wick sums, and the
operator models that realize them at finite size."""

__version__ = "0.1.0"

from .errors import (
    NonPairClassError,
    SizeLimitError,
    TruncationError,
    ValidationError,
)
from .pairings import (
    CrossNestReport,
    PairPartition,
    SetPartition,
    class_of,
    cross_nest,
    cross_nest_counts,
    enumerate_pair_partitions,
    iter_pair_partitions,
)
from .wickpoly import (
    DEFAULT_COVARIANCE,
    QTPolynomial,
    poly_eval,
    wick_field,
    wick_joint,
    wick_mixed,
)
from .fock import (
    FockParams,
    annihilate,
    apply_operator,
    commutator_residual,
    create,
    field,
    gram_matrix,
    inner_product,
    number_scale,
    vacuum,
    vacuum_moment,
)
from .coeffs import (
    CoefficientTable,
    NormalOrderResult,
    build_table,
    derive_seed,
    normal_order,
    pair_limit_monomial,
    pair_pattern_is_default,
    sample_base,
    sampled_table,
)
from .jw import (
    CommutationReport,
    MonomialOperator,
    apply_monomial,
    build_jw,
    check_commutation,
    vacuum_expectation,
    vacuum_state,
)
from .clt import (
    ExperimentConfig,
    ExperimentReport,
    convergence_experiment,
    limit_coefficient_estimate,
    partial_sum_moment,
)

__all__ = [
    "__version__",
    "NonPairClassError",
    "SizeLimitError",
    "TruncationError",
    "ValidationError",
    "CrossNestReport",
    "PairPartition",
    "SetPartition",
    "class_of",
    "cross_nest",
    "cross_nest_counts",
    "enumerate_pair_partitions",
    "iter_pair_partitions",
    "DEFAULT_COVARIANCE",
    "QTPolynomial",
    "poly_eval",
    "wick_field",
    "wick_joint",
    "wick_mixed",
    "FockParams",
    "annihilate",
    "apply_operator",
    "commutator_residual",
    "create",
    "field",
    "gram_matrix",
    "inner_product",
    "number_scale",
    "vacuum",
    "vacuum_moment",
    "CoefficientTable",
    "NormalOrderResult",
    "build_table",
    "derive_seed",
    "normal_order",
    "pair_limit_monomial",
    "pair_pattern_is_default",
    "sample_base",
    "sampled_table",
    "CommutationReport",
    "MonomialOperator",
    "apply_monomial",
    "build_jw",
    "check_commutation",
    "vacuum_expectation",
    "vacuum_state",
    "ExperimentConfig",
    "ExperimentReport",
    "convergence_experiment",
    "limit_coefficient_estimate",
    "partial_sum_moment",
]

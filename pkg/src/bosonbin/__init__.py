"""Exact interferometer output distributions, outcome binning, and
most-probable-bin decision/function problems with Chernoff sample planning."""

from .binning import (
    BinnedDistribution,
    BinPartition,
    MPBResult,
    bin_of,
    bin_probabilities,
    make_partition,
    most_probable_bin,
    mpb_from_vector,
    top_gap,
)
from .distribution import (
    BSDistribution,
    ParticleStatistics,
    amplitude,
    full_distribution,
    max_outcome,
    transition_probability,
)
from .fock import (
    DEFAULT_ENUMERATION_LIMIT,
    CapacityError,
    FockSpace,
    SeedDraw,
    collision_free_count,
    enumerate_configurations,
    format_configuration,
    integer_code,
    is_collision_free,
    parse_configuration,
    random_seed,
    space_size,
)
from .linalg import (
    UnitaryMatrix,
    determinant,
    haar_unitary,
    haar_unitary_from_seed,
    identity_unitary,
    permanent_naive,
    permanent_ryser,
    permanent_ryser_direct,
    perturb_unitary,
    submatrix,
    unitarity_deviation,
    unitary_from_json,
    unitary_to_json,
)
from .problems import (
    CollisionResult,
    ImageVector,
    ProblemInstance,
    collision_probability,
    decide,
    draw_problem_seeds,
    evaluate_images,
    instance_from_json,
    instance_to_json,
    joint_success_probability,
    register_function,
    register_predicate,
    solve_function,
)
from .rng import generator, split
from .sampling import (
    ALIAS_METHOD_THRESHOLD,
    EmpiricalBinned,
    SamplePlan,
    chernoff_sample_size,
    draw_outcomes,
    empirical_binned,
    estimate_mpb,
    total_variation,
)

__version__ = "0.1.0"

__all__ = [
    "ALIAS_METHOD_THRESHOLD",
    "BSDistribution",
    "BinPartition",
    "BinnedDistribution",
    "CapacityError",
    "CollisionResult",
    "DEFAULT_ENUMERATION_LIMIT",
    "EmpiricalBinned",
    "FockSpace",
    "ImageVector",
    "MPBResult",
    "ParticleStatistics",
    "ProblemInstance",
    "SamplePlan",
    "SeedDraw",
    "UnitaryMatrix",
    "amplitude",
    "bin_of",
    "bin_probabilities",
    "chernoff_sample_size",
    "collision_free_count",
    "collision_probability",
    "decide",
    "determinant",
    "draw_outcomes",
    "draw_problem_seeds",
    "empirical_binned",
    "enumerate_configurations",
    "estimate_mpb",
    "evaluate_images",
    "format_configuration",
    "full_distribution",
    "generator",
    "haar_unitary",
    "haar_unitary_from_seed",
    "identity_unitary",
    "instance_from_json",
    "instance_to_json",
    "integer_code",
    "is_collision_free",
    "joint_success_probability",
    "make_partition",
    "max_outcome",
    "most_probable_bin",
    "mpb_from_vector",
    "parse_configuration",
    "permanent_naive",
    "permanent_ryser",
    "permanent_ryser_direct",
    "perturb_unitary",
    "random_seed",
    "register_function",
    "register_predicate",
    "solve_function",
    "space_size",
    "split",
    "submatrix",
    "top_gap",
    "total_variation",
    "transition_probability",
    "unitarity_deviation",
    "unitary_from_json",
    "unitary_to_json",
]

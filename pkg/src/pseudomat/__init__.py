"""Limit moments of random pseudomatrices and block random matrices.

Three independent computation routes for the same limit quantities, plus
numeric certification of the independence structures they realize:

- ``partitions`` / ``comb_moments``: exact rational moments as sums over
  colored non-crossing pair partitions.
- ``fock``: exact evaluation of operator words on a finite Fock space.
- ``randmat``: Gaussian random-matrix Monte Carlo with an exact
  Wick-pairing oracle for small instances.
- ``independence``: checkers for matricial freeness, its symmetric
  variant, and free / monotone / boolean independence.
- ``cli``: the ``pseudomat`` command line front end.
"""

from .errors import CapacityError, ValidationError
from .partitions import (
    Coloring,
    LabelTuple,
    PairPartition,
    admissible_symmetric_colorings,
    catalan,
    enumerate_colorings,
    enumerate_pair_partitions,
    induced_ordered_coloring,
    is_ordered_adapted,
    is_symmetric_adapted,
)
from .comb_moments import (
    ArrayShape,
    MomentMatrix,
    b_sum,
    b_value,
    limit_moment,
    mixed_limit_moment,
    symmetric_mixed_limit_moment,
    weighted_limit_moment,
    weighted_mixed_limit_moment,
    weighted_symmetric_mixed_limit_moment,
)
from .fock import (
    FockState,
    FockWord,
    OperatorSpec,
    apply_operator,
    gauss_sum,
    moment,
    pseudomatrix_moment,
    trunc_gauss_sum,
    word_is_valid,
)
from .randmat import (
    BlockLayout,
    MomentEstimate,
    block_unit,
    block_unit_matrix,
    mc_mixed_moment,
    mc_mixed_moments_batch,
    sample_matrix,
    symmetric_block,
    wick_exact_moment,
)
from .independence import (
    CheckReport,
    FockArrayOracle,
    FockFamilyOracle,
    MatrixBlockOracle,
    Violation,
    block_sum_instance,
    check_boolean,
    check_freeness,
    check_matricial_freeness,
    check_monotone,
    check_symmetric_matricial_freeness,
    diagonal_family,
    family_oracle,
    matrix_symmetric_instance,
    ordered_tuple_chained,
    plain_array_instance,
    row_sum_family,
    set_tuple_chained,
    symmetric_array_instance,
    truncated_array_instance,
)

__version__ = "0.1.0"

__all__ = [
    "ArrayShape",
    "BlockLayout",
    "CapacityError",
    "CheckReport",
    "Coloring",
    "FockArrayOracle",
    "FockFamilyOracle",
    "FockState",
    "FockWord",
    "LabelTuple",
    "MatrixBlockOracle",
    "MomentEstimate",
    "MomentMatrix",
    "OperatorSpec",
    "PairPartition",
    "ValidationError",
    "Violation",
    "admissible_symmetric_colorings",
    "apply_operator",
    "b_sum",
    "b_value",
    "block_sum_instance",
    "block_unit",
    "block_unit_matrix",
    "catalan",
    "check_boolean",
    "check_freeness",
    "check_matricial_freeness",
    "check_monotone",
    "check_symmetric_matricial_freeness",
    "diagonal_family",
    "enumerate_colorings",
    "enumerate_pair_partitions",
    "family_oracle",
    "gauss_sum",
    "induced_ordered_coloring",
    "is_ordered_adapted",
    "is_symmetric_adapted",
    "limit_moment",
    "matrix_symmetric_instance",
    "mc_mixed_moment",
    "mc_mixed_moments_batch",
    "mixed_limit_moment",
    "moment",
    "ordered_tuple_chained",
    "plain_array_instance",
    "pseudomatrix_moment",
    "row_sum_family",
    "sample_matrix",
    "set_tuple_chained",
    "symmetric_array_instance",
    "symmetric_block",
    "symmetric_mixed_limit_moment",
    "trunc_gauss_sum",
    "truncated_array_instance",
    "weighted_limit_moment",
    "weighted_mixed_limit_moment",
    "weighted_symmetric_mixed_limit_moment",
    "wick_exact_moment",
    "word_is_valid",
    "__version__",
]

"""Exact combinatorial engine for easy quantum group probability: partition
families, Weingarten calculus, three species of cumulants, half-independence
models, and finite de Finetti gap computations."""

from .errors import (
    DimensionError,
    EmptyInputError,
    MembershipError,
    SingularGramError,
    SizeLimitError,
    ValidationError,
    WgError,
)
from .partitions import (
    ALL,
    Category,
    SetPartition,
    Word,
    enumerate_all,
    enumerate_family,
    get_k_max,
    in_family,
    is_balanced,
    is_noncrossing,
    is_refinement,
    join,
    kernel,
    meet,
    mobius,
    mobius_matrix,
    set_k_max,
)
from .weingarten import (
    CkScan,
    ResidualReport,
    WeingartenTable,
    asymptotic_residual,
    ck_constant,
    gram,
    haar_integral,
    order_bound_table,
    weingarten_table,
)
from .cumulants import (
    CumulantFamily,
    MomentFunctional,
    Species,
    cumulants_to_moments,
    law_moments,
    moments_to_cumulants,
    partitioned_functional,
    vanishing_pattern_check,
)
from .models import (
    UNBALANCED,
    FiniteGroupSpec,
    GapReport,
    HalfModelSpec,
    MCConfig,
    UrnSpec,
    fixed_point_identity_check,
    group_integral_exact,
    group_integral_mc,
    half_model_moment,
    half_model_vs_cumulants,
    parity_normal_form,
    sample_bistochastic,
    sample_haar_orthogonal,
    sphere_definetti_gap,
    urn_definetti_gap,
)

__version__ = "0.1.0"

"""blab: a numerical Bergman-space laboratory on radial planar domains.

Computes Bergman kernels, Toeplitz operators and operator words, restriction
operators with their adjoints, and Berezin transforms; runs the associated
exact-identity checks and domain-exhaustion convergence experiments at desk
scale.
"""

from .geometry import (
    CompactRegion,
    DomainError,
    DomainSpec,
    ExhaustionPlan,
    annulus,
    compact_band,
    contains,
    default_compact,
    disc,
    is_subdomain,
    parse_domain,
    punctured_disc,
    standard_exhaustions,
)
from .quadrature import (
    QuadratureError,
    QuadratureGrid,
    build_polar_grid,
    integrate,
    lp_norm,
    radial_rule,
)
from .kernels import (
    KernelError,
    KernelModel,
    ZeroSetError,
    annulus_kernel,
    disc_kernel,
    diag_ratio,
    kernel_from_basis,
    model_for,
    norm_sq_exact,
    normalized_coefficients,
    normalized_kernel,
)
from .symbols import (
    AbsPower,
    Clamp,
    Const,
    Green,
    LogAbs,
    OperatorWord,
    SymbolError,
    parse_symbol,
    parse_word,
    single,
)
from .operators import (
    BerezinField,
    OperatorMatrix,
    berezin_field,
    berezin_log_abs_annulus,
    berezin_of_operator,
    berezin_of_symbol,
    berezin_radial,
    berezin_values,
    compressed_operator,
    cross_gram,
    green,
    green_adapted_grid,
    grid_for_symbol,
    mobius,
    poisson_kernel,
    poisson_square_mean,
    restriction_adjoint_apply,
    restriction_apply,
    toeplitz_matrix,
    word_matrix,
)
from .experiments import (
    ConvergenceReport,
    ExperimentError,
    run_corollary_truncation,
    run_lemma_suite,
    run_prop1,
    run_prop2,
    run_ramadanov,
    run_theorem1,
    run_theorem2,
    run_theorem3,
)

__version__ = "0.1.0"

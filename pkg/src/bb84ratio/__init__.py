"""Key-rate trade-off calculator for two-basis quantum key distribution.

Computes, inverts and optimizes the exponential trade-off between the
failure bounds of key distillation and the final key-generation rate when
the two measurement bases are used with unequal ratios.
"""

from .errors import (
    BracketError,
    ConvergenceError,
    DegenerateParameterError,
    DomainError,
    InfeasibleError,
    KeyRateError,
    NumericError,
)
from .exponents import (
    ErrorRates,
    ProtocolParams,
    d_bit,
    d_phase,
    exponent_bit,
    exponent_phase,
)
from .finite_n import (
    CountLayout,
    FiniteNResult,
    SimulationTable,
    b_bit_exact,
    b_phase_exact,
    hypergeom_log_pmf,
    layout_for_basis,
    simulate_estimation,
    verify_hypergeom_bound,
)
from .numerics import (
    DEFAULT_TOLERANCES,
    ToleranceConfig,
    binary_entropy,
    bisect_root,
    log2_binomial,
    log_sum_exp2,
    minimize_scalar,
    positive_part,
)
from .optimizer import (
    COARSE_STEP,
    OptimizationResult,
    SweepFailure,
    optimize_asymmetric,
    optimize_symmetric,
    sweep,
)
from .rates import (
    RatePoint,
    basis_ratio_optimality_check,
    rate_asymmetric,
    rate_symmetric,
)
from .sacrifice import (
    CrossCheckReport,
    SacrificeResult,
    cross_check,
    q_prime_one,
    q_prime_two,
    s_by_inversion,
    s_closed,
)

__version__ = "0.1.0"

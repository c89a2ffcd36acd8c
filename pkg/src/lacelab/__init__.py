"""Numerical laboratory for time-convolution recursions of spread-out
lattice models: kernels, coefficient families, the recursion solver,
critical constants, Gaussian-limit probes, torus norms, and executable
inequality checks."""

from .kernel import (
    StepDistribution,
    AssumptionDReport,
    RegimeUncoveredError,
    make_uniform_box,
    fourier,
    a_of_k,
    moment,
    check_assumption_d,
    assumption_d_samples,
    axis_ray,
    diagonal_ray,
    tensor_grid,
)
from .models import (
    ModelSequences,
    CoefficientQuery,
    SimpleRandomWalk,
    SyntheticTheta,
    WeaklySelfAvoidingWalk,
    ExtractedCoefficients,
    HorizonError,
    EnumerationBudgetError,
    IncompleteInputError,
    UnsupportedQueryError,
    enumerate_weakly_saw,
    extract_coefficients,
)
from .recursion import (
    RecursionState,
    NonFiniteValueError,
    solve,
    solve_at_zero,
    laplacian_at_zero,
)
from .critical import (
    SequenceState,
    CriticalConstants,
    DegenerateDenominatorError,
    NoRootError,
    sequences,
    z_sequence,
    build_sequence_state,
    intervals,
    solve_zc,
)
from .bounds import (
    InductionParams,
    BoundReport,
    CheckGrid,
    ParameterConstraintError,
    UndefinedFactorError,
    MissingDataError,
    k4_prime,
    check_f_bounds,
    check_assumption_e,
    check_assumption_g,
    extract_h3_remainders,
    check_h1_h4,
    check_consequences,
    region_decomposition,
)
from .quadrature import (
    NormEstimate,
    DecayFit,
    BudgetExceededError,
    FitError,
    lp_norm,
    lp_norms,
    decay_fit,
)
from .gaussian import (
    ScalingProbe,
    VarianceProbe,
    probe_clt,
    probe_variance,
)

__version__ = "0.1.0"

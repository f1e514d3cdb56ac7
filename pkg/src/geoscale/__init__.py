"""Geodesic first- and second-order solvers for scaling problems of group actions."""

from .errors import (
    ConfigurationError,
    ContractViolationError,
    DegenerateInputError,
    EnumerationBudgetError,
    GeoscaleError,
    InputError,
    RandomnessFailureError,
    SingularMatrixError,
)
from .first_order import (
    FirstOrderConfig,
    ScalingReport,
    first_order_minimize,
    iteration_budget_scaling,
    p_scaling_solve,
    polytope_membership_epsilon,
    randomized_p_scaling,
    scaling_solve,
)
from .geometry import (
    DualityReport,
    FlowTrace,
    HessianForm,
    MomentValue,
    TargetSpectrum,
    duality_bounds,
    gradient_flow,
    hessian,
    kempf_ness,
    moment_map,
    p_shifted_gradient,
    regularized_gradient_hessian,
    spec_distance,
)
from .groups import FactorKind, GroupElement, GroupSpec, LieDirection
from .gt import (
    GTIrrep,
    GTPattern,
    enumerate_patterns,
    gt_apply,
    gt_gram,
    gt_lie_matrix,
    gt_orthonormal_rep,
)
from .kernels import TrustRegionProblem, ball_constrained_qp, herm_exp, min_norm_point, qr_decompose
from .margins import (
    MarginResult,
    WeightMatrix,
    gap_alpha_beta,
    is_totally_unimodular,
    margin_lower_bound,
    margin_upper_witness_conjugation,
    margin_upper_witness_operator_scaling,
    weight_margin_exact,
    weight_norm,
)
from .reps import (
    Representation,
    Weight,
    conjugation_rep,
    direct_sum,
    lie_matrix,
    matrix_scaling_rep,
    operator_scaling_rep,
    quiver_rep,
    restrict_to_sl,
    tensor_rep,
    torus_rep,
)
from .second_order import (
    NewtonReport,
    SecondOrderConfig,
    norm_minimize,
    second_order_budget,
    second_order_minimize,
)

__version__ = "0.1.0"

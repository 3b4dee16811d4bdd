"""Calculus on time scales: jump operators, delta/nabla/diamond-alpha
derivatives and integrals, exponential functions, and the diamond-alpha
exponential built from transition-matrix products."""

from .calculus import (
    TSFunction,
    delta_derivative,
    delta_integral,
    diamond_derivative,
    diamond_integral,
    nabla_derivative,
    nabla_integral,
)
from .errors import (
    BackwardEvaluationError,
    BVPError,
    DenseSpanError,
    DivergenceError,
    NotRegularError,
    RegressivityError,
    TimeScaleError,
    TSCalcError,
)
from .exponentials import (
    check_regressivity,
    combined_E,
    combined_e,
    delta_exp,
    delta_to_nabla_param,
    diamond_derivative_of_delta_exp,
    diamond_derivative_of_nabla_exp,
    nabla_exp,
    nabla_to_delta_param,
    rho_shift_delta_exp,
    rho_shift_nabla_exp,
)
from .expr import parse_expr
from .jobspec import parse_timescale
from .solver import (
    DiamondBVP,
    SolutionTrace,
    StateRow,
    TransitionMatrix,
    apply_L,
    diamond_exponential,
    propagate_dense,
    propagate_forward,
    propagate_from_accumulation,
    solve,
    solve_nonhomogeneous,
    to_second_order_delta,
    transition_matrix,
)
from .timescale import GeometricGrid, Point, RealInterval, TimeScale, UniformGrid

__all__ = [
    "BVPError",
    "BackwardEvaluationError",
    "DenseSpanError",
    "DiamondBVP",
    "DivergenceError",
    "GeometricGrid",
    "NotRegularError",
    "Point",
    "RealInterval",
    "RegressivityError",
    "SolutionTrace",
    "StateRow",
    "TSCalcError",
    "TSFunction",
    "TimeScale",
    "TimeScaleError",
    "TransitionMatrix",
    "UniformGrid",
    "apply_L",
    "check_regressivity",
    "combined_E",
    "combined_e",
    "delta_derivative",
    "delta_exp",
    "delta_integral",
    "delta_to_nabla_param",
    "diamond_derivative",
    "diamond_derivative_of_delta_exp",
    "diamond_derivative_of_nabla_exp",
    "diamond_exponential",
    "diamond_integral",
    "nabla_derivative",
    "nabla_exp",
    "nabla_integral",
    "nabla_to_delta_param",
    "parse_expr",
    "parse_timescale",
    "propagate_dense",
    "propagate_forward",
    "propagate_from_accumulation",
    "rho_shift_delta_exp",
    "rho_shift_nabla_exp",
    "solve",
    "solve_nonhomogeneous",
    "to_second_order_delta",
    "transition_matrix",
]

"""Volterra integral dynamic equations on time scales.

Solves ``x(t) = f(t) + int_a^t k(t, s, x(s)) Δs`` on a bounded time scale by
successive approximations, and brackets solutions between lower and upper
solutions with the monotone iterative technique.
"""

from .bracketing import (
    BracketPair,
    BracketReport,
    ModifiedKernel,
    ModifiedKernelConfig,
    PenaltySign,
    SectorLookup,
    extremal_bracket_check,
    modified_kernel,
    monotone_iterate,
    penalized_solve,
    verify_lower,
    verify_upper,
)
from .calculus import (
    GridFunction,
    check_regressive,
    delta_derivative,
    delta_integral,
    delta_vs_riemann_gap,
    exp_fn,
)
from .dsl import check_monotone_in_x, estimate_lipschitz, evaluate, parse, to_text
from .errors import *  # noqa: F401,F403
from .scenario import Scenario
from .solver import (
    SolveConfig,
    SolveReport,
    StopReason,
    apriori_bound,
    picard_solve,
    residual,
    uniqueness_crosscheck,
)
from .timescale import Grid, Interval, Point, TimeScale, classify, discretize, graininess, rho, sigma

__version__ = "0.1.0"

"""Finite-population evolutionary Markov processes: transition kernels,
stationary distributions, and stability classification."""

from .dynamics import (
    DegenerateIncentiveError,
    FitnessLandscape,
    Incentive,
    MutationRule,
    incentive_values,
    selection_distribution,
    selection_probabilities,
)
from .processes import (
    CycleSpace,
    ProcessModel,
    TransitionKernel,
    TransitionRow,
    VariablePopulationSpace,
    build_kernel,
    cycle_kernel,
    incentive_kernel,
    kfold_kernel,
    sigmoid_birth_curve,
    step_birth_curve,
    variable_population_kernel,
    wright_fisher_kernel,
)
from .stability import (
    StabilityReport,
    TheoremVerdict,
    chi_squared,
    divergence,
    expected_state,
    iss_candidates,
    stability_report,
    theorem_check,
)
from .stationary import (
    ExtremumReport,
    NonConvergenceError,
    StationaryResult,
    ZeroTransitionError,
    detailed_balance_check,
    exact_stationary,
    find_extrema,
    flow_residuals,
    global_balance_residual,
    power_iteration,
    solve_stationary,
)
from .statespace import (
    BudgetExceededError,
    SimplexLattice,
    enumerate_states,
    is_boundary,
    lattice_distance,
    state_count,
)

__version__ = "0.1.0"

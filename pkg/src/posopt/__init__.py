"""Position-optimization games: pure and symmetric mixed equilibria."""

from .errors import (
    BudgetExceeded,
    CapExceeded,
    ConditionViolated,
    DomainError,
    InvalidGame,
    InvalidSpec,
    NTooSmall,
    OutOfRange,
    PosoptError,
    SupportMismatch,
)
from .game import GameDefinition, PureProfile, counts, pure_utilities, win_shares
from .kernels import BACKEND
from .mixed import (
    MixedReport,
    MixedStrategy,
    big_g,
    big_g_inverse,
    check_mixed_bounds,
    coverage_probability,
    e1_direct_sum,
    exact_symmetric_utility,
    fig6_curve,
    g_lower,
    gbar,
    mc_symmetric_utility,
    solve_two_point,
    union_bound_coverage,
    verify_symmetric,
)
from .projection import PseudoSpace, project, restrict
from .pure import (
    EquilibriumReport,
    best_response_dynamics,
    check_pure_theorems,
    empirical_distribution,
    enumerate_pure_equilibria,
    generate_pure,
    kl_bound,
    kl_divergence,
    verify_pure,
)

__version__ = "0.1.0"

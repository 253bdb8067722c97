"""Storage capacity of a continuous-variable quantum perceptron with biased patterns."""

__version__ = "0.1.0"

from .capacity import (  # noqa: E402
    ModelParams,
    SaddleSolution,
    boundary_offsets,
    capacity_curve,
    capacity_for,
    classical_capacity,
    effective_threshold,
    solve_shift,
    storage_capacity,
)
from .errors import (  # noqa: E402
    ConvergenceError,
    Divergent,
    DomainError,
    FitError,
    InfeasibleBias,
    OverflowGuard,
)

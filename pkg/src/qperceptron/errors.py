"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class InfeasibleBias(ValueError):
    """Unbiased patterns (m_in = 0) cannot be mapped onto biased targets (m_out != 0)."""


class ConvergenceError(RuntimeError):
    """An iterative solver failed to bracket or converge."""


class OverflowGuard(ArithmeticError):
    """The capacity is not representable in floating point (m_out too close to +-1).

    ``asymptote`` carries the leading-order large output bias value when one exists.
    """

    def __init__(self, message, asymptote=None):
        super().__init__(message)
        self.asymptote = asymptote


class Divergent(ArithmeticError):
    """The requested limit is infinite."""


class FitError(RuntimeError):
    """A transition fit could not be performed on the supplied data."""

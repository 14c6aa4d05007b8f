"""Exception hierarchy shared across the package."""


class GraphSandwichError(Exception):
    """Base class for all package-specific failures."""


class BudgetExceeded(GraphSandwichError):
    """Exact enumeration was requested beyond the candidate-subset budget."""


class EmptySupport(GraphSandwichError):
    """A factor distribution was queried but no factor exists at all."""


class NoFactorExists(GraphSandwichError):
    """A factor sampler could not produce any factor (empty support, retry
    cap hit, or no initial factor for the switch chain)."""


class AllZeroProbabilities(GraphSandwichError):
    """Every candidate edge was assigned probability zero; the coupling
    cannot pick a maximum and must abort rather than guess."""


class ZetaOutOfRange(GraphSandwichError):
    """A thinning probability landed outside (0, 1)."""

    def __init__(self, value, message=None):
        self.value = value
        super().__init__(message or f"thinning probability {value} is outside (0, 1)")


class InfeasibleState(GraphSandwichError):
    """The coupling admitted an edge that makes the degree target
    unreachable (negative residual degree or inconsistent bookkeeping)."""


class InvariantViolation(GraphSandwichError):
    """A debug-mode runtime assertion failed.  This always indicates a bug,
    never bad input."""


class ConfigError(GraphSandwichError):
    """Invalid experiment configuration (CLI exit code 1)."""

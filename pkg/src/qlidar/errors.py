"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """A constructor or operation received an out-of-domain argument."""


class SingularityError(InvalidParameterError):
    """A formula was evaluated at a point where it diverges."""


class UndefinedThresholdError(InvalidParameterError):
    """The quantum-advantage threshold is undefined for the given inputs."""


class NumericalError(RuntimeError):
    """A numerical procedure failed to meet its accuracy contract."""


class CutoffTooSmallError(NumericalError):
    """Fock-space truncation lost more probability than the budget allows."""

    def __init__(self, trace_deficit: float, budget: float, suggested_cutoff: int):
        self.trace_deficit = trace_deficit
        self.budget = budget
        self.suggested_cutoff = suggested_cutoff
        super().__init__(
            f"truncation lost {trace_deficit:.3e} of the trace (budget {budget:.1e}); "
            f"retry with cutoff >= {suggested_cutoff}"
        )

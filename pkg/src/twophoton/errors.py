"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """A physical parameter is outside its allowed domain (e.g. a <= 0)."""


class UnphysicalKinematicsError(ValueError):
    """Phase-matching equations have no real solution for the given input."""


class InvalidSetupError(ValueError):
    """Construction of a setup type violated one of its invariants.

    ``finding`` is the failing :class:`~twophoton.core.Finding`, whose ``name``
    identifies the violated invariant.
    """

    def __init__(self, finding):
        super().__init__(f"{finding.name}: {finding.message}")
        self.finding = finding


class ConvergenceError(RuntimeError):
    """Iterative refinement did not reach the requested tolerance.

    The best available result is kept on ``last_estimate`` along with the
    error estimate that failed the tolerance.
    """

    def __init__(self, message, last_estimate=None, estimated_error=None):
        super().__init__(message)
        self.last_estimate = last_estimate
        self.estimated_error = estimated_error

"""Exception types shared across the package."""


class BeamcapError(Exception):
    """Base class for beamcap-specific failures."""


class DomainError(BeamcapError, ValueError):
    """Argument outside the mathematical domain of a special function."""


class DegenerateInputError(BeamcapError, ValueError):
    """Input is formally valid but makes the requested quantity undefined."""


class InfeasibleError(BeamcapError, RuntimeError):
    """No parameter value can satisfy the requested constraint."""


class NumericsError(BeamcapError, RuntimeError):
    """A numerical routine failed to converge.

    Carries the best estimate obtained so far in ``estimate``.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate

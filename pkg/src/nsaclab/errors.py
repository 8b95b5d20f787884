"""Exception hierarchy shared by the nsaclab modules."""


class NSACError(Exception):
    """Base class for all nsaclab errors."""


class DomainError(NSACError, ValueError):
    """An argument lies outside the domain of a constitutive function."""


class ConstitutiveLawError(NSACError, ValueError):
    """The chosen pressure/viscosity law violates a structural requirement."""


class StateValidityError(NSACError, ValueError):
    """A state is not admissible (vacuum, degenerate phase field, ...)."""


class ParameterError(NSACError, ValueError):
    """A numerical parameter is out of range."""


class SingularKernelError(NSACError, ValueError):
    """A Green kernel was requested at t = 0 where it is a distribution."""


class CertificationError(NSACError):
    """A frequency-regime inequality failed at a witness wavenumber."""

    def __init__(self, message, witness=None, report=None):
        super().__init__(message)
        self.witness = witness
        self.report = report


class GuardViolation(NSACError):
    """A solver run left the admissible pointwise bounds or blew up.

    ``trajectory`` holds everything recorded before the abort.
    """

    def __init__(self, message, time=None, trajectory=None):
        super().__init__(message)
        self.time = time
        self.trajectory = trajectory


class FitError(NSACError, ValueError):
    """A decay fit could not be performed on the requested window."""


class ConfigError(NSACError, ValueError):
    """Invalid experiment configuration."""

"""Exception types raised by the library."""


class OttoError(Exception):
    """Base class for all library errors."""


class InfeasibleProtocolError(OttoError, ValueError):
    """A frequency schedule has omega(t)**2 < 0 somewhere on its grid."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class IntegrationError(OttoError, RuntimeError):
    """The ODE integrator failed (step-size underflow, too many steps)."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class NonOperatingError(OttoError):
    """No engine window: the cycle produces no positive work."""


class SingularPointError(OttoError, ZeroDivisionError):
    """A ratio was evaluated at a point where its denominator vanishes."""


class NoCrossingError(OttoError, LookupError):
    """A scanned curve never crosses its reference value."""

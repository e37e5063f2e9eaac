"""Exception types raised across the package."""


class VortexLabError(Exception):
    """Base class for all errors raised by vortexlab."""


class InvalidConfig(VortexLabError):
    pass


class InvalidDomain(VortexLabError):
    pass


class AmbiguousLift(VortexLabError):
    pass


class IncompatibleDegrees(VortexLabError):
    pass


class SingularPoint(VortexLabError):
    pass


class TransportTooFar(VortexLabError):
    pass


class SolveFailure(VortexLabError):
    pass


class OutOfDomain(VortexLabError):
    pass


class BadSchedule(VortexLabError):
    pass


class BadExponent(VortexLabError):
    pass


class BadRadius(VortexLabError):
    pass


class SolverStalled(VortexLabError):
    def __init__(self, message, log=None):
        super().__init__(message)
        self.log = log if log is not None else []


class NoCriticalPoint(VortexLabError):
    pass


class DegreeUndefined(VortexLabError):
    pass


class TrustViolation(VortexLabError):
    pass

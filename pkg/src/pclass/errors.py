"""Exception hierarchy shared by every module."""


class PClassError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(PClassError, ValueError):
    pass


class InvalidModule(PClassError, ValueError):
    """The matrix of sigma is not square, not invertible, or sigma^p != I."""


class ZeroVector(PClassError, ValueError):
    pass


class BackendFailure(PClassError):
    """A backend could not complete a computation it is responsible for."""


class PrecisionExhausted(BackendFailure):
    """A local computation could not be certified at the working precision."""


class UnsupportedConfiguration(PClassError, ValueError):
    pass


class APthPower(PClassError, ValueError):
    """The Kummer generator is already a p-th power, so K/F is not of degree p."""


class InfiniteJ(PClassError):
    """The backend cannot present J as a finite F_p-space."""


class NotInSpan(BackendFailure):
    pass


class NormNotOne(PClassError, ValueError):
    pass


class ResolventVanished(BackendFailure):
    pass


class NotInIntersection(PClassError, ValueError):
    pass


class NotAPthPower(PClassError, ValueError):
    pass


class PreconditionViolated(PClassError, ValueError):
    pass


class AssemblyFailed(PClassError):
    pass


class InfiniteProfile(PClassError, ValueError):
    pass


class MixedP(PClassError, ValueError):
    pass


class InvalidPlace(PClassError, ValueError):
    pass


class Undecided(PClassError):
    pass


class ParseError(PClassError, ValueError):
    pass

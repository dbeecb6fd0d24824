"""Exception types raised by tanlab."""


class TanlabError(Exception):
    """Base class for all tanlab errors."""


class OmittedValue(TanlabError, ValueError):
    """The requested point is an asymptotic value, which f omits."""


class ClearanceViolation(TanlabError, ValueError):
    def __init__(self, message, distance):
        super().__init__(message)
        self.distance = distance


class LiftDivergence(TanlabError, RuntimeError):
    pass


class InvalidRadius(TanlabError, ValueError):
    pass


class DegenerateMoebius(TanlabError, ValueError):
    pass


class RationalInput(TanlabError, ValueError):
    """The continued fraction terminated (rational input)."""


class ResonantMultiplier(TanlabError, ArithmeticError):
    def __init__(self, message, n):
        super().__init__(message)
        self.n = n


class InsufficientData(TanlabError, ValueError):
    pass


class SeriesDivergence(TanlabError, ArithmeticError):
    def __init__(self, message, tail_ratio=None):
        super().__init__(message)
        self.tail_ratio = tail_ratio


class OrbitEscaped(TanlabError, RuntimeError):
    def __init__(self, message, step):
        super().__init__(message)
        self.step = step


class IoFailure(TanlabError, OSError):
    pass

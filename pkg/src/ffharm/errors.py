"""Exception hierarchy shared by all modules."""


class FFError(Exception):
    """Base class for every error raised by ffharm."""


class NotOddPrime(FFError, ValueError):
    pass


class DegreeOutOfRange(FFError, ValueError):
    pass


class CapExceeded(FFError, ValueError):
    pass


class DivisionByZero(FFError, ZeroDivisionError):
    pass


class InvalidParams(FFError, ValueError):
    pass


class IndexOutOfRange(FFError, IndexError):
    pass


class DimensionMismatch(FFError, ValueError):
    pass


class EmptyVariety(FFError, ValueError):
    pass


class EmptySet(FFError, ValueError):
    pass


class BadExponent(FFError, ValueError):
    pass


class BadTheta(FFError, ValueError):
    pass


class HypothesisViolated(FFError, ValueError):
    """An operation gated on congruence/size hypotheses got inputs outside them.

    Pass ``exploratory=True`` to the operation to run anyway with the
    violation recorded in the result's flags.
    """


class NotOnSphere(FFError, ValueError):
    pass


class ZeroRadius(FFError, ValueError):
    pass


class InvalidCover(FFError, ValueError):
    pass


class Uncoverable(FFError, ValueError):
    pass


class ZeroFunction(FFError, ValueError):
    pass


class NegativeValue(FFError, ValueError):
    pass


class EmptyMatrix(FFError, ValueError):
    pass


class ConfigError(FFError, ValueError):
    pass

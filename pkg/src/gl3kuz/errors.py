"""Exception hierarchy shared by every module of the package."""


class Gl3KuzError(Exception):
    """Base class for all package errors."""


class NotCoprime(Gl3KuzError, ValueError):
    pass


class NoSolution(Gl3KuzError, ValueError):
    pass


class NotPrime(Gl3KuzError, ValueError):
    pass


class BadModuli(Gl3KuzError, ValueError):
    pass


class BadLevel(Gl3KuzError, ValueError):
    pass


class NotCoprimeSplit(Gl3KuzError, ValueError):
    pass


class UnsupportedCell(Gl3KuzError, ValueError):
    pass


class NotPrimitive(Gl3KuzError, ValueError):
    pass


class BadTwist(Gl3KuzError, ValueError):
    pass


class TooLarge(Gl3KuzError, ValueError):
    pass


class AllZeroFrequencies(Gl3KuzError, ValueError):
    pass


class ContourTooLow(Gl3KuzError, ValueError):
    pass


class NotConverged(Gl3KuzError, ArithmeticError):
    """A quadrature error estimate exceeded the requested tolerance."""

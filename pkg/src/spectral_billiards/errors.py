"""Exception hierarchy shared by all modules.

Two families exist: configuration problems (bad domain parameters, wrong
domain kind for an operation) and numeric-range problems (a quantity
requested outside the range where it is defined or guaranteed).  The CLI
maps them to exit codes 2 and 3 respectively.
"""


class SpectralBilliardsError(Exception):
    """Base class."""


class ConfigError(SpectralBilliardsError, ValueError):
    """Invalid parameters or an operation applied to the wrong kind of object."""


class NumericRangeError(SpectralBilliardsError, ArithmeticError):
    """A numeric input lies outside the admissible or guaranteed range."""


class InvalidDomain(ConfigError):
    pass


class WrongDomain(ConfigError):
    pass


class NotOnBoundary(NumericRangeError):
    pass


class VertexSingular(NumericRangeError):
    """Boundary point lies within the corner tolerance of a polygon vertex."""


class CornerHit(VertexSingular):
    """A ray runs into a polygon vertex."""


class GrazingHit(NumericRangeError):
    """A ray meets the boundary (or an interface) tangentially."""


class NoIntersection(NumericRangeError):
    pass


class ExceptionalSet(NumericRangeError):
    """A perturbed orbit used for a finite-difference Jacobian terminated abnormally."""


class OutOfRange(NumericRangeError):
    pass


class RootNotBracketed(NumericRangeError):
    pass


class InaccessibleLayer(NumericRangeError):
    pass


class SpectrumTruncated(NumericRangeError):
    pass


class NoSurfaceState(NumericRangeError):
    pass


class OutsideZone(NumericRangeError):
    pass

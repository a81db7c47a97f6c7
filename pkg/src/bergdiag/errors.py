"""Exception types raised across the package."""


class BergdiagError(ValueError):
    """Base class for all package errors."""


# jets
class SingularityTooClose(BergdiagError):
    pass


class DivisionByZeroJet(BergdiagError, ZeroDivisionError):
    pass


class InvalidFunctionSyntax(BergdiagError):
    pass


# geometry
class OutsideSector(BergdiagError):
    pass


class InvalidQ(BergdiagError):
    pass


class InvalidA(BergdiagError):
    pass


class OutsideRange(BergdiagError):
    pass


# quadrature
class SingularityInDomain(BergdiagError):
    pass


class EmptyIntersection(BergdiagError):
    pass


class ToleranceNotReached(UserWarning):
    """Warning: an adaptive integral stopped before meeting its tolerance."""


# series
class SeriesNotConverged(BergdiagError):
    pass


# reconstruction
class DegenerateJet(BergdiagError):
    pass


class OutsideAtlas(BergdiagError):
    pass


class SlowConvergence(BergdiagError):
    pass


class InvalidEps(BergdiagError):
    pass


class InconsistentOverlap(BergdiagError):
    pass


class CrossingMismatch(BergdiagError):
    pass


# cli
class UnknownExperiment(BergdiagError):
    pass

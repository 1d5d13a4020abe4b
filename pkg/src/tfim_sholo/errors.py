"""Exception types shared across the package."""


class TfimError(Exception):
    """Base class for all package errors."""


# geometry
class GeometryError(TfimError):
    pass


class NonSimplePath(GeometryError):
    pass


class WrongColumnParity(GeometryError):
    pass


class MissingMarks(GeometryError):
    pass


class InvalidMarks(GeometryError):
    pass


class ViolatedNeighborAssumption(GeometryError):
    pass


class OffLattice(GeometryError):
    pass


class NotDobrushin(GeometryError):
    pass


# configurations
class InvalidConfig(TfimError):
    pass


class BoundaryCut(InvalidConfig):
    pass


class NotInterior(InvalidConfig):
    pass


class TieBreak(InvalidConfig):
    pass


# interface
class ForeignPass(TfimError):
    pass


# statistics
class ZeroWeightSum(TfimError):
    pass


class TooFewSamples(TfimError):
    pass


class SigmaOutOfRange(TfimError):
    pass


class StepTooSmall(TfimError):
    pass


class ZeroDenominator(TfimError):
    pass


# analysis
class NonUnitZeta(TfimError):
    pass


class GridMismatch(TfimError):
    pass


class InconsistentInitialData(TfimError):
    pass


class NotSHolomorphic(TfimError):
    pass


class MissingNeighbor(TfimError):
    pass


# parity / oracle
class BoundaryViolation(TfimError):
    pass


class NTooLarge(TfimError):
    pass


class SiteOutOfRange(TfimError):
    pass

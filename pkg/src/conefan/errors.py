"""Exception hierarchy shared by every module."""


class ConeFanError(Exception):
    """Base class for domain errors raised by conefan."""


class ZeroVector(ConeFanError):
    pass


class RankMismatch(ConeFanError):
    pass


class NotSquare(ConeFanError):
    pass


class LatticeOverflow(ConeFanError, OverflowError):
    """An intermediate integer left the signed 64-bit range."""


class ResourceCap(ConeFanError):
    """Base for errors raised when a desk-scale resource cap is exceeded."""


class DualRankCap(ResourceCap):
    pass


class GroupoidBlowup(ResourceCap):
    pass


class NotStronglyConvex(ConeFanError):
    pass


class NotSimplicial(ConeFanError):
    pass


class NotSmooth(ConeFanError):
    pass


class NotContained(ConeFanError):
    pass


class NotAFan(ConeFanError):
    pass


class InvalidComplex(ConeFanError):
    pass


class UnstableCenter(ConeFanError):
    pass


class UnstableRay(ConeFanError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class IllPosed(ConeFanError):
    pass


class NoCertificate(ConeFanError):
    pass


class UnsupportedCoefficient(ConeFanError):
    pass


class FormatError(ConeFanError):
    """An input file does not follow the expected layout."""


class UnknownCone(ConeFanError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""

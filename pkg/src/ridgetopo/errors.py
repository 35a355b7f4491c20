"""Exception hierarchy shared across the package."""


class TopographyError(Exception):
    """Base class for every error raised by ridgetopo."""


class InvalidModel(TopographyError, ValueError):
    """The mixture description is malformed."""


class DimensionMismatch(InvalidModel):
    pass


class NotPositiveDefinite(InvalidModel):
    pass


class BadWeights(InvalidModel):
    pass


class NumericalFailure(TopographyError, ArithmeticError):
    """A numerical procedure could not deliver its contract."""


class NotTwoComponents(TopographyError, ValueError):
    pass


class NotThreeComponents(TopographyError, ValueError):
    pass


class CoincidentMeans(TopographyError, ValueError):
    """The two components of a pair share a mean, so the ridgeline is a point."""


class DegenerateFrame(NumericalFailure):
    pass


class NotCritical(NumericalFailure):
    pass


class InternalInconsistency(NumericalFailure):
    """Two routes that must agree produced different answers."""


class ZeroWeightPair(TopographyError, ValueError):
    pass


class DimensionTooLarge(TopographyError, ValueError):
    pass


class ParseError(TopographyError, ValueError):
    pass


class DegenerateFit(NumericalFailure):
    pass


class TooFewRows(TopographyError, ValueError):
    pass

"""Exception hierarchy shared by all modules."""


class TautweightError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(TautweightError):
    """Invalid scalar parameter (bounds, counts, regularization weights)."""


class GridMismatchError(TautweightError):
    """Two sampled functions that must share a grid do not."""


class DataError(TautweightError):
    """Input data violates a precondition (non-finite, wrong sign, divergent norm)."""


class WeightValidityError(TautweightError):
    """Weight pair violates positivity/regularity assumptions."""


class DivergentDataError(TautweightError):
    """A required integral of the data does not exist (non-integrable head)."""


class InfeasibleTubeError(TautweightError):
    """Taut-string tube is empty or the endpoint pins lie outside it."""


class UnsupportedRegimeError(TautweightError):
    """Requested parameters fall outside the closed-form validity window."""


class UnsupportedProfileError(TautweightError):
    """Operation requires a specific builtin profile."""


class ResolutionError(TautweightError):
    """Grid too coarse to resolve the requested construction."""

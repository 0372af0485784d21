"""Exception types raised across the package.

Every error derives from :class:`ValueError` so callers that only care about
"bad input" can catch one thing.
"""


class VarbootError(ValueError):
    """Base class for all package errors."""


class InvalidInputError(VarbootError):
    pass


class AmbiguousLogarithmError(VarbootError):
    """Rotation angle too close to pi for a unique logarithm."""


class DegeneratePairError(VarbootError):
    """Two points/vectors that do not determine a unique connecting object."""


class InvalidDensityError(VarbootError):
    pass


class DegeneratePathError(VarbootError):
    pass


class InvalidCurveError(VarbootError):
    pass


class UndefinedNormalError(VarbootError):
    """Curvature vanishes, so the principal normal is not defined."""


class InvalidCouplingError(VarbootError):
    pass


class UnsupportedCaseError(VarbootError):
    pass


class InvalidWeightError(VarbootError):
    pass


class InvalidMetricError(VarbootError):
    pass


class DegenerateAnsatzError(VarbootError):
    pass


class PreconditionError(VarbootError):
    pass


class ValidationError(VarbootError):
    """Malformed external input (CSV files, CLI arguments)."""

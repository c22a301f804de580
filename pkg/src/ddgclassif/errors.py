"""Exception types shared across the package.

ValueError subclasses signal bad inputs (shapes, formats, parameters);
RuntimeError subclasses signal failures of the computation itself.
The CLI maps the former to exit code 2 and the latter to exit code 1.
"""


class DimensionError(ValueError):
    """Shapes or grids of the operands do not match."""


class FormatError(ValueError):
    """A file does not follow the documented CSV layout."""


class ParameterError(ValueError):
    """A hyperparameter or option is outside its admissible range."""


class ImputationError(ValueError):
    """A curve has too few observed points to be imputed."""


class CommonSupportError(ValueError):
    """An operation requires all components to share one grid."""


class DegenerateSampleError(ValueError):
    """All pairwise distances in a sample are zero."""


class DegenerateScaleError(ValueError):
    """A scale estimate is zero where a positive one is required."""


class FitError(RuntimeError):
    """A model fit failed or did not converge."""


class NumericalError(RuntimeError):
    """A numerical routine failed beyond recovery (e.g. factorization)."""

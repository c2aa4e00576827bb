"""Exception types shared across the package."""


class OrdintervalError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInterval(OrdintervalError):
    """Interval bounds are non-finite or in the wrong order."""


class DegenerateInterval(OrdintervalError):
    """An operation requiring lower < upper received a zero-width interval."""


class TooManyClasses(OrdintervalError):
    """More ordinal classes requested than distinct values available."""


class ZeroVariance(OrdintervalError):
    """A standardizer hit a pointwise standard deviation of zero."""


class ShapeMismatch(OrdintervalError):
    """Operands have incompatible feature counts, grids, or lengths."""


class EmptyGrid(OrdintervalError):
    """Grid subsampling would leave no points."""


class InvalidParameter(OrdintervalError):
    """A parameter or precondition check failed."""


class NotSymmetric(OrdintervalError):
    """A matrix expected to be symmetric is not."""


class NumericalFailure(OrdintervalError):
    """Non-finite values encountered during a numerical routine."""


class FitFailed(OrdintervalError):
    """Model fitting did not converge or is impossible for the given data."""


class EmptySplit(OrdintervalError):
    """A binary decomposition step produced an empty class side."""


class SplitFailed(OrdintervalError):
    """Train/test splitting could not cover every class."""


class SingularCovariance(OrdintervalError):
    """Covariance matrix not invertible even after conditioning."""


class DegenerateKernel(OrdintervalError):
    """Centered kernel matrix has no positive eigenvalues."""


class SchemaError(OrdintervalError):
    """A CSV file does not match the expected schema."""

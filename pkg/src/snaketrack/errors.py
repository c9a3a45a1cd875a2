"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Array or vector dimensions do not match the expected layout."""


class ParameterError(ValueError):
    """A parameter value is outside its valid range."""


class EmptyMaskError(ValueError):
    """A binary mask with at least one set pixel was required."""


class EmptySilhouetteError(RuntimeError):
    """Rendered or observed silhouette has (near-)zero mass; centroid undefined.

    The estimator treats this as "robot not visible" and skips the
    measurement update for the frame rather than aborting the run.
    """


class UnobservableStateError(RuntimeError):
    """A finite-difference probe produced an empty silhouette.

    The centroid Jacobian is undefined at such a state; callers fall back
    to skipping the measurement update.
    """


class SingularInnovationError(RuntimeError):
    """Innovation covariance is singular (possible only with zero measurement noise)."""


class UndefinedIoUError(ValueError):
    """IoU of two empty masks is undefined."""


class MaskIOError(IOError):
    """Mask or dataset file could not be read or written; message names the path."""

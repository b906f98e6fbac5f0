"""Exception and warning types shared across the package."""


class ManifoldFitError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(ManifoldFitError):
    """Inputs disagree on the ambient dimension, or a shape is malformed."""


class InvalidInput(ManifoldFitError):
    """A numeric input is NaN/Inf or outside its documented domain."""


class EmptyNeighborhood(ManifoldFitError):
    """No samples inside the query ball, or every weight vanished on its boundary."""


class AllWeightsZero(ManifoldFitError):
    """No tangent plane carries positive weight at the query point."""


class StencilEscape(ManifoldFitError):
    """A finite-difference stencil left the region where the field is defined."""


class NumericalError(ManifoldFitError):
    """An underlying numerical routine failed to converge."""


class EmptySetError(ManifoldFitError):
    """A set-to-set distance was requested for an empty point set."""


class TubeExceedsReach(ManifoldFitError):
    """Requested tube radius is not smaller than the manifold reach."""


class ConfigError(ManifoldFitError):
    """An experiment configuration file is malformed or inconsistent."""


class DataError(ManifoldFitError):
    """An input data file is malformed."""


class RankDeficientNeighborhood(UserWarning):
    """Fewer than d+1 neighbors were available for a d-dimensional tangent fit."""


class DegenerateSpectrum(UserWarning):
    """Eigenvalue gap at the projector cut is below resolution; the split is unreliable."""

"""Exception types raised across the package."""


class StructFiltError(Exception):
    """Base class for all errors raised by this package."""


class AllZeroLikelihood(StructFiltError):
    """Every particle assigned zero likelihood; the datum cannot be absorbed."""


class TooFewDistinctPoints(StructFiltError):
    """Fewer distinct points than requested cluster seeds."""


class MaxItersExceeded(StructFiltError):
    """Lloyd iteration failed to reach a fixed point within the cap."""


class UnsetContextField(StructFiltError):
    """A context field is set nowhere on the root-to-node path."""


class DegenerateCloud(StructFiltError):
    """No two distinct particles could be drawn from the cloud."""


class AmplitudesNotNormalized(StructFiltError):
    """Superposition amplitudes do not satisfy sum |a_j|^2 = 1."""


class TreeInvariantViolation(StructFiltError):
    """A structural invariant of the belief tree does not hold."""

"""Exception types raised by the library."""


class AlgebraMismatchError(ValueError):
    """Operands belong to different algebras or have wrong block shapes."""


class NotHermitianError(ValueError):
    """Operation requires a self-adjoint operator."""


class NotPositiveError(ValueError):
    """Operation requires a positive operator."""


class ProjectionCertificateError(ValueError):
    """Candidate operator fails the projection certificate."""


class ChannelConstructionError(ValueError):
    """Channel constructor preconditions violated."""


class UnsupportedNormError(ValueError):
    """Requested (p, q) norm is outside the implemented family."""


class WeightBoundError(ValueError):
    """Weight sequence exceeds its certified bound."""


class SemisimplicityError(RuntimeError):
    """Peripheral eigenvalue cluster has a non-negligible nilpotent part."""


class ConfigError(ValueError):
    """Experiment configuration does not validate."""

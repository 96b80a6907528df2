"""Exception hierarchy shared by all modules."""


class UKrylovError(Exception):
    """Base class; ``code`` is the CLI exit status for this failure."""

    code = 3


class ConfigError(UKrylovError):
    code = 2


class DenseLimitExceeded(UKrylovError):
    pass


class NonNormalizedOperator(UKrylovError):
    pass


class PrecisionExhausted(UKrylovError):
    """Negative Cholesky pivot: the working precision is too low, not a rank drop."""


class RankDeficient(UKrylovError):
    pass


class NormalizationViolation(UKrylovError):
    pass


class DefectiveChannel(UKrylovError):
    pass


class DomainError(UKrylovError, ValueError):
    pass


class SingularEdge(UKrylovError, ValueError):
    pass


class NoConvergence(UKrylovError):
    pass

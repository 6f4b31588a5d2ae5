"""Exception hierarchy shared across the package."""


class CqieError(Exception):
    """Base class for all package-specific errors."""


class InvalidArgumentError(CqieError, ValueError):
    """An argument violated a documented precondition."""


class InfeasibleError(CqieError):
    """The request is well-formed but cannot be satisfied (e.g. no
    connected component large enough for a patch)."""


class EngineMismatchError(CqieError):
    """A dynamics engine received parameters it cannot handle (e.g. a
    transverse field passed to the classical engine)."""


class SizeLimitError(CqieError):
    """System too large for the dense thermal oracle."""


class DegenerateDataError(CqieError):
    """Data admits no finite fit (all-ones fidelities, zero fidelity,
    single distinct abscissa, ...)."""


class UnboundedEstimateError(DegenerateDataError):
    """Maximum-likelihood estimate diverges (e.g. all samples identical)."""


class NoTransitionError(CqieError):
    """A critical-point scan found no interior susceptibility peak."""


class ConfigError(CqieError, ValueError):
    """Experiment configuration failed validation."""

"""Exception types raised by rvflow operations."""


class RVFlowError(ValueError):
    """Base class for all domain errors in the package."""


class NotAZeroError(RVFlowError):
    pass


class StencilOutOfDomainError(RVFlowError):
    pass


class QuadratureNotConvergedError(RVFlowError):
    pass


class HypothesisViolatedError(RVFlowError):
    pass


class OutOfDomainError(RVFlowError):
    pass


class NotContractiveError(RVFlowError):
    pass


class MaxItersError(RVFlowError):
    pass


def as_complex(z, name: str = "z") -> complex:
    """Coerce to a finite Python complex or raise ValueError."""
    w = complex(z)
    if not (w.real == w.real and w.imag == w.imag) or abs(w) == float("inf"):
        raise ValueError(f"{name} must be finite, got {w!r}")
    return w

"""Exception types shared across the package."""


class DomainError(ValueError):
    """Argument outside the domain an operation is defined on."""


class FunctionalEvalError(ValueError):
    """A nonlinearity could not be evaluated (overflow, invalid state).

    Carries the time ``t`` at which evaluation failed when known.
    """

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class NonConvergence(RuntimeError):
    """Fixed-point iteration failed to reach the residual tolerance."""

    def __init__(self, message, residual=None, iterations=None, trace=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
        self.trace = list(trace) if trace is not None else []


class NoBracket(RuntimeError):
    """Continuation ended before the norm response reached the target level.

    ``lambda_last`` / ``norm_last`` hold the last successfully solved point,
    which is the useful diagnostic when a fold was hit.
    """

    def __init__(self, message, lambda_last=0.0, norm_last=0.0, reason=""):
        super().__init__(message)
        self.lambda_last = lambda_last
        self.norm_last = norm_last
        self.reason = reason or message


class IntegrationBlowup(RuntimeError):
    """The verification integrator left the trust region (solution escaping)."""

"""Exception types raised across the package."""


class FracLadderError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(FracLadderError, ValueError):
    pass


class EvaluationError(FracLadderError):
    pass


class AssemblyError(FracLadderError):
    pass


class QuadratureError(FracLadderError):
    pass


class LadderExhaustedError(FracLadderError):
    """Fewer sign-negativity intervals were found than requested."""

    def __init__(self, found, requested, message=None):
        self.found = found
        self.requested = requested
        super().__init__(message or f"ladder exhausted: found {found} of {requested}")


class NonConvergenceError(FracLadderError):
    """No multistart run converged; ``best`` carries the best partial record."""

    def __init__(self, message, best=None):
        self.best = best
        super().__init__(message)


class InvalidStateError(FracLadderError):
    pass


class ConfigError(FracLadderError):
    pass

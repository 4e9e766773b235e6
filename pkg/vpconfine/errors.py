"""Exception hierarchy raised by the solver and mapped to exit codes by the CLI."""


class VPConfineError(Exception):
    """Base class for all solver errors."""


class ConfigurationError(VPConfineError):
    """Invalid or inconsistent input; carries every message found."""

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class DomainError(VPConfineError):
    """A point lies outside the reduced domain or the grid hull."""


class NumericalError(VPConfineError):
    """An iterative method hit its cap without meeting the tolerance."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history or [])


class ConsistencyError(VPConfineError):
    """An internal invariant (monotone descent/ascent) was violated."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history or [])

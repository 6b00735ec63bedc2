"""Exception types shared across the toolkit.

The CLI maps each family onto an exit code, so new errors should subclass
one of the three families below rather than ``Exception`` directly.
"""


class R2SpillError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(R2SpillError, ValueError):
    """Invalid configuration. Carries every problem found, not just the first."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class DataError(R2SpillError, ValueError):
    """Malformed or insufficient input data."""


class NumericalError(R2SpillError, ArithmeticError):
    """A numerical procedure could not produce a valid result."""


class SingularMatrixError(NumericalError):
    pass


class ConvergenceWarning(UserWarning):
    pass

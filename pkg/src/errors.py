"""
Exception types shared by all glspike modules.
"""


class GLSpikeError(Exception):
    """Base class for every error raised by the package."""


class ParameterError(GLSpikeError, ValueError):
    """Invalid numeric argument (negative rate, bad window, ...)."""


class ConfigError(GLSpikeError, ValueError):
    """
    Configuration validation failure.

    Attributes:
        field: Name of the offending configuration field (None if global)
    """

    def __init__(self, message: str, field: str = None):
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)


class DiagramError(GLSpikeError):
    """Malformed diagram: timestamp collision or unreadable dump."""


class TimeOrderError(GLSpikeError, ValueError):
    """Query times out of order or beyond the horizon."""


class StateSpaceCapError(GLSpikeError):
    """Window too wide for an exact generator."""


class SingularSystemError(GLSpikeError):
    """First-passage linear system could not be solved."""


class TruncationBudgetError(GLSpikeError):
    """
    Uniformization needs more Poisson terms than allowed.

    Attributes:
        required_terms: Number of terms needed to meet the error bound
    """

    def __init__(self, required_terms: int, budget: int):
        self.required_terms = required_terms
        self.budget = budget
        super().__init__(
            f"uniformization needs {required_terms} terms, budget is {budget}"
        )


class CoverageError(GLSpikeError, ValueError):
    """Time window not covered by the trajectory."""


class RecordError(GLSpikeError):
    """Run record that does not match the shipped schema."""

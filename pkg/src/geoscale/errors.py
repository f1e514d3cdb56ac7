"""Exception types shared across the package."""


class GeoscaleError(Exception):
    """Base class for all library errors."""


class InputError(GeoscaleError, ValueError):
    """Malformed or inconsistent user input."""


class ContractViolationError(GeoscaleError):
    """A numerical precondition (Hermiticity, PSD-ness, ...) fails beyond tolerance."""


class SingularMatrixError(GeoscaleError):
    """A matrix required to be invertible is numerically singular."""


class DegenerateInputError(GeoscaleError):
    """All evaluation routes for a degenerate input failed."""


class ConfigurationError(GeoscaleError):
    """A parameter schedule cannot be realized (e.g. overflow); message suggests a fallback."""


class EnumerationBudgetError(GeoscaleError):
    """An exact enumeration was refused because it exceeds the configured budget."""


class RandomnessFailureError(GeoscaleError):
    """A randomized step failed (e.g. singular random matrix); retry with a fresh seed."""

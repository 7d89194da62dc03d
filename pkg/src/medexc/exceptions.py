"""Custom exceptions for medexc."""

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from medexc.models.data import ValidationReport


class MedexcError(Exception):
    """Base exception for all medexc errors."""

    pass


class ConfigurationError(MedexcError):
    """Raised when options are inconsistent with each other or with the data."""

    pass


class DataFormatError(MedexcError):
    """Raised when a panel file cannot be parsed."""

    def __init__(
        self,
        message: str,
        line: int | None = None,
        participant: str | None = None,
    ):
        super().__init__(message)
        self.line = line
        self.participant = participant


class DataValidationError(MedexcError):
    """Raised when a dataset breaks a structural invariant."""

    def __init__(self, message: str, report: "ValidationReport | None" = None):
        super().__init__(message)
        self.report = report


class FitError(MedexcError):
    """Raised when a working-model fit cannot be completed."""

    pass


class StratumError(FitError):
    """Raised when a fitting stratum holds too few observations."""

    def __init__(self, stratum: str, size: int, required: int):
        super().__init__(
            f"Stratum '{stratum}' has {size} observations, at least {required} required"
        )
        self.stratum = stratum
        self.size = size
        self.required = required


class DegenerateBasisError(MedexcError):
    """Raised when the weighted projection matrix of f(t) is singular."""

    pass


class IdentificationError(MedexcError):
    """Raised when an identification formula conditions on a null event."""

    pass

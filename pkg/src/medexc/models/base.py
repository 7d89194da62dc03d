"""Base model classes for medexc."""

from typing import TYPE_CHECKING, Any

from pydantic import BaseModel, ConfigDict

if TYPE_CHECKING:
    import pandas as pd


class MedexcBaseModel(BaseModel):
    """Base model for all medexc records and JSON documents."""

    model_config = ConfigDict(
        # Misspelled keys in user JSON must fail loudly
        extra="forbid",
        # Use enum values instead of enum objects
        use_enum_values=True,
        # Validate assignments
        validate_assignment=True,
        # Allow instantiation by both field names and aliases
        validate_by_name=True,
        validate_by_alias=True,
    )


class MedexcResult(MedexcBaseModel):
    """Base class for results that are written to disk."""

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary."""
        return self.model_dump()

    def to_json(self, indent: int | None = 2) -> str:
        """Serialize to a JSON document."""
        return self.model_dump_json(indent=indent)

    def to_dataframe(self) -> "pd.DataFrame":
        """Convert to pandas DataFrame.

        Returns:
            DataFrame with the tabular part of the result

        Examples:

            This is an abstract method that must be implemented by subclasses.
            Use concrete result classes instead:

            >>> result = estimate(dataset, NuisanceSpec(), EstimandConfig())
            >>> df = result.to_dataframe()  # effect curves, one row per t
        """
        # This will be implemented by subclasses
        raise NotImplementedError("Subclasses must implement to_dataframe()")

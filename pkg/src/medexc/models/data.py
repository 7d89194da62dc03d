"""Pydantic records for participant-level panel data.

Records only check types and ranges. Structural invariants (ineligible
decision points left untreated, a common number of decision points, finite
values) are reported by :func:`medexc.data.validate_dataset` so that a bad
trajectory can be described instead of rejected on construction.
"""

from pydantic import Field

from medexc.models.base import MedexcBaseModel


class TimePointRecord(MedexcBaseModel):
    """One decision point: covariates, eligibility, treatment and mediator."""

    x: list[float] = Field(default_factory=list, description="Time-varying covariates")
    i: int = Field(..., ge=0, le=1, description="Eligibility indicator")
    a: int = Field(..., ge=0, le=1, description="Treatment indicator")
    m: float = Field(..., description="Mediator")


class Trajectory(MedexcBaseModel):
    """A participant's decision points in temporal order plus the distal outcome."""

    id: str = Field(default="", description="Participant key")
    points: list[TimePointRecord] = Field(..., min_length=1)
    y: float = Field(..., description="Distal outcome")

    @property
    def T(self) -> int:
        """Number of decision points."""
        return len(self.points)


class Violation(MedexcBaseModel):
    """A single broken invariant."""

    participant: int | None = Field(None, description="Participant index (0-based)")
    t: int | None = Field(None, description="Decision point (1-based)")
    message: str


class ValidationReport(MedexcBaseModel):
    """Outcome of ``validate_dataset``; violations are data, not faults."""

    violations: list[Violation] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        """Whether no invariant is violated."""
        return not self.violations

    def messages(self) -> list[str]:
        """Violation messages in report order."""
        return [v.message for v in self.violations]

    def summary(self, limit: int = 5) -> str:
        """Short human-readable description of the first violations."""
        if self.ok:
            return "ok"
        shown = "; ".join(
            v.message
            + (f" (participant {v.participant})" if v.participant is not None else "")
            for v in self.violations[:limit]
        )
        more = len(self.violations) - limit
        return shown + (f"; ... {more} more" if more > 0 else "")

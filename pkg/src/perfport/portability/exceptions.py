"""Package exceptions."""
import typing as t


class DomainError(ValueError):
    """A numeric input lies outside the domain of the operation."""

    ...


class ConfigurationError(RuntimeError):
    """Platform data required for the requested computation is missing."""

    ...


class UsageError(ValueError):
    """Malformed filter, format, efficiency type or command argument."""

    ...


class RepositoryLockedError(RuntimeError):
    """Another writer holds the repository lock."""

    ...


class RecordValidationError(ValueError):
    """A run record or platform violates the reporting rules.

    Args:
        violations: Every violation found, not just the first one.
    """

    def __init__(self, violations: t.Sequence[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class DuplicateRecordError(RecordValidationError):
    """A record with identical identity and disclosure already exists.

    Args:
        existing_record: Identifier of the record already stored.
    """

    def __init__(self, existing_record: str):
        self.existing_record = existing_record
        super().__init__(
            [
                f"duplicate of record {existing_record}; "
                "ingest with supersede to replace it"
            ]
        )


class BaselineNotFoundError(LookupError):
    """No eligible baseline record exists for the requested key.

    Args:
        application: Application identifier.
        platform: Platform identifier.
        workload: Workload size label.
        space: Reference space name.
    """

    def __init__(self, application: str, platform: str, workload: str, space: str):
        self.key = (application, platform, workload, space)
        super().__init__(
            f"No baseline for application '{application}' on platform "
            f"'{platform}' (workload '{workload}', space '{space}')."
        )


__all__ = [
    "BaselineNotFoundError",
    "ConfigurationError",
    "DomainError",
    "DuplicateRecordError",
    "RecordValidationError",
    "RepositoryLockedError",
    "UsageError",
]

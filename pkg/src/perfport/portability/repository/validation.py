"""Reporting rules for run records and platforms.

Structural checks of JSON lines are done with JSON schemas; the reporting
rules on top of them are checked on the parsed objects. Every check collects
all violations instead of stopping at the first one.
"""
import math
import typing as t
from dataclasses import dataclass, field

from jsonschema import Draft7Validator

from perfport.portability.exceptions import DomainError, RecordValidationError
from perfport.portability.repository.records import (
    MAX_RUNS,
    Level,
    Platform,
    RunRecord,
)

REQUIRED_DISCLOSURE_KEYS = ("compiler", "flags")

_NULLABLE_NUMBER = {"type": ["number", "null"]}

RECORD_SCHEMA = {
    "type": "object",
    "properties": {
        "record_id": {"type": ["string", "null"]},
        "application_id": {"type": "string", "minLength": 1},
        "suite_id": {"type": "string"},
        "platform_id": {"type": ["string", "integer"]},
        "model": {"type": "string", "minLength": 1},
        "portable": {"type": "boolean"},
        "level": {"enum": [level.value for level in Level]},
        "workload": {"type": "string", "minLength": 1},
        "threads": {"type": "integer"},
        "run_seconds": {"type": "array", "items": {"type": "number"}},
        "median_seconds": _NULLABLE_NUMBER,
        "achieved_throughput": _NULLABLE_NUMBER,
        "arithmetic_intensity": _NULLABLE_NUMBER,
        "disclosure": {"type": "object", "additionalProperties": {"type": "string"}},
        "ingest_seq": {"type": ["integer", "null"]},
        "supersedes": {"type": ["string", "null"]},
    },
    "required": [
        "application_id",
        "suite_id",
        "platform_id",
        "model",
        "portable",
        "level",
        "workload",
        "threads",
        "run_seconds",
        "achieved_throughput",
        "arithmetic_intensity",
        "disclosure",
    ],
    "additionalProperties": False,
}

PLATFORM_SCHEMA = {
    "type": "object",
    "properties": {
        "platform_id": {"type": ["string", "integer"]},
        "name": {"type": "string", "minLength": 1},
        "arch_class": {"enum": ["cpu", "gpu", "other"]},
        "cores": {"type": "integer"},
        "chips": {"type": "integer"},
        "cores_per_chip": {"type": "integer"},
        "peak_theoretical": _NULLABLE_NUMBER,
        "roofline": {
            "type": ["object", "null"],
            "properties": {
                "peak_flops": {"type": "number"},
                "peak_bandwidth": {"type": "number"},
            },
            "required": ["peak_flops", "peak_bandwidth"],
            "additionalProperties": False,
        },
    },
    "required": [
        "platform_id",
        "name",
        "arch_class",
        "cores",
        "chips",
        "cores_per_chip",
    ],
    "additionalProperties": False,
}

_RECORD_VALIDATOR = Draft7Validator(RECORD_SCHEMA)
_PLATFORM_VALIDATOR = Draft7Validator(PLATFORM_SCHEMA)


@dataclass
class ValidationReport:
    """Outcome of a validation: ok if no violation was found."""

    violations: t.List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        """True if the validated object follows every rule."""
        return not self.violations

    def raise_for_violations(self) -> None:
        """Raise if any violation was found.

        Raises:
            RecordValidationError: Carrying all violations.
        """
        if self.violations:
            raise RecordValidationError(self.violations)


def _schema_violations(validator: Draft7Validator, data: t.Any) -> t.List[str]:
    violations = []
    for error in sorted(validator.iter_errors(data), key=lambda e: list(e.path)):
        location = "/".join(str(part) for part in error.path) or "<line>"
        violations.append(f"{location}: {error.message}")
    return violations


def parse_record(data: t.Any) -> RunRecord:
    """Build a run record from one decoded record log line.

    Args:
        data: Decoded JSON object.

    Returns:
        The parsed record. Reporting rules are not checked here, see
        validate_record.

    Raises:
        RecordValidationError: If the line does not match the record schema.
    """
    violations = _schema_violations(_RECORD_VALIDATOR, data)
    if violations:
        raise RecordValidationError(violations)
    record = RunRecord.from_json_dict(data)
    stated_median = data.get("median_seconds")
    if stated_median is not None:
        try:
            median = record.median_seconds
        except RecordValidationError:
            # invalid runs are reported by validate_record
            median = None
        if median is not None and not math.isclose(stated_median, median):
            raise RecordValidationError(
                ["median_seconds does not match the median of run_seconds"]
            )
    return record


def parse_platform(data: t.Any) -> Platform:
    """Build a platform from one decoded platform file line.

    Raises:
        RecordValidationError: If the line does not match the platform schema
            or its Roofline is invalid.
    """
    violations = _schema_violations(_PLATFORM_VALIDATOR, data)
    if violations:
        raise RecordValidationError(violations)
    try:
        return Platform.from_json_dict(data)
    except DomainError as error:
        raise RecordValidationError([str(error)]) from error


def validate_record(
    record: RunRecord, known_platforms: t.Collection[str]
) -> ValidationReport:
    """Check a record against the reporting rules.

    Args:
        record: Record to check.
        known_platforms: Identifiers of the platforms in the repository.

    Returns:
        Report listing every violation; ok if there is none.
    """
    report = ValidationReport()
    violations = report.violations
    if record.platform_id not in known_platforms:
        violations.append(f"unknown platform '{record.platform_id}'")
    for name in ("application_id", "model", "workload"):
        if not getattr(record, name):
            violations.append(f"empty {name}")
    if not 1 <= len(record.run_seconds) <= MAX_RUNS:
        violations.append(
            f"expected 1 to {MAX_RUNS} runs, got {len(record.run_seconds)}"
        )
    if any(not run > 0 for run in record.run_seconds):
        violations.append("non-positive runtime")
    if record.threads < 1:
        violations.append("threads must be at least 1")
    if not record.portable and record.level is Level.PEAK:
        violations.append("non-portable record cannot be reported at peak level")
    for name in ("achieved_throughput", "arithmetic_intensity"):
        value = getattr(record, name)
        if value is not None and not value > 0:
            violations.append(f"non-positive {name}")
    for key in REQUIRED_DISCLOSURE_KEYS:
        if key not in record.disclosure:
            violations.append(f"missing disclosure key '{key}'")
    return report


def validate_platform(platform: Platform) -> ValidationReport:
    """Check the consistency of a platform descriptor.

    Returns:
        Report listing every violation; ok if there is none.
    """
    report = ValidationReport()
    violations = report.violations
    if not platform.platform_id:
        violations.append("empty platform_id")
    for name in ("cores", "chips", "cores_per_chip"):
        if getattr(platform, name) < 1:
            violations.append(f"{name} must be at least 1")
    if platform.cores != platform.chips * platform.cores_per_chip:
        violations.append(
            f"cores ({platform.cores}) != chips ({platform.chips}) x "
            f"cores_per_chip ({platform.cores_per_chip})"
        )
    if platform.peak_theoretical is not None and not platform.peak_theoretical > 0:
        violations.append("non-positive peak_theoretical")
    return report


__all__ = [
    "REQUIRED_DISCLOSURE_KEYS",
    "ValidationReport",
    "parse_platform",
    "parse_record",
    "validate_platform",
    "validate_record",
]

"""Run records and platform descriptors stored in the repository."""
import typing as t
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from perfport.portability.exceptions import RecordValidationError
from perfport.portability.metrics import RooflineSpec

MAX_RUNS = 3


class ArchClass(Enum):
    """Architecture class used to group platforms in reports."""

    CPU = "cpu"
    GPU = "gpu"
    OTHER = "other"


class Level(Enum):
    """Optimization level of a run."""

    BASE = "base"
    PEAK = "peak"


def median_of_runs(runs: t.Sequence[float]) -> float:
    """Reported runtime of one to three runs.

    Three runs report the middle one, a single run itself, and two runs the
    mean of both.

    Args:
        runs: Measured runtimes in seconds.

    Returns:
        The median runtime in seconds.

    Raises:
        RecordValidationError: If there are no, more than three or
            non-positive runtimes.
    """
    violations = []
    if not 1 <= len(runs) <= MAX_RUNS:
        violations.append(f"expected 1 to {MAX_RUNS} runs, got {len(runs)}")
    if any(not run > 0 for run in runs):
        violations.append("non-positive runtime")
    if violations:
        raise RecordValidationError(violations)
    return float(np.median(np.asarray(runs, dtype=float)))


@dataclass(frozen=True)
class Platform:
    """Hardware descriptor.

    Args:
        platform_id: Unique key of the platform.
        name: Human readable name, e.g. "Intel Xeon E5-2670".
        arch_class: Architecture class.
        cores: Total number of cores.
        chips: Number of chips.
        cores_per_chip: Cores per chip.
        peak_theoretical: Theoretical peak throughput in GFLOP/s.
        roofline: Measured Roofline ceilings.
    """

    platform_id: str
    name: str
    arch_class: ArchClass = ArchClass.CPU
    cores: int = 1
    chips: int = 1
    cores_per_chip: int = 1
    peak_theoretical: t.Optional[float] = None
    roofline: t.Optional[RooflineSpec] = None

    def to_json_dict(self) -> t.Dict[str, t.Any]:
        """Serialize to the platform file line format."""
        return {
            "platform_id": self.platform_id,
            "name": self.name,
            "arch_class": self.arch_class.value,
            "cores": self.cores,
            "chips": self.chips,
            "cores_per_chip": self.cores_per_chip,
            "peak_theoretical": self.peak_theoretical,
            "roofline": None
            if self.roofline is None
            else {
                "peak_flops": self.roofline.peak_flops,
                "peak_bandwidth": self.roofline.peak_bandwidth,
            },
        }

    @classmethod
    def from_json_dict(cls, data: t.Mapping[str, t.Any]) -> "Platform":
        """Build a platform from a structurally valid platform file line."""
        roofline = data.get("roofline")
        return cls(
            platform_id=str(data["platform_id"]),
            name=data["name"],
            arch_class=ArchClass(data.get("arch_class", "cpu")),
            cores=data["cores"],
            chips=data["chips"],
            cores_per_chip=data["cores_per_chip"],
            peak_theoretical=data.get("peak_theoretical"),
            roofline=None
            if roofline is None
            else RooflineSpec(roofline["peak_flops"], roofline["peak_bandwidth"]),
        )


@dataclass(frozen=True)
class RunRecord:
    """One measured benchmark execution result.

    ``record_id`` and ``ingest_seq`` stay None until the repository assigns
    them on ingest.
    """

    application_id: str
    suite_id: str
    platform_id: str
    model: str
    portable: bool
    level: Level
    workload: str
    threads: int
    run_seconds: t.Tuple[float, ...]
    achieved_throughput: t.Optional[float] = None
    arithmetic_intensity: t.Optional[float] = None
    disclosure: t.Mapping[str, str] = field(default_factory=dict)
    record_id: t.Optional[str] = None
    ingest_seq: t.Optional[int] = None
    supersedes: t.Optional[str] = None

    @property
    def median_seconds(self) -> float:
        """Median of the run times."""
        return median_of_runs(self.run_seconds)

    @property
    def identity(self) -> t.Tuple[t.Any, ...]:
        """Fields two records must differ in to not be duplicates."""
        return (
            self.application_id,
            self.platform_id,
            self.model,
            self.level,
            self.workload,
            tuple(sorted(self.disclosure.items())),
        )

    def assigned(self, record_id: str, ingest_seq: int) -> "RunRecord":
        """Copy of the record carrying the identifiers assigned on ingest."""
        return replace(self, record_id=record_id, ingest_seq=ingest_seq)

    def to_json_dict(self) -> t.Dict[str, t.Any]:
        """Serialize to the record log line format."""
        data = {
            "record_id": self.record_id,
            "application_id": self.application_id,
            "suite_id": self.suite_id,
            "platform_id": self.platform_id,
            "model": self.model,
            "portable": self.portable,
            "level": self.level.value,
            "workload": self.workload,
            "threads": self.threads,
            "run_seconds": list(self.run_seconds),
            "median_seconds": self.median_seconds,
            "achieved_throughput": self.achieved_throughput,
            "arithmetic_intensity": self.arithmetic_intensity,
            "disclosure": dict(self.disclosure),
            "ingest_seq": self.ingest_seq,
        }
        if self.supersedes is not None:
            data["supersedes"] = self.supersedes
        return data

    @classmethod
    def from_json_dict(cls, data: t.Mapping[str, t.Any]) -> "RunRecord":
        """Build a record from a structurally valid record log line."""
        return cls(
            application_id=data["application_id"],
            suite_id=data["suite_id"],
            platform_id=str(data["platform_id"]),
            model=data["model"],
            portable=data["portable"],
            level=Level(data["level"]),
            workload=data["workload"],
            threads=data["threads"],
            run_seconds=tuple(float(run) for run in data["run_seconds"]),
            achieved_throughput=data.get("achieved_throughput"),
            arithmetic_intensity=data.get("arithmetic_intensity"),
            disclosure=dict(data.get("disclosure", {})),
            record_id=data.get("record_id"),
            ingest_seq=data.get("ingest_seq"),
            supersedes=data.get("supersedes"),
        )


__all__ = ["ArchClass", "Level", "MAX_RUNS", "Platform", "RunRecord", "median_of_runs"]

"""Performance efficiency of run records.

Two approaches are supported. Application efficiency compares runtimes with a
baseline run of the same application on the same platform and workload:

==== ===================================== ===================
Type Baseline                              Reference space
==== ===================================== ===================
0    peak run of the same implementation   ``same_impl_peak``
1    best-known portable run, any model    ``portable_any``
2    best-known run of any implementation  ``any_impl``
==== ===================================== ===================

Architectural efficiency compares throughputs with a platform peak: Type 0 the
theoretical peak, Type 1 the Roofline attainable at the kernel's arithmetic
intensity. Ratios above 1 are clamped to 1 and flagged.
"""
import re
import typing as t
from dataclasses import dataclass
from enum import Enum

from perfport.portability.exceptions import (
    BaselineNotFoundError,
    ConfigurationError,
    DomainError,
    UsageError,
)
from perfport.portability.metrics import roofline_attainable
from perfport.portability.repository import (
    BaselineKey,
    Level,
    Platform,
    ReferenceSpace,
    Repository,
    RepositorySnapshot,
    RunRecord,
)


class EfficiencyApproach(Enum):
    """What an efficiency is measured against."""

    APPLICATION = "app"
    ARCHITECTURAL = "arch"


@dataclass(frozen=True)
class EfficiencyType:
    """Approach and type number of an efficiency.

    Args:
        approach: Application or architectural approach.
        type_no: 0, 1 or 2 for the application approach; 0 or 1 for the
            architectural approach.
    """

    approach: EfficiencyApproach
    type_no: int

    def __post_init__(self):
        allowed = (0, 1)
        if self.approach is EfficiencyApproach.APPLICATION:
            allowed = (0, 1, 2)
        if self.type_no not in allowed:
            raise DomainError(
                f"{self.approach.name.lower()} efficiency has no type {self.type_no}."
            )

    def __str__(self) -> str:
        return f"{self.approach.value}-{self.type_no}"

    @classmethod
    def parse(cls, text: str) -> "EfficiencyType":
        """Parse the ``app-N`` / ``arch-N`` notation.

        Raises:
            UsageError: If the text does not name a known efficiency type.
        """
        match = re.fullmatch(r"(app|arch)-(\d)", text.strip().lower())
        if not match:
            raise UsageError(
                f"Unknown efficiency type '{text}'. Use app-0, app-1, app-2, "
                "arch-0 or arch-1."
            )
        try:
            return cls(EfficiencyApproach(match.group(1)), int(match.group(2)))
        except DomainError as error:
            raise UsageError(str(error)) from error

    @property
    def reference_space(self) -> ReferenceSpace:
        """Baseline space of an application efficiency type.

        Raises:
            UsageError: For architectural types, which have no baseline run.
        """
        if self.approach is not EfficiencyApproach.APPLICATION:
            raise UsageError(f"Efficiency type {self} has no baseline run.")
        return (
            ReferenceSpace.SAME_IMPL_PEAK,
            ReferenceSpace.PORTABLE_ANY,
            ReferenceSpace.ANY_IMPL,
        )[self.type_no]


APP_TYPE_0 = EfficiencyType(EfficiencyApproach.APPLICATION, 0)
APP_TYPE_1 = EfficiencyType(EfficiencyApproach.APPLICATION, 1)
APP_TYPE_2 = EfficiencyType(EfficiencyApproach.APPLICATION, 2)
ARCH_TYPE_0 = EfficiencyType(EfficiencyApproach.ARCHITECTURAL, 0)
ARCH_TYPE_1 = EfficiencyType(EfficiencyApproach.ARCHITECTURAL, 1)


@dataclass(frozen=True)
class EfficiencyScore:
    """Efficiency with its type and baseline provenance.

    Args:
        value: Efficiency in (0, 1].
        etype: Efficiency type.
        clamped: True if the raw ratio exceeded 1.
        baseline_record: Record the runtime was compared with.
        baseline_performance: Baseline runtime in seconds (application
            approach) or reference throughput in GFLOP/s (architectural
            approach).
    """

    value: float
    etype: EfficiencyType
    clamped: bool = False
    baseline_record: t.Optional[str] = None
    baseline_performance: t.Optional[float] = None


def _score(raw: float, etype: EfficiencyType, **provenance) -> EfficiencyScore:
    if raw > 1:
        return EfficiencyScore(1.0, etype, True, **provenance)
    return EfficiencyScore(raw, etype, False, **provenance)


def _check_positive(value: t.Optional[float], what: str) -> None:
    if value is None or not value > 0:
        raise DomainError(f"{what} must be > 0: {value}")


def spec_efficiency(
    base_seconds: float,
    peak_seconds: float,
    *,
    baseline_record: t.Optional[str] = None,
) -> EfficiencyScore:
    """Application efficiency Type 0: base runtime against peak runtime.

    Args:
        base_seconds: Runtime at base optimization level.
        peak_seconds: Runtime of the same implementation at peak level.
        baseline_record: Identifier of the peak record, if known.

    Returns:
        min(1, peak_seconds / base_seconds); clamped if peak ran slower.

    Raises:
        DomainError: If a runtime is not positive.
    """
    _check_positive(base_seconds, "Base runtime")
    _check_positive(peak_seconds, "Peak runtime")
    return _score(
        peak_seconds / base_seconds,
        APP_TYPE_0,
        baseline_record=baseline_record,
        baseline_performance=peak_seconds,
    )


def app_efficiency(
    achieved_seconds: float,
    baseline_seconds: float,
    type_no: int,
    *,
    baseline_record: t.Optional[str] = None,
) -> EfficiencyScore:
    """Application efficiency Type 1 or 2 against a best-known runtime.

    Args:
        achieved_seconds: Runtime of the evaluated record.
        baseline_seconds: Best-known runtime in the type's reference space.
        type_no: 1 or 2.
        baseline_record: Identifier of the baseline record, if known.

    Returns:
        min(1, baseline_seconds / achieved_seconds).

    Raises:
        DomainError: If a runtime is not positive or type_no is not 1 or 2.
    """
    if type_no not in (1, 2):
        raise DomainError(
            f"Best-known application efficiency has type 1 or 2, not {type_no}."
        )
    _check_positive(achieved_seconds, "Achieved runtime")
    _check_positive(baseline_seconds, "Baseline runtime")
    return _score(
        baseline_seconds / achieved_seconds,
        EfficiencyType(EfficiencyApproach.APPLICATION, type_no),
        baseline_record=baseline_record,
        baseline_performance=baseline_seconds,
    )


def arch_efficiency(
    achieved_throughput: float,
    platform: Platform,
    type_no: int,
    ai: t.Optional[float] = None,
) -> EfficiencyScore:
    """Architectural efficiency against the platform peak.

    Args:
        achieved_throughput: Measured throughput in GFLOP/s.
        platform: Platform the throughput was measured on.
        type_no: 0 for the theoretical peak, 1 for the Roofline.
        ai: Arithmetic intensity in FLOP/byte, required for type 1.

    Returns:
        Achieved throughput as a fraction of the reference throughput.

    Raises:
        ConfigurationError: If the platform peak, its Roofline or the
            arithmetic intensity required by the type is missing.
        DomainError: If the throughput is not positive.
    """
    etype = EfficiencyType(EfficiencyApproach.ARCHITECTURAL, type_no)
    if type_no == 0:
        if platform.peak_theoretical is None:
            raise ConfigurationError(
                f"Platform '{platform.platform_id}' has no theoretical peak."
            )
        reference = platform.peak_theoretical
    else:
        if platform.roofline is None:
            raise ConfigurationError(
                f"Platform '{platform.platform_id}' has no Roofline."
            )
        if ai is None:
            raise ConfigurationError(
                "Roofline efficiency needs the arithmetic intensity of the run."
            )
        reference = roofline_attainable(ai, platform.roofline)
    _check_positive(achieved_throughput, "Achieved throughput")
    return _score(
        achieved_throughput / reference, etype, baseline_performance=reference
    )


def _as_snapshot(
    repo: t.Union[Repository, RepositorySnapshot]
) -> RepositorySnapshot:
    return repo.snapshot() if isinstance(repo, Repository) else repo


def resolve_baseline(
    repo: t.Union[Repository, RepositorySnapshot],
    application: str,
    platform: str,
    workload: str,
    space: t.Union[ReferenceSpace, str],
    *,
    model: t.Optional[str] = None,
) -> RunRecord:
    """Find the fastest eligible record of a reference space.

    Ties are broken by the earlier ingest.

    Args:
        repo: Repository or snapshot to search.
        application: Application identifier.
        platform: Platform identifier.
        workload: Workload size label; must match exactly.
        space: Reference space.
        model: Programming model of the implementation; required for
            same_impl_peak and ignored otherwise, as in the baseline index.

    Returns:
        The baseline record.

    Raises:
        BaselineNotFoundError: If no record is eligible.
        UsageError: If same_impl_peak is requested without a model.
    """
    key = BaselineKey.of(application, platform, workload, space, model)
    candidates = [
        record
        for record in _as_snapshot(repo).records
        if record.application_id == application
        and record.platform_id == platform
        and record.workload == workload
        and key.space.admits(record)
        and (key.model is None or record.model == key.model)
    ]
    if not candidates:
        raise BaselineNotFoundError(application, platform, workload, key.space.value)
    return min(candidates, key=lambda r: (r.median_seconds, r.ingest_seq))


def efficiency_for_record(
    repo: t.Union[Repository, RepositorySnapshot],
    record: RunRecord,
    etype: EfficiencyType,
) -> EfficiencyScore:
    """Efficiency of a stored record of any type.

    Type 0 pairs a base level record with the fastest peak level record of
    the same programming model. All application types read the baseline
    index.

    Raises:
        UsageError: If a Type 0 application efficiency is requested for a
            peak level record.
        BaselineNotFoundError: If the required baseline does not exist.
        ConfigurationError: If throughput or platform peak data is missing.
    """
    snapshot = _as_snapshot(repo)
    if etype.approach is EfficiencyApproach.ARCHITECTURAL:
        if record.achieved_throughput is None:
            raise ConfigurationError(
                f"Record '{record.record_id}' has no achieved throughput."
            )
        return arch_efficiency(
            record.achieved_throughput,
            snapshot.platforms[record.platform_id],
            etype.type_no,
            record.arithmetic_intensity,
        )
    if etype.type_no == 0:
        if record.level is not Level.BASE:
            raise UsageError("Type 0 efficiency is defined for base level records.")
        peak = snapshot.best_known(
            record.application_id,
            record.platform_id,
            record.workload,
            ReferenceSpace.SAME_IMPL_PEAK,
            record.model,
        )
        return spec_efficiency(
            record.median_seconds, peak.best_seconds, baseline_record=peak.best_record
        )
    entry = snapshot.best_known(
        record.application_id,
        record.platform_id,
        record.workload,
        etype.reference_space,
    )
    return app_efficiency(
        record.median_seconds,
        entry.best_seconds,
        etype.type_no,
        baseline_record=entry.best_record,
    )


__all__ = [
    "APP_TYPE_0",
    "APP_TYPE_1",
    "APP_TYPE_2",
    "ARCH_TYPE_0",
    "ARCH_TYPE_1",
    "BaselineNotFoundError",
    "EfficiencyApproach",
    "EfficiencyScore",
    "EfficiencyType",
    "ReferenceSpace",
    "app_efficiency",
    "arch_efficiency",
    "efficiency_for_record",
    "resolve_baseline",
    "spec_efficiency",
]

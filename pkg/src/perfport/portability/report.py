"""Portability reports for applications and suites and their rendering.

Reports are computed from a repository snapshot and are plain values: the same
report always renders to the same bytes. Efficiency cells are rendered in
percent, rounded half-even to the requested precision; the portability
metrics use one more decimal. CSV output keeps full precision so the metrics
can be re-derived from it.
"""
import csv
import io
import typing as t
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from enum import Enum

import numpy as np

from perfport.portability.efficiency import (
    APP_TYPE_0,
    APP_TYPE_1,
    APP_TYPE_2,
    EfficiencyApproach,
    EfficiencyScore,
    EfficiencyType,
    efficiency_for_record,
)
from perfport.portability.exceptions import BaselineNotFoundError, UsageError
from perfport.portability.metrics import (
    Bound,
    DispersionPair,
    EfficiencySample,
    HarmonicMode,
    PortabilityScore,
    arithmetic_pp,
    classify_bound,
    dispersion,
    harmonic_pp,
    pd_metric,
    performance_distance,
    rms_divergence,
)
from perfport.portability.repository import (
    ArchClass,
    BaselineKey,
    Level,
    ReferenceSpace,
    RepositorySnapshot,
    RunRecord,
)

ALL_CLASSES = "all classes"
UNSUPPORTED = "--"
NO_SUPPORT_MARKER = "(no supported platforms)"

PP_LABEL = "P̄P"
HM_LABEL = "ℰ (supported)"
HM_STRICT_LABEL = "ℰ (strict)"
SD_AM_LABEL = "S.D.(AM)"
SD_HM_LABEL = "S.D.(HM)"
PD_LABEL = "P_D"


class OutputFormat(Enum):
    """Rendering format of a report."""

    TEXT = "text"
    MARKDOWN = "markdown"
    CSV = "csv"


class Metric(Enum):
    """Portability metrics a rendered report can show."""

    PP = "pp"
    HM = "hm"
    HM_STRICT = "hm-strict"
    SD = "sd"


DEFAULT_METRICS = tuple(Metric)


@dataclass(frozen=True)
class MetricSummary:
    """All portability metrics over one set of samples."""

    samples: t.Tuple[EfficiencySample, ...]
    pp_arithmetic: PortabilityScore
    pp_harmonic_supported: PortabilityScore
    pp_harmonic_strict: PortabilityScore
    dispersion: t.Optional[DispersionPair]

    @classmethod
    def from_samples(cls, samples: t.Sequence[EfficiencySample]) -> "MetricSummary":
        """Compute every metric side by side."""
        samples = tuple(samples)
        supported = [sample for sample in samples if sample.supported]
        return cls(
            samples,
            arithmetic_pp(samples),
            harmonic_pp(samples, HarmonicMode.SUPPORTED),
            harmonic_pp(samples, HarmonicMode.STRICT),
            dispersion(supported) if supported else None,
        )

    @property
    def empty_support(self) -> bool:
        """True if no platform of the set is supported."""
        return self.pp_arithmetic.platform_count_supported == 0

    @property
    def supported_platforms(self) -> t.FrozenSet[str]:
        """Platforms of the supported subset S."""
        return frozenset(s.platform_id for s in self.samples if s.supported)


@dataclass(frozen=True)
class ReportRow:
    """One platform of a portability report.

    For Type 0 the subject is the base run and the reference the peak run;
    for Types 1 and 2 the reference is the baseline run. Architectural rows
    carry throughputs instead of seconds and the reference throughput.
    """

    platform_id: str
    arch_class: ArchClass
    efficiency: t.Optional[EfficiencyScore] = None
    subject_threads: t.Optional[int] = None
    subject_value: t.Optional[float] = None
    reference_threads: t.Optional[int] = None
    reference_value: t.Optional[float] = None
    bound: t.Optional[Bound] = None
    note: str = ""

    @property
    def supported(self) -> bool:
        """Whether the application has an efficiency on this platform."""
        return self.efficiency is not None

    @property
    def efficiency_percent(self) -> t.Optional[float]:
        """Efficiency in percent, None if unsupported."""
        return None if self.efficiency is None else self.efficiency.value * 100

    @property
    def clamped(self) -> bool:
        """Whether the efficiency was clamped to 1."""
        return self.efficiency is not None and self.efficiency.clamped

    def sample(self) -> EfficiencySample:
        """The row as a metrics sample."""
        if self.efficiency is None:
            return EfficiencySample.unsupported(self.platform_id)
        return EfficiencySample(self.platform_id, self.efficiency.value)


@dataclass(frozen=True)
class PortabilityReport:
    """Per-platform efficiencies of one application and its portability."""

    application_id: str
    efficiency_type: EfficiencyType
    workload: str
    platform_set: t.Tuple[str, ...]
    rows: t.Tuple[ReportRow, ...]
    summary: MetricSummary
    arch_class_breakdown: t.Mapping[str, MetricSummary]
    baseline_keys: t.Tuple[BaselineKey, ...] = ()

    @property
    def pp_arithmetic(self) -> float:
        """Arithmetic portability in percent."""
        return self.summary.pp_arithmetic.value * 100

    @property
    def pp_harmonic_supported(self) -> float:
        """Harmonic portability over the supported platforms in percent."""
        return self.summary.pp_harmonic_supported.value * 100

    @property
    def pp_harmonic_strict(self) -> float:
        """Strict harmonic portability in percent."""
        return self.summary.pp_harmonic_strict.value * 100

    @property
    def dispersion(self) -> t.Optional[DispersionPair]:
        """Dispersion of the supported efficiencies."""
        return self.summary.dispersion

    @property
    def empty_support(self) -> bool:
        """True if no platform of the set is supported."""
        return self.summary.empty_support


@dataclass(frozen=True)
class SuiteReport:
    """Per-platform efficiency of a benchmark suite and its portability.

    Args:
        suite_id: Suite identifier.
        platform_set: Platforms of the set H.
        summary: Metrics over the per-platform suite efficiencies.
        member_counts: Number of member applications that entered each
            platform's efficiency; empty for supplied efficiencies.
    """

    suite_id: str
    platform_set: t.Tuple[str, ...]
    summary: MetricSummary
    member_counts: t.Mapping[str, int] = field(default_factory=dict)

    @property
    def per_platform_efficiency(self) -> t.Dict[str, t.Optional[float]]:
        """Suite efficiency in percent per platform, None if unsupported."""
        return {
            sample.platform_id: None if not sample.supported else sample.value * 100
            for sample in self.summary.samples
        }

    @property
    def pp_arithmetic(self) -> float:
        """Arithmetic portability in percent."""
        return self.summary.pp_arithmetic.value * 100


@dataclass(frozen=True)
class DivergenceRow:
    """Performance distances of one platform across workloads."""

    platform_id: str
    distances: t.Mapping[str, float]
    rms: t.Optional[float]


@dataclass(frozen=True)
class DivergenceReport:
    """Sensitivity of an application's efficiency to the workload size."""

    application_id: str
    space: ReferenceSpace
    platform_set: t.Tuple[str, ...]
    rows: t.Tuple[DivergenceRow, ...]
    pd: t.Optional[float]


_SPACE_TYPES = {
    ReferenceSpace.SAME_IMPL_PEAK: APP_TYPE_0,
    ReferenceSpace.PORTABLE_ANY: APP_TYPE_1,
    ReferenceSpace.ANY_IMPL: APP_TYPE_2,
}


def _platform_set(
    snapshot: RepositorySnapshot, platforms: t.Optional[t.Sequence[str]]
) -> t.Tuple[str, ...]:
    if platforms is None:
        return tuple(snapshot.platforms)
    unknown = [p for p in platforms if p not in snapshot.platforms]
    if unknown:
        raise UsageError(f"Unknown platforms: {', '.join(unknown)}")
    return tuple(dict.fromkeys(platforms))


def _application_records(
    snapshot: RepositorySnapshot, application: str
) -> t.List[RunRecord]:
    records = [r for r in snapshot.current_records if r.application_id == application]
    if not records:
        raise UsageError(f"Unknown application '{application}'.")
    return records


def _resolve_workload(records: t.Sequence[RunRecord], workload: t.Optional[str]) -> str:
    workloads = list(dict.fromkeys(record.workload for record in records))
    if workload is not None:
        return workload
    if len(workloads) > 1:
        raise UsageError(
            f"Application '{records[0].application_id}' has several workloads "
            f"({', '.join(workloads)}); select one."
        )
    return workloads[0]


def _subject_record(
    records: t.Sequence[RunRecord],
    platform: str,
    workload: str,
    level: Level,
    model: t.Optional[str],
) -> t.Optional[RunRecord]:
    """Latest current portable record of the given platform, workload and level."""
    matching = [
        r
        for r in records
        if r.platform_id == platform
        and r.workload == workload
        and r.level is level
        and r.portable
        and (model is None or r.model == model)
    ]
    return max(matching, key=lambda r: r.ingest_seq) if matching else None


def _report_row(
    snapshot: RepositorySnapshot,
    record: RunRecord,
    etype: EfficiencyType,
) -> ReportRow:
    platform = snapshot.platforms[record.platform_id]
    try:
        score = efficiency_for_record(snapshot, record, etype)
    except BaselineNotFoundError:
        return ReportRow(
            record.platform_id,
            platform.arch_class,
            subject_threads=record.threads,
            subject_value=record.median_seconds,
            note="no baseline run",
        )
    if etype.approach is EfficiencyApproach.ARCHITECTURAL:
        bound = None
        if record.arithmetic_intensity is not None and platform.roofline is not None:
            bound = classify_bound(record.arithmetic_intensity, platform.roofline)
        return ReportRow(
            record.platform_id,
            platform.arch_class,
            score,
            subject_threads=record.threads,
            subject_value=record.achieved_throughput,
            reference_value=score.baseline_performance,
            bound=bound,
        )
    baseline = snapshot.record(score.baseline_record)
    return ReportRow(
        record.platform_id,
        platform.arch_class,
        score,
        subject_threads=record.threads,
        subject_value=record.median_seconds,
        reference_threads=baseline.threads,
        reference_value=baseline.median_seconds,
    )


def _class_breakdown(
    rows: t.Sequence[ReportRow],
) -> t.Dict[str, MetricSummary]:
    breakdown = {}
    for arch_class in ArchClass:
        class_rows = [row for row in rows if row.arch_class is arch_class]
        if class_rows:
            breakdown[arch_class.value] = MetricSummary.from_samples(
                [row.sample() for row in class_rows]
            )
    return breakdown


def application_report(
    snapshot: RepositorySnapshot,
    application: str,
    platforms: t.Optional[t.Sequence[str]] = None,
    etype: EfficiencyType = APP_TYPE_0,
    *,
    workload: t.Optional[str] = None,
    model: t.Optional[str] = None,
    level: Level = Level.BASE,
) -> PortabilityReport:
    """Portability of one application over a platform set.

    The subject run on each platform is the latest current portable record of
    the requested level (Type 0 always uses the base level). Platforms without
    a subject run or without the required baseline are unsupported.

    Args:
        snapshot: Repository snapshot to compute from.
        application: Application identifier.
        platforms: Platform set H; None uses every platform of the repository.
        etype: Efficiency type.
        workload: Workload size; may be omitted if the application has one.
        model: Restrict subject runs to one programming model.
        level: Optimization level of the subject runs for Types 1, 2 and the
            architectural types.

    Returns:
        The report; an empty supported set yields zero scores.

    Raises:
        UsageError: If the application or a platform is unknown or the
            workload is ambiguous.
    """
    records = _application_records(snapshot, application)
    platform_set = _platform_set(snapshot, platforms)
    workload = _resolve_workload(records, workload)
    if etype == APP_TYPE_0:
        level = Level.BASE
    rows = []
    baseline_keys = []
    for platform_id in platform_set:
        subject = _subject_record(records, platform_id, workload, level, model)
        if subject is None:
            rows.append(
                ReportRow(
                    platform_id,
                    snapshot.platforms[platform_id].arch_class,
                    note="no run",
                )
            )
        else:
            rows.append(_report_row(snapshot, subject, etype))
        if etype.approach is not EfficiencyApproach.APPLICATION:
            continue
        subject_model = model if subject is None else subject.model
        if etype == APP_TYPE_0 and subject_model is None:
            continue
        baseline_keys.append(
            BaselineKey.of(
                application,
                platform_id,
                workload,
                etype.reference_space,
                subject_model,
            )
        )
    return PortabilityReport(
        application,
        etype,
        workload,
        platform_set,
        tuple(rows),
        MetricSummary.from_samples([row.sample() for row in rows]),
        _class_breakdown(rows),
        tuple(baseline_keys),
    )


def _geometric_mean(values: t.Sequence[float]) -> float:
    return float(np.exp(np.mean(np.log(np.asarray(values, dtype=float)))))


def suite_report(
    snapshot: RepositorySnapshot,
    suite: str,
    platforms: t.Optional[t.Sequence[str]] = None,
    *,
    supplied: t.Optional[t.Mapping[str, float]] = None,
    workload: t.Optional[str] = None,
) -> SuiteReport:
    """Portability of a benchmark suite over a platform set.

    The suite efficiency of a platform is the geometric mean of the Type 0
    efficiencies of the member applications run on it, unless per-platform
    suite efficiencies are supplied.

    Args:
        snapshot: Repository snapshot to compute from.
        suite: Suite identifier.
        platforms: Platform set H; None uses every platform of the repository,
            or the supplied platforms if the repository has none.
        supplied: Published suite efficiency per platform as fractions.
        workload: Workload size of the member runs; may be omitted if every
            member application has a single workload.

    Returns:
        The suite report; platforms without member runs are unsupported.

    Raises:
        UsageError: If the suite is unknown or a platform is not in the
            repository.
    """
    if supplied is not None:
        if platforms is None and not snapshot.platforms:
            platform_set = tuple(supplied)
        else:
            platform_set = _platform_set(snapshot, platforms)
        samples = [
            EfficiencySample(p, supplied[p])
            if p in supplied
            else EfficiencySample.unsupported(p)
            for p in platform_set
        ]
        return SuiteReport(suite, platform_set, MetricSummary.from_samples(samples))

    members = [
        application
        for application in dict.fromkeys(
            r.application_id for r in snapshot.current_records if r.suite_id == suite
        )
    ]
    if not members:
        raise UsageError(f"Unknown suite '{suite}'.")
    platform_set = _platform_set(snapshot, platforms)
    per_platform: t.Dict[str, t.List[float]] = {p: [] for p in platform_set}
    for application in members:
        records = _application_records(snapshot, application)
        member_workload = _resolve_workload(records, workload)
        for platform_id in platform_set:
            subject = _subject_record(
                records, platform_id, member_workload, Level.BASE, None
            )
            if subject is None:
                continue
            try:
                score = efficiency_for_record(snapshot, subject, APP_TYPE_0)
            except BaselineNotFoundError:
                continue
            per_platform[platform_id].append(score.value)
    samples = [
        EfficiencySample(p, _geometric_mean(values))
        if values
        else EfficiencySample.unsupported(p)
        for p, values in per_platform.items()
    ]
    return SuiteReport(
        suite,
        platform_set,
        MetricSummary.from_samples(samples),
        {p: len(values) for p, values in per_platform.items()},
    )


def divergence_report(
    snapshot: RepositorySnapshot,
    application: str,
    platforms: t.Optional[t.Sequence[str]] = None,
    space: ReferenceSpace = ReferenceSpace.ANY_IMPL,
    *,
    model: t.Optional[str] = None,
    level: Level = Level.BASE,
) -> DivergenceReport:
    """Performance divergence of an application across workload sizes.

    On every platform each workload's subject run is compared with the
    best-known run of the same workload in the reference space; the distances
    are reduced to their RMS per platform and averaged over the platforms
    that have at least one workload.

    Raises:
        UsageError: If the application or a platform is unknown.
    """
    space = ReferenceSpace(space)
    records = _application_records(snapshot, application)
    platform_set = _platform_set(snapshot, platforms)
    etype = _SPACE_TYPES[space]
    if etype == APP_TYPE_0:
        level = Level.BASE
    workloads = list(dict.fromkeys(r.workload for r in records))
    rows = []
    for platform_id in platform_set:
        distances = {}
        for workload in workloads:
            subject = _subject_record(records, platform_id, workload, level, model)
            if subject is None:
                continue
            try:
                score = efficiency_for_record(snapshot, subject, etype)
            except BaselineNotFoundError:
                continue
            distances[workload] = performance_distance(score.value)
        rms = rms_divergence(list(distances.values())) if distances else None
        rows.append(DivergenceRow(platform_id, distances, rms))
    supported = [row.rms for row in rows if row.rms is not None]
    return DivergenceReport(
        application,
        space,
        platform_set,
        tuple(rows),
        pd_metric(supported) if supported else None,
    )


def format_percent(fraction: float, digits: int) -> str:
    """Percent of a fraction rounded half-even to the given decimals."""
    return format_decimal(fraction * 100, digits)


def format_decimal(value: float, digits: int) -> str:
    """Decimal rendering rounded half-even, ignoring float noise."""
    exact = Decimal(f"{value:.10f}")
    return str(exact.quantize(Decimal(1).scaleb(-digits), rounding=ROUND_HALF_EVEN))


def _format_number(value: t.Optional[float]) -> str:
    if value is None:
        return UNSUPPORTED
    text = repr(float(value))
    return text[:-2] if text.endswith(".0") else text


def _format_int(value: t.Optional[int]) -> str:
    return UNSUPPORTED if value is None else str(value)


class _Table(t.NamedTuple):
    title: str
    header: t.List[str]
    rows: t.List[t.List[str]]
    footer: t.List[t.Tuple[str, str]]


def _columns(etype: EfficiencyType) -> t.List[str]:
    if etype.approach is EfficiencyApproach.ARCHITECTURAL:
        middle = ["Threads", "GFLOP/s", "Reference GFLOP/s", "Bound"]
    elif etype.type_no == 0:
        middle = ["Base threads", "Base seconds", "Peak threads", "Peak seconds"]
    else:
        middle = ["Threads", "Seconds", "Baseline threads", "Baseline seconds"]
    return ["Platform", *middle, "Efficiency", "Clamped"]


def _efficiency_cell(
    fraction: t.Optional[float], fmt: OutputFormat, digits: int
) -> str:
    if fraction is None:
        return UNSUPPORTED
    if fmt is OutputFormat.CSV:
        return repr(fraction * 100)
    return format_percent(fraction, digits) + "%"


def _summary_footer(
    summary: MetricSummary,
    metrics: t.Collection[Metric],
    fmt: OutputFormat,
    digits: int,
    scope: t.Optional[str] = None,
) -> t.List[t.Tuple[str, str]]:
    suffix = "" if scope is None else f" [{scope}]"
    if summary.empty_support:
        return [(f"{PP_LABEL}{suffix} {NO_SUPPORT_MARKER}", _pp(0.0, fmt, digits))]
    footer = [
        (label + suffix, _pp(score.value, fmt, digits))
        for metric, label, score in (
            (Metric.PP, PP_LABEL, summary.pp_arithmetic),
            (Metric.HM, HM_LABEL, summary.pp_harmonic_supported),
            (Metric.HM_STRICT, HM_STRICT_LABEL, summary.pp_harmonic_strict),
        )
        if metric in metrics
    ]
    if Metric.SD in metrics and summary.dispersion is not None:
        for label, value in (
            (SD_AM_LABEL, summary.dispersion.sd_am),
            (SD_HM_LABEL, summary.dispersion.sd_hm),
        ):
            cell = repr(value) if fmt is OutputFormat.CSV else format_decimal(
                value, digits + 2
            )
            footer.append((label + suffix, cell))
    return footer


def _pp(fraction: float, fmt: OutputFormat, digits: int) -> str:
    if fmt is OutputFormat.CSV:
        return repr(fraction * 100)
    return format_percent(fraction, digits + 1) + "%"


def _portability_table(
    report: PortabilityReport,
    fmt: OutputFormat,
    digits: int,
    metrics: t.Collection[Metric],
) -> _Table:
    architectural = report.efficiency_type.approach is EfficiencyApproach.ARCHITECTURAL
    rows = []
    for row in report.rows:
        if architectural:
            middle = [
                _format_int(row.subject_threads),
                _format_number(row.subject_value),
                _format_number(row.reference_value),
                UNSUPPORTED if row.bound is None else row.bound.value,
            ]
        else:
            middle = [
                _format_int(row.subject_threads),
                _format_number(row.subject_value),
                _format_int(row.reference_threads),
                _format_number(row.reference_value),
            ]
        efficiency = None if row.efficiency is None else row.efficiency.value
        rows.append(
            [
                row.platform_id,
                *middle,
                _efficiency_cell(efficiency, fmt, digits),
                "yes" if row.clamped else "",
            ]
        )
    footer = []
    if len(report.arch_class_breakdown) > 1 and not report.empty_support:
        for scope, summary in report.arch_class_breakdown.items():
            footer += _summary_footer(summary, metrics, fmt, digits, scope)
        footer += _summary_footer(report.summary, metrics, fmt, digits, ALL_CLASSES)
    else:
        footer += _summary_footer(report.summary, metrics, fmt, digits)
    title = (
        f"{report.application_id}: {report.efficiency_type} efficiency, "
        f"workload {report.workload}"
    )
    return _Table(title, _columns(report.efficiency_type), rows, footer)


def _suite_table(
    report: SuiteReport,
    fmt: OutputFormat,
    digits: int,
    metrics: t.Collection[Metric],
) -> _Table:
    rows = [
        [sample.platform_id, _efficiency_cell(sample.value, fmt, digits)]
        for sample in report.summary.samples
    ]
    footer = _summary_footer(report.summary, metrics, fmt, digits)
    title = f"{report.suite_id}: suite efficiency"
    return _Table(title, ["Platform", "Efficiency"], rows, footer)


def _distance_cell(distance: float, fmt: OutputFormat, digits: int) -> str:
    if fmt is OutputFormat.CSV:
        return repr(distance * 100)
    return format_percent(distance, digits + 1) + "%"


def _divergence_table(
    report: DivergenceReport, fmt: OutputFormat, digits: int
) -> _Table:
    rows = []
    for row in report.rows:
        workloads = ";".join(
            f"{workload}={_distance_cell(distance, fmt, digits)}"
            for workload, distance in row.distances.items()
        )
        rms = UNSUPPORTED if row.rms is None else _pp(row.rms, fmt, digits)
        rows.append([row.platform_id, workloads or UNSUPPORTED, rms])
    if report.pd is None:
        footer = [(f"{PD_LABEL} {NO_SUPPORT_MARKER}", UNSUPPORTED)]
    else:
        footer = [(PD_LABEL, _pp(report.pd, fmt, digits))]
    title = f"{report.application_id}: divergence against {report.space.value}"
    return _Table(title, ["Platform", "Distances", "RMS divergence"], rows, footer)


def _render_text(table: _Table) -> str:
    widths = [
        max(len(cell) for cell in column)
        for column in zip(table.header, *table.rows)
    ]
    lines = [table.title, ""]
    for cells in [table.header, *table.rows]:
        lines.append(
            "  ".join(
                cell.ljust(width) if i == 0 else cell.rjust(width)
                for i, (cell, width) in enumerate(zip(cells, widths))
            ).rstrip()
        )
    lines.append("")
    lines += [f"{label} = {value}" for label, value in table.footer]
    return "\n".join(lines) + "\n"


def _value_column(width: int) -> int:
    # footer values go to the efficiency column, followed by Clamped if wide
    return width - 2 if width > 3 else width - 1


def _render_markdown(table: _Table) -> str:
    width = len(table.header)

    def line(cells: t.Sequence[str]) -> str:
        return "| " + " | ".join(cells) + " |"

    lines = [f"### {table.title}", "", line(table.header), line(["---"] * width)]
    lines += [line(cells) for cells in table.rows]
    value_column = _value_column(width)
    for label, value in table.footer:
        cells = [""] * width
        cells[0] = f"**{label}**"
        cells[value_column] = f"**{value}**"
        lines.append(line(cells))
    return "\n".join(lines) + "\n"


def _render_csv(table: _Table) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(table.header)
    writer.writerows(table.rows)
    if table.footer:
        # an empty row separates the footer from the platform rows
        writer.writerow([])
    width = len(table.header)
    value_column = _value_column(width)
    for label, value in table.footer:
        cells = [""] * width
        cells[0] = label
        cells[value_column] = value
        writer.writerow(cells)
    return buffer.getvalue()


def render(
    report: t.Union[PortabilityReport, SuiteReport, DivergenceReport],
    fmt: t.Union[OutputFormat, str] = OutputFormat.TEXT,
    *,
    precision: int = 0,
    metrics: t.Collection[t.Union[Metric, str]] = DEFAULT_METRICS,
) -> bytes:
    """Render a report deterministically as UTF-8.

    Args:
        report: Report to render.
        fmt: text, markdown or csv.
        precision: Decimals of the efficiency cells; portability metrics
            use one more.
        metrics: Portability metrics to print below the table.

    Returns:
        The rendered report.

    Raises:
        UsageError: If the format or a metric is unknown.
    """
    try:
        fmt = OutputFormat(fmt)
        metrics = {Metric(metric) for metric in metrics}
    except ValueError as error:
        raise UsageError(str(error)) from error
    if precision < 0:
        raise UsageError(f"Precision must be >= 0: {precision}")
    if isinstance(report, PortabilityReport):
        table = _portability_table(report, fmt, precision, metrics)
    elif isinstance(report, SuiteReport):
        table = _suite_table(report, fmt, precision, metrics)
    else:
        table = _divergence_table(report, fmt, precision)
    renderer = {
        OutputFormat.TEXT: _render_text,
        OutputFormat.MARKDOWN: _render_markdown,
        OutputFormat.CSV: _render_csv,
    }[fmt]
    return renderer(table).encode("utf-8")


class ParsedTable(t.NamedTuple):
    """Cells of a rendered CSV report."""

    header: t.List[str]
    rows: t.List[t.Dict[str, t.Any]]
    footer: t.Dict[str, t.Optional[float]]


def _parse_cell(column: str, cell: str) -> t.Any:
    if cell == UNSUPPORTED:
        return None
    if column == "Platform" or column in ("Clamped", "Bound", "Distances"):
        return cell
    if "threads" in column.lower():
        return int(cell)
    return float(cell)


def parse_csv(data: t.Union[bytes, str]) -> ParsedTable:
    """Parse a report rendered as CSV back into typed cells.

    Threads become ints, seconds, throughputs and percents floats and
    unsupported cells None. Footer rows follow the first empty row and are
    returned by label.
    """
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    value_column = _value_column(len(header))
    rows = []
    footer: t.Dict[str, t.Optional[float]] = {}
    in_footer = False
    for cells in reader:
        if not cells:
            in_footer = True
        elif in_footer:
            value = cells[value_column]
            footer[cells[0]] = None if value == UNSUPPORTED else float(value)
        else:
            rows.append(
                {
                    column: _parse_cell(column, cell)
                    for column, cell in zip(header, cells)
                }
            )
    return ParsedTable(header, rows, footer)

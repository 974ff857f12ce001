"""Command line interface of the results repository.

Machine output goes to stdout, diagnostics to stderr. Exit codes are 0 on
success, 1 if data was rejected and 2 on usage or configuration errors.

Typical usage example:
```
perfport --repo results platform add --file platforms.jsonl
perfport --repo results ingest records.jsonl
perfport --repo results --format markdown report 350.md --type app-0
perfport --repo results report --suite OMP2012
```
"""
import argparse
import json
import logging
import os
import sys
import typing as t
from dataclasses import dataclass
from pathlib import Path

from perfport.portability.efficiency import EfficiencyType
from perfport.portability.exceptions import (
    ConfigurationError,
    DomainError,
    RecordValidationError,
    RepositoryLockedError,
    UsageError,
)
from perfport.portability.metrics import RooflineSpec
from perfport.portability.report import (
    DEFAULT_METRICS,
    Metric,
    OutputFormat,
    application_report,
    divergence_report,
    render,
    suite_report,
)
from perfport.portability.repository import (
    ArchClass,
    BaselineEntry,
    BaselineKey,
    Level,
    Platform,
    ReferenceSpace,
    Repository,
    parse_platform,
    parse_record,
)

logger = logging.getLogger(__name__)

REPO_ENV = "PERFPORT_REPO"

EXIT_OK = 0
EXIT_DATA = 1
EXIT_USAGE = 2


@dataclass(frozen=True)
class CliConfig:
    """Global options shared by all sub-commands.

    Args:
        repo_path: Repository directory; falls back to ``PERFPORT_REPO``.
        output_format: Format of rendered reports.
        precision: Decimals of efficiency cells.
        verbose: Log at debug level.
    """

    repo_path: t.Optional[Path] = None
    output_format: OutputFormat = OutputFormat.TEXT
    precision: int = 0
    verbose: bool = False

    @classmethod
    def from_args(
        cls, args: argparse.Namespace, environ: t.Mapping[str, str] = os.environ
    ) -> "CliConfig":
        """Build the configuration from parsed global flags.

        Raises:
            UsageError: If the precision is negative.
        """
        if args.precision < 0:
            raise UsageError(f"--precision must be >= 0, got {args.precision}")
        repo = args.repo or environ.get(REPO_ENV)
        return cls(
            repo_path=Path(repo) if repo else None,
            output_format=OutputFormat(args.format),
            precision=args.precision,
            verbose=args.verbose,
        )

    def open_repository(self, *, create: bool = False) -> Repository:
        """Open the configured repository.

        Args:
            create: Create the directory on first write.

        Raises:
            UsageError: If no repository path is configured.
            ConfigurationError: If the repository does not exist and create
                is False.
        """
        if self.repo_path is None:
            raise UsageError(f"No repository given; pass --repo or set {REPO_ENV}.")
        return Repository(self.repo_path, create=create)


def _error(message: str) -> None:
    print(f"error: {message}", file=sys.stderr)


def _emit(data: bytes) -> None:
    sys.stdout.write(data.decode("utf-8"))


def _csv_list(text: str) -> t.List[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def _platform_list(text: str) -> t.Optional[t.List[str]]:
    return None if text == "all" else _csv_list(text)


def _read_jsonl_file(path: Path) -> t.List[t.Tuple[int, str]]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as error:
        raise UsageError(f"Cannot read '{path}': {error.strerror}") from error
    return [
        (number, line)
        for number, line in enumerate(text.splitlines(), start=1)
        if line.strip()
    ]


def cmd_platform_add(config: CliConfig, args: argparse.Namespace) -> int:
    """Add platforms given by flags or as a JSON lines file."""
    if args.file is not None:
        lines = _read_jsonl_file(Path(args.file))
        try:
            platforms = [parse_platform(json.loads(line)) for _, line in lines]
        except json.JSONDecodeError as error:
            raise UsageError(f"Invalid platform file: {error}") from error
    else:
        if args.id is None or args.name is None or args.cores is None:
            raise UsageError("platform add needs --file or --id, --name and --cores")
        roofline = None
        if args.roofline_flops is not None or args.roofline_bandwidth is not None:
            if args.roofline_flops is None or args.roofline_bandwidth is None:
                raise UsageError(
                    "--roofline-flops and --roofline-bandwidth go together"
                )
            roofline = RooflineSpec(args.roofline_flops, args.roofline_bandwidth)
        cores_per_chip = args.cores_per_chip
        if cores_per_chip is None:
            cores_per_chip = args.cores // max(args.chips, 1)
        platforms = [
            Platform(
                platform_id=args.id,
                name=args.name,
                arch_class=ArchClass(args.arch_class),
                cores=args.cores,
                chips=args.chips,
                cores_per_chip=cores_per_chip,
                peak_theoretical=args.peak,
                roofline=roofline,
            )
        ]
    repo = config.open_repository(create=True)
    for platform in platforms:
        added = repo.add_platform(platform)
        state = "added" if added else "unchanged"
        print(f"platform {platform.platform_id} {state}")
    return EXIT_OK


def cmd_ingest(config: CliConfig, args: argparse.Namespace) -> int:
    """Ingest a file of record lines, reporting every rejected line."""
    lines = _read_jsonl_file(Path(args.file))
    repo = config.open_repository(create=True)
    accepted = 0
    rejected = 0
    changes = []
    stale = []
    for number, line in lines:
        try:
            record = parse_record(json.loads(line))
            summary = repo.ingest(record, supersede=args.supersede)
        except json.JSONDecodeError as error:
            violations = [f"invalid JSON: {error.msg}"]
        except RecordValidationError as error:
            violations = error.violations
        else:
            accepted += 1
            changes += summary.baseline_changes
            stale += summary.stale_reports
            continue
        rejected += 1
        logger.warning("Rejected line %d of %s", number, args.file)
        for violation in violations:
            print(f"{args.file}:{number}: {violation}", file=sys.stderr)
    print(f"accepted {accepted}, rejected {rejected}")
    for change in changes:
        previous = "none" if change.previous is None else change.previous.best_record
        print(f"baseline {change.key}: {previous} -> {change.current.best_record}")
    for name in dict.fromkeys(stale):
        print(f"stale report {name}")
    return EXIT_DATA if rejected else EXIT_OK


def _parse_metrics(text: str) -> t.Tuple[Metric, ...]:
    try:
        return tuple(Metric(name) for name in _csv_list(text))
    except ValueError as error:
        raise UsageError(
            f"{error}; choose from {', '.join(m.value for m in Metric)}"
        ) from error


def _read_efficiency_column(path: Path) -> t.Dict[str, float]:
    column = {}
    for number, line in _read_jsonl_file(path):
        try:
            entry = json.loads(line)
            column[str(entry["platform_id"])] = float(entry["efficiency"]) / 100
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as error:
            raise UsageError(f"{path}:{number}: invalid entry ({error})") from error
    return column


def cmd_report(config: CliConfig, args: argparse.Namespace) -> int:
    """Render an application or suite report."""
    metrics = _parse_metrics(args.metrics)
    platforms = _platform_list(args.platforms)
    repo = config.open_repository()
    snapshot = repo.snapshot()
    if args.suite is not None:
        supplied = None
        if args.efficiency_column is not None:
            supplied = _read_efficiency_column(Path(args.efficiency_column))
        report = suite_report(
            snapshot, args.suite, platforms, supplied=supplied, workload=args.workload
        )
    elif args.application is not None:
        etype = EfficiencyType.parse(args.type)
        report = application_report(
            snapshot,
            args.application,
            platforms,
            etype,
            workload=args.workload,
            model=args.model,
            level=Level(args.level),
        )
        if args.save is not None:
            repo.save_report(
                args.save,
                report.baseline_keys,
                {
                    "application": args.application,
                    "platforms": args.platforms,
                    "type": str(etype),
                    "workload": report.workload,
                    "model": args.model,
                    "level": args.level,
                },
            )
    else:
        raise UsageError("report needs an application or --suite")
    _emit(
        render(
            report, config.output_format, precision=config.precision, metrics=metrics
        )
    )
    return EXIT_OK


def cmd_divergence(config: CliConfig, args: argparse.Namespace) -> int:
    """Render the workload divergence of an application."""
    snapshot = config.open_repository().snapshot()
    report = divergence_report(
        snapshot,
        args.application,
        _platform_list(args.platforms),
        ReferenceSpace(args.space),
        model=args.model,
        level=Level(args.level),
    )
    _emit(render(report, config.output_format, precision=config.precision))
    return EXIT_OK


def cmd_baselines(config: CliConfig, args: argparse.Namespace) -> int:
    """List the best-known run of a key in every reference space.

    The same_impl_peak space has one baseline per programming model.
    """
    snapshot = config.open_repository().snapshot()
    for space in ReferenceSpace:
        entries: t.List[t.Tuple[str, t.Optional[BaselineEntry]]]
        if space is ReferenceSpace.SAME_IMPL_PEAK:
            scope = (args.application, args.platform, args.workload, space)
            entries = sorted(
                (
                    (f"{space.value}({key.model})", entry)
                    for key, entry in snapshot.index.items()
                    if key[:4] == scope
                ),
                key=lambda item: item[0],
            )
        else:
            key = BaselineKey.of(args.application, args.platform, args.workload, space)
            entries = [(space.value, snapshot.index.get(key))]
        if not entries:
            print(f"{space.value}: none")
        for label, entry in entries:
            if entry is None:
                print(f"{label}: none")
            else:
                print(f"{label}: {entry.best_record} {entry.best_seconds!r} s")
    return EXIT_OK


def cmd_query(config: CliConfig, args: argparse.Namespace) -> int:
    """Print matching records as JSON lines."""
    filters: t.Dict[str, t.Any] = {}
    for name in ("application", "suite", "platform", "model", "workload", "level"):
        value = getattr(args, name)
        if value is not None:
            filters[name] = _csv_list(value) if name != "level" else value
    if args.portable is not None:
        filters["portable"] = args.portable
    for record in config.open_repository().query(**filters):
        print(json.dumps(record.to_json_dict(), sort_keys=True))
    return EXIT_OK


def cmd_reports(config: CliConfig, args: argparse.Namespace) -> int:
    """List saved reports and whether they are stale."""
    for name, saved in sorted(config.open_repository().saved_reports().items()):
        print(f"{name}: {'stale' if saved.stale else 'current'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with all sub-commands."""
    parser = argparse.ArgumentParser(
        prog="perfport",
        description="Performance portability results repository.",
    )
    parser.add_argument("--repo", help=f"repository directory (or ${REPO_ENV})")
    parser.add_argument(
        "--format",
        choices=[fmt.value for fmt in OutputFormat],
        default=OutputFormat.TEXT.value,
    )
    parser.add_argument(
        "--precision", type=int, default=0, help="decimals of efficiency cells"
    )
    parser.add_argument("--verbose", "-v", action="store_true")
    commands = parser.add_subparsers(dest="command", required=True)

    platform = commands.add_parser("platform", help="manage platforms")
    platform_commands = platform.add_subparsers(dest="platform_command", required=True)
    add = platform_commands.add_parser("add", help="add a platform")
    add.add_argument("--file", help="JSON lines file of platforms")
    add.add_argument("--id")
    add.add_argument("--name")
    add.add_argument(
        "--arch-class", choices=[c.value for c in ArchClass], default="cpu"
    )
    add.add_argument("--cores", type=int)
    add.add_argument("--chips", type=int, default=1)
    add.add_argument("--cores-per-chip", type=int)
    add.add_argument("--peak", type=float, help="theoretical peak in GFLOP/s")
    add.add_argument("--roofline-flops", type=float, help="GFLOP/s")
    add.add_argument("--roofline-bandwidth", type=float, help="GB/s")
    add.set_defaults(handler=cmd_platform_add)

    ingest = commands.add_parser("ingest", help="ingest a file of record lines")
    ingest.add_argument("file")
    ingest.add_argument(
        "--supersede", action="store_true", help="replace duplicate records"
    )
    ingest.set_defaults(handler=cmd_ingest)

    report = commands.add_parser("report", help="render a portability report")
    report.add_argument("application", nargs="?")
    report.add_argument("--suite")
    report.add_argument(
        "--platforms", default="all", help="comma separated ids or 'all'"
    )
    report.add_argument("--type", default="app-0", help="app-0..2 or arch-0..1")
    report.add_argument(
        "--metrics",
        default=",".join(metric.value for metric in DEFAULT_METRICS),
        help="comma separated subset of pp,hm,hm-strict,sd",
    )
    report.add_argument("--workload")
    report.add_argument("--model")
    report.add_argument(
        "--level", choices=[level.value for level in Level], default="base"
    )
    report.add_argument("--save", metavar="NAME", help="register as saved report")
    report.add_argument(
        "--efficiency-column",
        metavar="FILE",
        help="JSON lines of per-platform suite efficiencies in percent",
    )
    report.set_defaults(handler=cmd_report)

    divergence = commands.add_parser(
        "divergence", help="efficiency divergence across workloads"
    )
    divergence.add_argument("application")
    divergence.add_argument("--platforms", default="all")
    divergence.add_argument(
        "--space",
        choices=[space.value for space in ReferenceSpace],
        default=ReferenceSpace.ANY_IMPL.value,
    )
    divergence.add_argument("--model")
    divergence.add_argument(
        "--level", choices=[level.value for level in Level], default="base"
    )
    divergence.set_defaults(handler=cmd_divergence)

    baselines = commands.add_parser("baselines", help="list baselines of a key")
    baselines.add_argument("application")
    baselines.add_argument("platform")
    baselines.add_argument("workload")
    baselines.set_defaults(handler=cmd_baselines)

    query = commands.add_parser("query", help="print matching records")
    for name in ("application", "suite", "platform", "model", "workload"):
        query.add_argument(f"--{name}", help="comma separated values")
    query.add_argument("--level", choices=[level.value for level in Level])
    portable = query.add_mutually_exclusive_group()
    portable.add_argument(
        "--portable", dest="portable", action="store_true", default=None
    )
    portable.add_argument("--non-portable", dest="portable", action="store_false")
    query.set_defaults(handler=cmd_query)

    reports = commands.add_parser("reports", help="list saved reports")
    reports.set_defaults(handler=cmd_reports)
    return parser


def main(argv: t.Optional[t.Sequence[str]] = None) -> int:
    """Run the command line interface.

    Args:
        argv: Arguments without the program name; defaults to sys.argv.

    Returns:
        Exit status.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as error:
        return EXIT_USAGE if error.code else EXIT_OK
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = CliConfig.from_args(args)
        return args.handler(config, args)
    except RecordValidationError as error:
        for violation in error.violations:
            _error(violation)
        return EXIT_USAGE
    except (UsageError, ConfigurationError, DomainError) as error:
        _error(str(error))
        return EXIT_USAGE
    except RepositoryLockedError as error:
        _error(str(error))
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

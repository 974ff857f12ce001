"""Append-only results repository with an incrementally maintained baseline index.

A repository directory holds

* ``platforms.jsonl``: one platform per line,
* ``records.jsonl``: the append-only record log, one run record per line,
* ``index.json``: the baseline index, rebuildable from the record log,
* ``reports.json``: saved reports and whether a baseline change made them stale.

Ingests are serialized by an in-process lock and a lock file. Readers work on
immutable snapshots; an ingest swaps in a new one once its record is in the log.
"""
import json
import logging
import os
import threading
import typing as t
from collections.abc import Iterable
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from pathlib import Path
from types import MappingProxyType

from perfport.portability.exceptions import (
    BaselineNotFoundError,
    ConfigurationError,
    DuplicateRecordError,
    RecordValidationError,
    RepositoryLockedError,
    UsageError,
)
from perfport.portability.repository.index import (
    BaselineChange,
    BaselineEntry,
    BaselineIndex,
    BaselineKey,
    ReferenceSpace,
    build_index,
    update_index,
)
from perfport.portability.repository.records import Level, Platform, RunRecord
from perfport.portability.repository.validation import (
    parse_platform,
    parse_record,
    validate_platform,
    validate_record,
)

logger = logging.getLogger(__name__)

PLATFORMS_FILE = "platforms.jsonl"
RECORDS_FILE = "records.jsonl"
INDEX_FILE = "index.json"
REPORTS_FILE = "reports.json"
LOCK_FILE = ".lock"

_STRING_FILTERS = {
    "application": "application_id",
    "suite": "suite_id",
    "platform": "platform_id",
    "model": "model",
    "workload": "workload",
}


@dataclass(frozen=True)
class SavedReport:
    """A report registered together with the baseline keys it depends on."""

    name: str
    keys: t.Tuple[BaselineKey, ...]
    request: t.Mapping[str, t.Any] = field(default_factory=dict)
    stale: bool = False

    def to_json_dict(self) -> t.Dict[str, t.Any]:
        """Serialize for the reports file."""
        return {
            "keys": [[*key[:3], key.space.value, key.model] for key in self.keys],
            "request": dict(self.request),
            "stale": self.stale,
        }

    @classmethod
    def from_json_dict(cls, name: str, data: t.Mapping[str, t.Any]) -> "SavedReport":
        """Build from an entry of the reports file."""
        keys = tuple(
            BaselineKey(app, platform, workload, ReferenceSpace(space), *model)
            for app, platform, workload, space, *model in data["keys"]
        )
        return cls(name, keys, dict(data.get("request", {})), data.get("stale", False))


@dataclass(frozen=True)
class IngestSummary:
    """Outcome of an accepted ingest.

    Args:
        record_id: Identifier assigned to the record.
        ingest_seq: Position of the record in the log.
        baseline_changes: Index entries the record became the best for.
        stale_reports: Saved reports invalidated by those changes.
    """

    record_id: str
    ingest_seq: int
    baseline_changes: t.Tuple[BaselineChange, ...] = ()
    stale_reports: t.Tuple[str, ...] = ()


@dataclass(frozen=True)
class RepositorySnapshot:
    """Immutable point-in-time view of a repository."""

    platforms: t.Mapping[str, Platform]
    records: t.Tuple[RunRecord, ...]
    index: t.Mapping[BaselineKey, BaselineEntry]

    @classmethod
    def build(
        cls,
        platforms: t.Mapping[str, Platform],
        records: t.Sequence[RunRecord],
        index: t.Optional[BaselineIndex] = None,
    ) -> "RepositorySnapshot":
        """Freeze the given state, rebuilding the index if none is passed."""
        return cls(
            MappingProxyType(dict(platforms)),
            tuple(records),
            MappingProxyType(dict(build_index(records) if index is None else index)),
        )

    @property
    def superseded(self) -> t.FrozenSet[str]:
        """Identifiers of the records replaced by a later one."""
        return frozenset(r.supersedes for r in self.records if r.supersedes)

    @property
    def current_records(self) -> t.Tuple[RunRecord, ...]:
        """Records that are not superseded, in ingest order."""
        superseded = self.superseded
        return tuple(r for r in self.records if r.record_id not in superseded)

    @property
    def applications(self) -> t.List[str]:
        """Application identifiers in order of first appearance."""
        return list(dict.fromkeys(r.application_id for r in self.records))

    @property
    def suites(self) -> t.List[str]:
        """Suite identifiers in order of first appearance."""
        return list(dict.fromkeys(r.suite_id for r in self.records))

    def record(self, record_id: str) -> RunRecord:
        """Look up a record by identifier.

        Raises:
            KeyError: If no such record exists.
        """
        for record in self.records:
            if record.record_id == record_id:
                return record
        raise KeyError(f"Record '{record_id}' not found.")

    def query(self, **filters: t.Any) -> t.List[RunRecord]:
        """Records matching all filters, in ingest order.

        Supported filters are ``application``, ``suite``, ``platform``,
        ``model`` and ``workload`` (a string or a collection of strings),
        ``level`` (``"base"``/``"peak"`` or a Level) and ``portable`` (bool).

        Raises:
            UsageError: If a filter name or value is malformed.
        """
        predicates = [_predicate(name, value) for name, value in filters.items()]
        return [r for r in self.records if all(p(r) for p in predicates)]

    def best_known(
        self,
        application: str,
        platform: str,
        workload: str,
        space: t.Union[ReferenceSpace, str],
        model: t.Optional[str] = None,
    ) -> BaselineEntry:
        """Current best-known run of a key.

        Args:
            application: Application identifier.
            platform: Platform identifier.
            workload: Workload size label.
            space: Reference space.
            model: Programming model; required for same_impl_peak and
                ignored otherwise.

        Raises:
            BaselineNotFoundError: If no record is eligible for the key.
            UsageError: If same_impl_peak is requested without a model.
        """
        key = BaselineKey.of(application, platform, workload, space, model)
        try:
            return self.index[key]
        except KeyError:
            raise BaselineNotFoundError(
                application, platform, workload, key.space.value
            ) from None


def _predicate(name: str, value: t.Any) -> t.Callable[[RunRecord], bool]:
    if name in _STRING_FILTERS:
        attribute = _STRING_FILTERS[name]
        if isinstance(value, str):
            value = [value]
        if isinstance(value, Iterable):
            accepted = set(value)
        if not isinstance(value, Iterable) or not all(
            isinstance(v, str) for v in accepted
        ):
            raise UsageError(f"Filter '{name}' expects a string, got {value!r}.")
        return lambda record: getattr(record, attribute) in accepted
    if name == "level":
        try:
            level = Level(value)
        except ValueError:
            raise UsageError(f"Unknown level {value!r}.") from None
        return lambda record: record.level is level
    if name == "portable":
        if not isinstance(value, bool):
            raise UsageError(f"Filter 'portable' expects a bool, got {value!r}.")
        return lambda record: record.portable is value
    raise UsageError(f"Unknown filter '{name}'.")


def _read_jsonl(path: Path) -> t.List[t.Tuple[int, t.Any]]:
    if not path.exists():
        return []
    text = path.read_text(encoding="utf-8")
    lines = text.split("\n")
    # last element is empty, or a line still being appended by a writer
    complete = lines[:-1]
    decoded = []
    for number, line in enumerate(complete, start=1):
        if not line.strip():
            continue
        try:
            decoded.append((number, json.loads(line)))
        except json.JSONDecodeError as error:
            raise ConfigurationError(
                f"Corrupt line {number} in {path}: {error}"
            ) from error
    return decoded


def _drop_partial_line(path: Path) -> None:
    """Cut an unterminated last line left behind by an interrupted writer."""
    if not path.exists():
        return
    data = path.read_bytes()
    end = data.rfind(b"\n") + 1
    if end < len(data):
        logger.warning(
            "Dropping %d bytes of an incomplete line at the end of %s",
            len(data) - end,
            path,
        )
        os.truncate(path, end)


def _append_line(path: Path, data: t.Mapping[str, t.Any]) -> None:
    _drop_partial_line(path)
    with path.open("a", encoding="utf-8") as file:
        file.write(json.dumps(data, sort_keys=True) + "\n")
        file.flush()
        os.fsync(file.fileno())


def _write_json_atomic(path: Path, data: t.Any) -> None:
    tmp_path = path.with_name(path.name + ".tmp")
    tmp_path.write_text(
        json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    os.replace(tmp_path, path)


class Repository:
    """Rule-enforcing store of platforms and run records.

    Args:
        path: Repository directory. None keeps the repository in memory.
        create: Create the directory if it does not exist.

    Raises:
        ConfigurationError: If the directory does not exist and create is
            False, or a stored file is corrupt.
    """

    def __init__(self, path: t.Optional[t.Union[str, Path]] = None, *, create=False):
        self._path = None if path is None else Path(path)
        self._write_lock = threading.Lock()
        platforms: t.Dict[str, Platform] = {}
        records: t.List[RunRecord] = []
        self._reports: t.Dict[str, SavedReport] = {}
        if self._path is not None:
            if not self._path.is_dir():
                if not create:
                    raise ConfigurationError(
                        f"Repository '{self._path}' does not exist."
                    )
                self._path.mkdir(parents=True)
                logger.info("Created repository %s", self._path)
            platforms, records = self._load()
        self._snapshot = RepositorySnapshot.build(platforms, records)

    @property
    def path(self) -> t.Optional[Path]:
        """Repository directory, None for an in-memory repository."""
        return self._path

    def _load(self) -> t.Tuple[t.Dict[str, Platform], t.List[RunRecord]]:
        platforms = {}
        records = []
        try:
            for _, data in _read_jsonl(self._path / PLATFORMS_FILE):
                platform = parse_platform(data)
                platforms[platform.platform_id] = platform
            for _, data in _read_jsonl(self._path / RECORDS_FILE):
                records.append(parse_record(data))
        except RecordValidationError as error:
            raise ConfigurationError(
                f"Repository '{self._path}' is corrupt: {error}"
            ) from error
        reports_path = self._path / REPORTS_FILE
        if reports_path.exists():
            stored = json.loads(reports_path.read_text(encoding="utf-8"))
            self._reports = {
                name: SavedReport.from_json_dict(name, data)
                for name, data in stored.items()
            }
        logger.debug(
            "Loaded %d platforms and %d records from %s",
            len(platforms),
            len(records),
            self._path,
        )
        return platforms, records

    @contextmanager
    def _writer(self) -> t.Iterator[None]:
        with self._write_lock:
            if self._path is None:
                yield
                return
            lock_path = self._path / LOCK_FILE
            try:
                descriptor = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
            except FileExistsError:
                raise RepositoryLockedError(
                    f"Repository '{self._path}' is locked by another writer "
                    f"(remove {lock_path} if no writer is running)."
                ) from None
            try:
                os.write(descriptor, str(os.getpid()).encode())
                yield
            finally:
                os.close(descriptor)
                os.unlink(lock_path)

    def snapshot(self) -> RepositorySnapshot:
        """Consistent point-in-time view of the repository."""
        return self._snapshot

    def query(self, **filters: t.Any) -> t.List[RunRecord]:
        """Matching records in ingest order, see RepositorySnapshot.query."""
        return self._snapshot.query(**filters)

    def best_known(
        self,
        application: str,
        platform: str,
        workload: str,
        space: t.Union[ReferenceSpace, str],
        model: t.Optional[str] = None,
    ) -> BaselineEntry:
        """Current best-known run of a key, see RepositorySnapshot.best_known."""
        return self._snapshot.best_known(
            application, platform, workload, space, model
        )

    def add_platform(self, platform: Platform) -> bool:
        """Persist a platform.

        Re-adding an identical platform is a no-op.

        Returns:
            True if the platform was added, False if it already existed.

        Raises:
            RecordValidationError: If the platform is inconsistent or its id is
                already taken by a different definition.
        """
        validate_platform(platform).raise_for_violations()
        with self._writer():
            snapshot = self._snapshot
            existing = snapshot.platforms.get(platform.platform_id)
            if existing == platform:
                logger.debug("Platform %s already present", platform.platform_id)
                return False
            if existing is not None:
                raise RecordValidationError(
                    [
                        f"platform '{platform.platform_id}' is already defined "
                        "differently"
                    ]
                )
            if self._path is not None:
                _append_line(self._path / PLATFORMS_FILE, platform.to_json_dict())
            platforms = dict(snapshot.platforms)
            platforms[platform.platform_id] = platform
            self._snapshot = RepositorySnapshot(
                MappingProxyType(platforms), snapshot.records, snapshot.index
            )
            logger.info("Added platform %s (%s)", platform.platform_id, platform.name)
            return True

    def ingest(self, record: RunRecord, *, supersede: bool = False) -> IngestSummary:
        """Validate and append a record, updating the baseline index.

        Args:
            record: Record without record_id and ingest_seq.
            supersede: Allow replacing a duplicate; the new record is linked to
                the one it supersedes.

        Returns:
            Assigned identifiers, baseline changes and invalidated saved reports.

        Raises:
            RecordValidationError: If the record violates the reporting rules.
            DuplicateRecordError: If an identical record exists and supersede
                is False.
            RepositoryLockedError: If another process is writing.
        """
        with self._writer():
            snapshot = self._snapshot
            validate_record(record, snapshot.platforms).raise_for_violations()
            duplicate = next(
                (r for r in snapshot.current_records if r.identity == record.identity),
                None,
            )
            if duplicate is not None and not supersede:
                raise DuplicateRecordError(duplicate.record_id)
            last_seq = snapshot.records[-1].ingest_seq if snapshot.records else 0
            ingest_seq = last_seq + 1
            stored = replace(
                record.assigned(f"r{ingest_seq:06d}", ingest_seq),
                supersedes=None if duplicate is None else duplicate.record_id,
            )
            index = dict(snapshot.index)
            changes = update_index(index, stored)
            if self._path is not None:
                _append_line(self._path / RECORDS_FILE, stored.to_json_dict())
            self._snapshot = RepositorySnapshot(
                snapshot.platforms,
                snapshot.records + (stored,),
                MappingProxyType(index),
            )
            stale = self._invalidate({change.key for change in changes})
            if self._path is not None:
                try:
                    self._persist_index(index)
                except OSError as error:
                    # rebuilt from the record log on the next load
                    logger.warning("Could not write the index cache: %s", error)
                if stale:
                    self._persist_reports()
        logger.info(
            "Ingested %s (%s on %s, %s, %s): %d baseline changes",
            stored.record_id,
            stored.application_id,
            stored.platform_id,
            stored.model,
            stored.level.value,
            len(changes),
        )
        for name in stale:
            logger.info("Saved report '%s' is stale", name)
        return IngestSummary(stored.record_id, ingest_seq, tuple(changes), stale)

    def _invalidate(self, changed_keys: t.Set[BaselineKey]) -> t.Tuple[str, ...]:
        """Mark every saved report depending on a changed key, stale or not."""
        stale = []
        for name, saved in sorted(self._reports.items()):
            if changed_keys.intersection(saved.keys):
                self._reports[name] = replace(saved, stale=True)
                stale.append(name)
        return tuple(stale)

    def _persist_index(self, index: BaselineIndex) -> None:
        _write_json_atomic(
            self._path / INDEX_FILE,
            [
                {
                    "application_id": key.application_id,
                    "platform_id": key.platform_id,
                    "workload": key.workload,
                    "space": key.space.value,
                    "model": key.model,
                    "best_record": entry.best_record,
                    "best_seconds": entry.best_seconds,
                }
                for key, entry in sorted(index.items(), key=lambda item: str(item[0]))
            ],
        )

    def _persist_reports(self) -> None:
        _write_json_atomic(
            self._path / REPORTS_FILE,
            {name: saved.to_json_dict() for name, saved in self._reports.items()},
        )

    def save_report(
        self,
        name: str,
        keys: t.Iterable[BaselineKey],
        request: t.Optional[t.Mapping[str, t.Any]] = None,
    ) -> SavedReport:
        """Register a report so ingests can tell when it becomes stale.

        Saving a report again with the same name refreshes it.
        """
        with self._writer():
            saved = SavedReport(name, tuple(sorted(set(keys), key=str)), request or {})
            self._reports[name] = saved
            if self._path is not None:
                self._persist_reports()
        logger.info(
            "Saved report '%s' depending on %d baselines", name, len(saved.keys)
        )
        return saved

    def saved_reports(self) -> t.Dict[str, SavedReport]:
        """Saved reports by name."""
        return dict(self._reports)

    def rebuild_index(self) -> BaselineIndex:
        """Baseline index rebuilt from scratch over the current records."""
        return build_index(self._snapshot.records)


__all__ = ["IngestSummary", "Repository", "RepositorySnapshot", "SavedReport"]

"""Index of the best-known run per application, platform, workload and space.

In the same_impl_peak space the key also carries the programming model, so
each implementation has its own peak baseline.
"""
import typing as t
from dataclasses import dataclass
from enum import Enum

from perfport.portability.exceptions import UsageError
from perfport.portability.repository.records import Level, RunRecord


class ReferenceSpace(Enum):
    """Set of implementations a baseline may be chosen from.

    SAME_IMPL_PEAK holds the peak level runs of portable implementations,
    PORTABLE_ANY every portable run in any programming model and ANY_IMPL every
    run including non-portable ones.
    """

    SAME_IMPL_PEAK = "same_impl_peak"
    PORTABLE_ANY = "portable_any"
    ANY_IMPL = "any_impl"

    def admits(self, record: RunRecord) -> bool:
        """Whether the record is eligible as a baseline in this space."""
        if self is ReferenceSpace.SAME_IMPL_PEAK:
            return record.portable and record.level is Level.PEAK
        if self is ReferenceSpace.PORTABLE_ANY:
            return record.portable
        return True


class BaselineKey(t.NamedTuple):
    """Key of a baseline index entry.

    The model is part of the key only in SAME_IMPL_PEAK, where the baseline is
    the peak run of one implementation; it is None in the other spaces.
    """

    application_id: str
    platform_id: str
    workload: str
    space: ReferenceSpace
    model: t.Optional[str] = None

    @classmethod
    def of(
        cls,
        application: str,
        platform: str,
        workload: str,
        space: t.Union[ReferenceSpace, str],
        model: t.Optional[str] = None,
    ) -> "BaselineKey":
        """Key of a space, keeping the model only where it is part of the key.

        Raises:
            UsageError: If SAME_IMPL_PEAK is requested without a model.
        """
        space = ReferenceSpace(space)
        if space is not ReferenceSpace.SAME_IMPL_PEAK:
            return cls(application, platform, workload, space)
        if model is None:
            raise UsageError("Baselines of same_impl_peak need a model.")
        return cls(application, platform, workload, space, model)

    def __str__(self) -> str:
        text = (
            f"{self.application_id}@{self.platform_id}"
            f"[{self.workload}]/{self.space.value}"
        )
        return text if self.model is None else f"{text}({self.model})"


@dataclass(frozen=True)
class BaselineEntry:
    """Current best-known run of a key."""

    key: BaselineKey
    best_record: str
    best_seconds: float
    best_seq: int


@dataclass(frozen=True)
class BaselineChange:
    """A baseline replaced by a faster run (previous is None for a new key)."""

    key: BaselineKey
    previous: t.Optional[BaselineEntry]
    current: BaselineEntry


BaselineIndex = t.Dict[BaselineKey, BaselineEntry]


def keys_for(record: RunRecord) -> t.List[BaselineKey]:
    """All index keys the record is eligible for."""
    return [
        BaselineKey.of(
            record.application_id,
            record.platform_id,
            record.workload,
            space,
            record.model,
        )
        for space in ReferenceSpace
        if space.admits(record)
    ]


def _beats(record: RunRecord, entry: t.Optional[BaselineEntry]) -> bool:
    if entry is None:
        return True
    return (record.median_seconds, record.ingest_seq) < (
        entry.best_seconds,
        entry.best_seq,
    )


def update_index(index: BaselineIndex, record: RunRecord) -> t.List[BaselineChange]:
    """Fold one assigned record into the index in place.

    Args:
        index: Index to update.
        record: Record carrying its record_id and ingest_seq.

    Returns:
        The entries the record became the new best for.
    """
    changes = []
    for key in keys_for(record):
        previous = index.get(key)
        if _beats(record, previous):
            current = BaselineEntry(
                key, record.record_id, record.median_seconds, record.ingest_seq
            )
            index[key] = current
            changes.append(BaselineChange(key, previous, current))
    return changes


def build_index(records: t.Iterable[RunRecord]) -> BaselineIndex:
    """Rebuild the index from scratch by scanning every record."""
    candidates: t.Dict[BaselineKey, t.List[RunRecord]] = {}
    for record in records:
        for key in keys_for(record):
            candidates.setdefault(key, []).append(record)
    index = {}
    for key, eligible in candidates.items():
        best = min(eligible, key=lambda r: (r.median_seconds, r.ingest_seq))
        index[key] = BaselineEntry(
            key, best.record_id, best.median_seconds, best.ingest_seq
        )
    return index


__all__ = [
    "BaselineChange",
    "BaselineEntry",
    "BaselineIndex",
    "BaselineKey",
    "ReferenceSpace",
    "build_index",
    "keys_for",
    "update_index",
]

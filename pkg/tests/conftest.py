import json
import typing as t
from pathlib import Path

import pytest

from perfport.portability.metrics import RooflineSpec
from perfport.portability.repository import (
    ArchClass,
    Level,
    Platform,
    Repository,
    RunRecord,
    parse_platform,
    parse_record,
)

FIXTURES = Path(__file__).parent / "fixtures"


def load_jsonl(name: str) -> t.List[t.Dict[str, t.Any]]:
    text = (FIXTURES / name).read_text(encoding="utf-8")
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def build_record(
    seconds,
    *,
    application="app",
    platform="p1",
    model="omp",
    portable=True,
    level=Level.BASE,
    workload="ref",
    threads=8,
    flags="-O2",
    suite="suite",
    **kwargs,
) -> RunRecord:
    runs = seconds if isinstance(seconds, (list, tuple)) else (seconds,)
    return RunRecord(
        application_id=application,
        suite_id=suite,
        platform_id=platform,
        model=model,
        portable=portable,
        level=level,
        workload=workload,
        threads=threads,
        run_seconds=tuple(float(run) for run in runs),
        disclosure={"compiler": "cc", "flags": flags},
        **kwargs,
    )


CPU = Platform("p1", "Test CPU", ArchClass.CPU, 8, 1, 8, peak_theoretical=1000.0)
GPU = Platform(
    "p2",
    "Test GPU",
    ArchClass.GPU,
    80,
    1,
    80,
    peak_theoretical=7000.0,
    roofline=RooflineSpec(7000.0, 900.0),
)


@pytest.fixture(scope="session")
def make_record():
    return build_record


@pytest.fixture
def repo():
    repository = Repository()
    repository.add_platform(CPU)
    repository.add_platform(GPU)
    return repository


@pytest.fixture
def omp_repo():
    repository = Repository()
    for data in load_jsonl("omp2012_platforms.jsonl"):
        repository.add_platform(parse_platform(data))
    for data in load_jsonl("omp2012_records.jsonl"):
        repository.ingest(parse_record(data))
    return repository

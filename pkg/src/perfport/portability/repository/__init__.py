"""Persistent, rule-enforcing store of run records and platforms."""
from perfport.portability.repository.index import *
from perfport.portability.repository.records import *
from perfport.portability.repository.store import *
from perfport.portability.repository.validation import *

__all__ = [
    "ArchClass",
    "BaselineChange",
    "BaselineEntry",
    "BaselineKey",
    "IngestSummary",
    "Level",
    "Platform",
    "ReferenceSpace",
    "Repository",
    "RepositorySnapshot",
    "RunRecord",
    "SavedReport",
    "ValidationReport",
    "build_index",
    "median_of_runs",
    "parse_platform",
    "parse_record",
    "validate_platform",
    "validate_record",
]

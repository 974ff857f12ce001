"""Performance portability metrics over a rule-governed results repository."""
from perfport.portability.exceptions import *
from perfport.portability.metrics import *
from perfport.portability.efficiency import *
from perfport.portability import repository
from perfport.portability import report
from perfport.portability.repository import (
    Platform,
    ReferenceSpace,
    Repository,
    RunRecord,
)
from perfport.portability.report import (
    application_report,
    divergence_report,
    render,
    suite_report,
)

try:
    from perfport.portability._version import version as __version__
except ModuleNotFoundError:
    pass

__all__ = [
    "repository",
    "report",
    "APP_TYPE_0",
    "APP_TYPE_1",
    "APP_TYPE_2",
    "ARCH_TYPE_0",
    "ARCH_TYPE_1",
    "BaselineNotFoundError",
    "Bound",
    "ConfigurationError",
    "DispersionPair",
    "DomainError",
    "DuplicateRecordError",
    "EfficiencyApproach",
    "EfficiencySample",
    "EfficiencyScore",
    "EfficiencyType",
    "HarmonicMode",
    "PortabilityMetric",
    "Platform",
    "PortabilityScore",
    "RecordValidationError",
    "ReferenceSpace",
    "Repository",
    "RepositoryLockedError",
    "RooflineSpec",
    "RunRecord",
    "UsageError",
    "app_efficiency",
    "application_report",
    "arch_efficiency",
    "arithmetic_pp",
    "classify_bound",
    "dispersion",
    "divergence_report",
    "efficiency_for_record",
    "harmonic_pp",
    "pd_metric",
    "performance_distance",
    "pp_md",
    "render",
    "resolve_baseline",
    "rms_divergence",
    "roofline_attainable",
    "spec_efficiency",
    "suite_report",
]

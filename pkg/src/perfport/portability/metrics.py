"""Portability metrics, dispersion statistics and Roofline arithmetic.

All functions in this module are pure. Efficiencies are fractions in (0, 1];
dispersion statistics are expressed in percentage points.

Typical usage example:
```python
samples = [
    EfficiencySample("skx", 0.3589),
    EfficiencySample("gen9", 0.4871),
    EfficiencySample("v100", 0.4980),
]
arithmetic_pp(samples).value  # 0.448
harmonic_pp(samples, HarmonicMode.SUPPORTED).value  # 0.4381
```
"""
import math
import typing as t
from dataclasses import dataclass
from enum import Enum

import numpy as np

from perfport.portability.exceptions import DomainError


class PortabilityMetric(Enum):
    """Portability metric that produced a score."""

    ARITHMETIC = "arithmetic"
    HARMONIC_STRICT = "harmonic_strict"
    HARMONIC_SUPPORTED = "harmonic_supported"


class HarmonicMode(Enum):
    """Treatment of unsupported platforms by the harmonic metric.

    STRICT scores the application zero as soon as one platform of the set is
    unsupported. SUPPORTED only averages over the platforms that run it.
    """

    STRICT = "strict"
    SUPPORTED = "supported"


class Bound(Enum):
    """Roofline classification of a kernel."""

    COMPUTE_BOUND = "compute_bound"
    MEMORY_BOUND = "memory_bound"


@dataclass(frozen=True)
class EfficiencySample:
    """Performance efficiency of an application on one platform.

    Args:
        platform_id: Platform the efficiency was measured on.
        value: Efficiency as a fraction in (0, 1]. Must be None for
            unsupported platforms.
        supported: False if the application does not run on the platform.
    """

    platform_id: str
    value: t.Optional[float] = None
    supported: bool = True

    def __post_init__(self):
        if self.supported and self.value is None:
            raise DomainError(
                f"Supported sample for platform '{self.platform_id}' has no value."
            )
        if not self.supported and self.value is not None:
            raise DomainError(
                f"Unsupported sample for platform '{self.platform_id}' "
                "must not carry a value."
            )

    @classmethod
    def unsupported(cls, platform_id: str) -> "EfficiencySample":
        """Sample of a platform the application does not run on."""
        return cls(platform_id, None, supported=False)


@dataclass(frozen=True)
class PortabilityScore:
    """Portability score over a platform set H.

    Args:
        value: Score as a fraction in [0, 1].
        metric: Metric that produced the score.
        platform_count_total: Size of the platform set H.
        platform_count_supported: Size of the supported subset S.
    """

    value: float
    metric: PortabilityMetric
    platform_count_total: int
    platform_count_supported: int


@dataclass(frozen=True)
class DispersionPair:
    """Standard deviations accompanying the two mean-based metrics.

    Args:
        sd_am: Population standard deviation of the efficiencies in
            percentage points.
        sd_hm: Delta-method standard deviation of the harmonic mean in
            percentage points.
    """

    sd_am: float
    sd_hm: float


@dataclass(frozen=True)
class RooflineSpec:
    """Measured Roofline ceilings of a platform.

    Args:
        peak_flops: Flat roof in GFLOP/s.
        peak_bandwidth: Slope of the memory roof in GB/s.
    """

    peak_flops: float
    peak_bandwidth: float

    def __post_init__(self):
        for name in ("peak_flops", "peak_bandwidth"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"Roofline {name} must be finite and > 0: {value}")

    @property
    def machine_balance(self) -> float:
        """Ridge point of the roofline in FLOP/byte."""
        return self.peak_flops / self.peak_bandwidth


def _check_fraction(value: float, what: str = "Efficiency") -> None:
    if not (0 < value <= 1):
        raise DomainError(f"{what} {value} outside of (0, 1].")


def _supported_values(samples: t.Sequence[EfficiencySample]) -> np.ndarray:
    values = []
    for sample in samples:
        if sample.supported:
            _check_fraction(sample.value)
            values.append(sample.value)
    return np.asarray(values, dtype=float)


def arithmetic_pp(samples: t.Sequence[EfficiencySample]) -> PortabilityScore:
    """Arithmetic mean of the efficiencies over the supported platforms.

    An empty supported set scores 0.

    Args:
        samples: One sample per platform of the set H.

    Returns:
        The arithmetic portability score.

    Raises:
        DomainError: If a supported efficiency lies outside (0, 1].
    """
    values = _supported_values(samples)
    value = float(np.mean(values)) if values.size else 0.0
    return PortabilityScore(
        value, PortabilityMetric.ARITHMETIC, len(samples), int(values.size)
    )


def harmonic_pp(
    samples: t.Sequence[EfficiencySample],
    mode: HarmonicMode = HarmonicMode.SUPPORTED,
) -> PortabilityScore:
    """Harmonic mean of the efficiencies.

    Args:
        samples: One sample per platform of the set H.
        mode: STRICT scores 0 if any platform is unsupported; SUPPORTED
            averages over the supported subset (0 if it is empty).

    Returns:
        The harmonic portability score.

    Raises:
        DomainError: If a supported efficiency lies outside (0, 1].
    """
    mode = HarmonicMode(mode)
    values = _supported_values(samples)
    metric = (
        PortabilityMetric.HARMONIC_STRICT
        if mode is HarmonicMode.STRICT
        else PortabilityMetric.HARMONIC_SUPPORTED
    )
    if not values.size or (mode is HarmonicMode.STRICT and values.size < len(samples)):
        value = 0.0
    else:
        value = float(values.size / np.sum(1.0 / values))
    return PortabilityScore(value, metric, len(samples), int(values.size))


def dispersion(samples: t.Sequence[EfficiencySample]) -> DispersionPair:
    """Standard deviations of the supported efficiencies in percentage points.

    sd_am uses the population divisor. sd_hm is HM^2 times the sample standard
    deviation of the reciprocal percentages, HM being the harmonic mean in
    percent.

    Args:
        samples: One sample per platform; unsupported ones are ignored.

    Returns:
        Both standard deviations.

    Raises:
        DomainError: If no sample is supported or a value lies outside (0, 1].
    """
    percents = _supported_values(samples) * 100.0
    if not percents.size:
        raise DomainError("Dispersion needs at least one supported sample.")
    if percents.size == 1:
        return DispersionPair(0.0, 0.0)
    reciprocals = 1.0 / percents
    harmonic = percents.size / np.sum(reciprocals)
    return DispersionPair(
        sd_am=float(np.std(percents, ddof=0)),
        sd_hm=float(harmonic**2 * np.std(reciprocals, ddof=1)),
    )


def performance_distance(achieved_efficiency: float) -> float:
    """Relative distance of an implementation to its same-size baseline.

    Args:
        achieved_efficiency: Application efficiency in (0, 1] against the
            baseline on the same platform and input size.

    Returns:
        1 - achieved_efficiency.

    Raises:
        DomainError: If the efficiency lies outside (0, 1].
    """
    _check_fraction(achieved_efficiency)
    return 1.0 - achieved_efficiency


def rms_divergence(distances: t.Sequence[float]) -> float:
    """Root mean square of performance distances across input sizes.

    Raises:
        DomainError: If no distance is given.
    """
    if not len(distances):
        raise DomainError("RMS divergence needs at least one distance.")
    values = np.asarray(distances, dtype=float)
    return float(np.sqrt(np.mean(values**2)))


def pd_metric(per_platform_divergences: t.Sequence[float]) -> float:
    """Arithmetic mean of the RMS divergences over a platform set.

    Raises:
        DomainError: If no divergence is given or one is negative.
    """
    if not len(per_platform_divergences):
        raise DomainError("P_D needs at least one platform divergence.")
    values = np.asarray(per_platform_divergences, dtype=float)
    if np.any(values < 0):
        raise DomainError("RMS divergences must be non-negative.")
    return float(np.mean(values))


def pp_md(component_speedups: t.Sequence[float]) -> float:
    """Harmonic mean of the speedups of non-portable components on a platform.

    Raises:
        DomainError: If no speedup is given or one is not positive.
    """
    if not len(component_speedups):
        raise DomainError("PP_MD needs at least one component speedup.")
    values = np.asarray(component_speedups, dtype=float)
    if np.any(~(values > 0)):
        raise DomainError("Component speedups must be > 0.")
    return float(values.size / np.sum(1.0 / values))


def _check_intensity(ai: float) -> None:
    if not ai > 0:
        raise DomainError(f"Arithmetic intensity must be > 0: {ai}")


def roofline_attainable(ai: float, spec: RooflineSpec) -> float:
    """Attainable throughput in GFLOP/s at a given arithmetic intensity.

    Args:
        ai: Arithmetic intensity in FLOP/byte, may be infinite.
        spec: Roofline of the platform.

    Returns:
        min(peak_flops, ai * peak_bandwidth)

    Raises:
        DomainError: If ai is not positive.
    """
    _check_intensity(ai)
    if ai >= spec.machine_balance:
        return spec.peak_flops
    return min(spec.peak_flops, ai * spec.peak_bandwidth)


def classify_bound(ai: float, spec: RooflineSpec) -> Bound:
    """Classify a kernel as compute or memory bound.

    The ridge point itself counts as compute bound.

    Raises:
        DomainError: If ai is not positive.
    """
    _check_intensity(ai)
    if ai >= spec.machine_balance:
        return Bound.COMPUTE_BOUND
    return Bound.MEMORY_BOUND


__all__ = [
    "Bound",
    "DispersionPair",
    "EfficiencySample",
    "HarmonicMode",
    "PortabilityMetric",
    "PortabilityScore",
    "RooflineSpec",
    "arithmetic_pp",
    "classify_bound",
    "dispersion",
    "harmonic_pp",
    "pd_metric",
    "performance_distance",
    "pp_md",
    "rms_divergence",
    "roofline_attainable",
]

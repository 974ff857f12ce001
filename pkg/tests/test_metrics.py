import json
import math
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from perfport.portability.exceptions import DomainError
from perfport.portability.metrics import (
    Bound,
    EfficiencySample,
    HarmonicMode,
    PortabilityMetric,
    RooflineSpec,
    arithmetic_pp,
    classify_bound,
    dispersion,
    harmonic_pp,
    pd_metric,
    performance_distance,
    pp_md,
    rms_divergence,
    roofline_attainable,
)

FIXTURES = Path(__file__).parent / "fixtures"

RODINIA = json.loads((FIXTURES / "rodinia_efficiencies.json").read_text())

efficiencies = st.floats(min_value=0.01, max_value=1.0)


def rodinia_samples(kernel):
    return [
        EfficiencySample.unsupported(platform)
        if percent is None
        else EfficiencySample(platform, percent / 100)
        for platform, percent in zip(RODINIA["platforms"], RODINIA["kernels"][kernel])
    ]


def samples_of(values):
    return [EfficiencySample(f"p{i}", value) for i, value in enumerate(values)]


class TestRodiniaKernels:
    @pytest.mark.parametrize(
        "kernel, harmonic, arithmetic, sd_hm, sd_am",
        [
            ("LUD", 43.81, 44.80, 8.39, 6.31),
            ("BP-AW", 86.41, 86.67, 7.00, 4.96),
            ("SC", 22.94, 51.15, 25.93, 33.85),
            ("KNN", 45.61, 51.32, 16.82, 19.07),
            ("HS", 35.33, 61.63, 35.10, 33.36),
        ],
    )
    def test_published_scores(self, kernel, harmonic, arithmetic, sd_hm, sd_am):
        samples = rodinia_samples(kernel)
        assert harmonic_pp(samples).value * 100 == pytest.approx(harmonic, abs=0.05)
        assert arithmetic_pp(samples).value * 100 == pytest.approx(
            arithmetic, abs=0.05
        )
        pair = dispersion([s for s in samples if s.supported])
        assert pair.sd_hm == pytest.approx(sd_hm, abs=0.05)
        assert pair.sd_am == pytest.approx(sd_am, abs=0.05)

    def test_strict_mode_zero_with_unsupported_platform(self):
        samples = rodinia_samples("BP-AW")
        assert harmonic_pp(samples, HarmonicMode.STRICT).value == 0.0
        assert harmonic_pp(samples, HarmonicMode.SUPPORTED).value > 0
        assert arithmetic_pp(samples).value > 0

    def test_platform_counts(self):
        score = arithmetic_pp(rodinia_samples("BP-AW"))
        assert score.metric is PortabilityMetric.ARITHMETIC
        assert score.platform_count_total == 3
        assert score.platform_count_supported == 2


class TestArithmetic:
    @pytest.mark.parametrize(
        "values, expected",
        [([1.0, 1.0, 1.0], 1.0), ([0.8], 0.8), ([0.5, 1.0], 0.75)],
    )
    def test_mean(self, values, expected):
        assert arithmetic_pp(samples_of(values)).value == pytest.approx(expected)

    def test_empty_support_scores_zero(self):
        samples = [EfficiencySample.unsupported("a"), EfficiencySample.unsupported("b")]
        score = arithmetic_pp(samples)
        assert score.value == 0.0
        assert score.platform_count_total == 2
        assert score.platform_count_supported == 0

    def test_empty_set_scores_zero(self):
        assert arithmetic_pp([]).value == 0.0

    @pytest.mark.parametrize("value", [0.0, -0.1, 1.2])
    def test_out_of_range(self, value):
        with pytest.raises(DomainError):
            arithmetic_pp(samples_of([0.5, value]))

    def test_inconsistent_sample(self):
        with pytest.raises(DomainError):
            EfficiencySample("p1")
        with pytest.raises(DomainError):
            EfficiencySample("p1", 0.5, supported=False)


class TestHarmonic:
    def test_modes_agree_when_all_supported(self):
        samples = samples_of([0.2, 0.4, 0.8])
        strict = harmonic_pp(samples, HarmonicMode.STRICT)
        supported = harmonic_pp(samples, "supported")
        assert strict.value == pytest.approx(supported.value)
        assert strict.metric is PortabilityMetric.HARMONIC_STRICT
        assert supported.metric is PortabilityMetric.HARMONIC_SUPPORTED

    def test_single_platform(self):
        assert harmonic_pp(samples_of([0.8])).value == pytest.approx(0.8)

    def test_empty_support(self):
        samples = [EfficiencySample.unsupported("a")]
        assert harmonic_pp(samples, HarmonicMode.SUPPORTED).value == 0.0
        assert harmonic_pp(samples, HarmonicMode.STRICT).value == 0.0


class TestDispersion:
    def test_single_sample(self):
        pair = dispersion(samples_of([0.7]))
        assert (pair.sd_am, pair.sd_hm) == (0.0, 0.0)

    def test_empty(self):
        with pytest.raises(DomainError):
            dispersion([])

    def test_identical_values(self):
        pair = dispersion(samples_of([0.5, 0.5, 0.5]))
        assert pair.sd_am == pytest.approx(0.0)
        assert pair.sd_hm == pytest.approx(0.0)


class TestDivergence:
    @pytest.mark.parametrize("efficiency, distance", [(1.0, 0.0), (0.75, 0.25)])
    def test_performance_distance(self, efficiency, distance):
        assert performance_distance(efficiency) == pytest.approx(distance)

    @pytest.mark.parametrize("efficiency", [0.0, 1.5])
    def test_performance_distance_out_of_range(self, efficiency):
        with pytest.raises(DomainError):
            performance_distance(efficiency)

    def test_rms(self):
        assert rms_divergence([0.1, 0.2]) == pytest.approx(math.sqrt(0.025))
        assert rms_divergence([0.0]) == 0.0
        with pytest.raises(DomainError):
            rms_divergence([])

    def test_pd_metric(self):
        assert pd_metric([0.1, 0.3]) == pytest.approx(0.2)
        with pytest.raises(DomainError):
            pd_metric([])
        with pytest.raises(DomainError):
            pd_metric([-0.1])

    @pytest.mark.parametrize(
        "speedups, expected",
        [([2.0, 2.0], 2.0), ([1.0, 3.0], 1.5), ([4.0], 4.0), ([1.5, 3.0], 2.0)],
    )
    def test_pp_md(self, speedups, expected):
        assert pp_md(speedups) == pytest.approx(expected)

    @pytest.mark.parametrize("speedups", [[], [0.0], [2.0, -1.0]])
    def test_pp_md_invalid(self, speedups):
        with pytest.raises(DomainError):
            pp_md(speedups)


class TestRoofline:
    SPEC = RooflineSpec(peak_flops=7000.0, peak_bandwidth=900.0)

    @pytest.mark.parametrize(
        "ai, attainable, bound",
        [
            (0.5, 450.0, Bound.MEMORY_BOUND),
            (7000.0 / 900.0, 7000.0, Bound.COMPUTE_BOUND),
            (100.0, 7000.0, Bound.COMPUTE_BOUND),
            (math.inf, 7000.0, Bound.COMPUTE_BOUND),
        ],
    )
    def test_attainable_and_bound(self, ai, attainable, bound):
        assert roofline_attainable(ai, self.SPEC) == pytest.approx(attainable)
        assert classify_bound(ai, self.SPEC) is bound

    @pytest.mark.parametrize("ai", [0.0, -1.0, math.nan])
    def test_invalid_intensity(self, ai):
        with pytest.raises(DomainError):
            roofline_attainable(ai, self.SPEC)

    @pytest.mark.parametrize(
        "flops, bandwidth", [(0.0, 1.0), (1.0, -1.0), (math.inf, 1.0)]
    )
    def test_invalid_spec(self, flops, bandwidth):
        with pytest.raises(DomainError):
            RooflineSpec(flops, bandwidth)

    def test_machine_balance(self):
        assert RooflineSpec(100.0, 50.0).machine_balance == 2.0


@given(st.lists(efficiencies, min_size=1, max_size=20))
@settings(max_examples=1000)
def test_harmonic_not_above_arithmetic(values):
    samples = samples_of(values)
    harmonic = harmonic_pp(samples).value
    arithmetic = arithmetic_pp(samples).value
    assert harmonic <= arithmetic + 1e-12
    if max(values) - min(values) > 1e-3:
        assert harmonic < arithmetic
    if all(value == values[0] for value in values):
        assert math.isclose(harmonic, arithmetic, rel_tol=1e-12)


@given(
    st.lists(efficiencies, min_size=1, max_size=12).flatmap(
        lambda values: st.tuples(st.just(values), st.permutations(values))
    )
)
@settings(max_examples=1000)
def test_metrics_permutation_invariant(pair):
    values, permuted = pair
    original = samples_of(values)
    shuffled = samples_of(permuted)
    assert math.isclose(
        arithmetic_pp(original).value, arithmetic_pp(shuffled).value, rel_tol=1e-12
    )
    assert math.isclose(
        harmonic_pp(original).value, harmonic_pp(shuffled).value, rel_tol=1e-12
    )
    first, second = dispersion(original), dispersion(shuffled)
    assert math.isclose(first.sd_am, second.sd_am, rel_tol=1e-9, abs_tol=1e-9)
    assert math.isclose(first.sd_hm, second.sd_hm, rel_tol=1e-9, abs_tol=1e-9)


@given(st.lists(st.one_of(efficiencies, st.none()), min_size=1, max_size=12))
@settings(max_examples=1000)
def test_strict_zero_rule(values):
    samples = [
        EfficiencySample.unsupported(f"p{i}")
        if value is None
        else EfficiencySample(f"p{i}", value)
        for i, value in enumerate(values)
    ]
    strict = harmonic_pp(samples, HarmonicMode.STRICT).value
    if any(value is None for value in values):
        assert strict == 0.0
    else:
        assert strict > 0.0


@given(
    st.floats(min_value=1e-3, max_value=1e6),
    st.floats(min_value=1e-3, max_value=1e6),
    st.floats(min_value=1e-3, max_value=1e4),
    st.floats(min_value=1e-3, max_value=1e4),
)
@settings(max_examples=1000)
def test_roofline_piecewise_and_monotone(flops, bandwidth, ai, other_ai):
    spec = RooflineSpec(flops, bandwidth)
    attainable = roofline_attainable(ai, spec)
    assert math.isclose(attainable, min(flops, ai * bandwidth), rel_tol=1e-9)
    low, high = sorted((ai, other_ai))
    assert roofline_attainable(low, spec) <= roofline_attainable(high, spec)


@given(st.lists(efficiencies, min_size=1, max_size=12))
@settings(max_examples=1000)
def test_adding_platform_at_the_mean_keeps_portability(values):
    mean = arithmetic_pp(samples_of(values)).value
    extended = arithmetic_pp(samples_of([*values, mean])).value
    assert math.isclose(extended, mean, rel_tol=1e-9)


@given(
    st.lists(efficiencies, min_size=2, max_size=12),
    st.floats(min_value=0.01, max_value=1.0),
)
@settings(max_examples=1000)
def test_dispersion_scales_with_efficiencies(values, factor):
    original = dispersion(samples_of(values))
    scaled = dispersion(samples_of([value * factor for value in values]))
    assert math.isclose(
        scaled.sd_am, factor * original.sd_am, rel_tol=1e-6, abs_tol=1e-9
    )
    assert math.isclose(
        scaled.sd_hm, factor * original.sd_hm, rel_tol=1e-6, abs_tol=1e-9
    )


@given(st.lists(st.floats(min_value=1e-3, max_value=1e3), min_size=1, max_size=12))
@settings(max_examples=1000)
def test_pp_md_between_extreme_speedups(speedups):
    value = pp_md(speedups)
    assert min(speedups) * (1 - 1e-12) <= value <= max(speedups) * (1 + 1e-12)


distances = st.one_of(st.just(0.0), st.floats(min_value=1e-6, max_value=1.0))


@given(st.lists(distances, min_size=1, max_size=12))
@settings(max_examples=1000)
def test_divergence_zero_only_without_distance(values):
    all_zero = all(value == 0.0 for value in values)
    assert (rms_divergence(values) == 0.0) == all_zero
    assert (pd_metric(values) == 0.0) == all_zero

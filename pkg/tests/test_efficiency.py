import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from perfport.portability.efficiency import (
    APP_TYPE_0,
    APP_TYPE_1,
    APP_TYPE_2,
    ARCH_TYPE_0,
    ARCH_TYPE_1,
    EfficiencyApproach,
    EfficiencyType,
    app_efficiency,
    arch_efficiency,
    efficiency_for_record,
    resolve_baseline,
    spec_efficiency,
)
from perfport.portability.exceptions import (
    BaselineNotFoundError,
    ConfigurationError,
    DomainError,
    UsageError,
)
from perfport.portability.metrics import RooflineSpec
from perfport.portability.repository import (
    ArchClass,
    Level,
    Platform,
    ReferenceSpace,
    Repository,
)

CPU = Platform("p1", "Test CPU", ArchClass.CPU, 8, 1, 8, peak_theoretical=1000.0)
GPU = Platform(
    "p2", "Test GPU", ArchClass.GPU, 80, 1, 80, 7000.0, RooflineSpec(7000.0, 900.0)
)

runtimes = st.floats(min_value=1e-3, max_value=1e6)


class TestEfficiencyType:
    @pytest.mark.parametrize(
        "text, expected",
        [
            ("app-0", APP_TYPE_0),
            ("APP-2", APP_TYPE_2),
            (" arch-1 ", ARCH_TYPE_1),
        ],
    )
    def test_parse(self, text, expected):
        assert EfficiencyType.parse(text) == expected

    @pytest.mark.parametrize("text", ["arch-2", "app-3", "app", "spec-0"])
    def test_parse_invalid(self, text):
        with pytest.raises(UsageError):
            EfficiencyType.parse(text)

    def test_str(self):
        assert str(APP_TYPE_1) == "app-1"
        assert str(ARCH_TYPE_0) == "arch-0"

    def test_invalid_type_number(self):
        with pytest.raises(DomainError):
            EfficiencyType(EfficiencyApproach.ARCHITECTURAL, 2)

    @pytest.mark.parametrize(
        "etype, space",
        [
            (APP_TYPE_0, ReferenceSpace.SAME_IMPL_PEAK),
            (APP_TYPE_1, ReferenceSpace.PORTABLE_ANY),
            (APP_TYPE_2, ReferenceSpace.ANY_IMPL),
        ],
    )
    def test_reference_space(self, etype, space):
        assert etype.reference_space is space

    def test_architectural_has_no_reference_space(self):
        with pytest.raises(UsageError):
            ARCH_TYPE_0.reference_space


class TestSpecEfficiency:
    @pytest.mark.parametrize(
        "base, peak, expected",
        [(975, 803, 803 / 975), (59.5, 38.6, 38.6 / 59.5), (49.8, 49.8, 1.0)],
    )
    def test_ratio(self, base, peak, expected):
        score = spec_efficiency(base, peak)
        assert score.value == pytest.approx(expected)
        assert not score.clamped
        assert score.etype == APP_TYPE_0

    def test_slower_peak_is_clamped(self):
        score = spec_efficiency(1133, 1136)
        assert score.value == 1.0
        assert score.clamped

    @pytest.mark.parametrize("base, peak", [(0, 1), (1, 0), (-1, 1)])
    def test_non_positive(self, base, peak):
        with pytest.raises(DomainError):
            spec_efficiency(base, peak)


class TestAppEfficiency:
    def test_baseline_ratio(self):
        score = app_efficiency(100.0, 80.0, 1, baseline_record="r000002")
        assert score.value == pytest.approx(0.8)
        assert score.baseline_record == "r000002"
        assert score.baseline_performance == 80.0

    def test_self_relative(self):
        assert app_efficiency(100.0, 100.0, 2).value == 1.0

    @pytest.mark.parametrize("type_no", [0, 3])
    def test_invalid_type(self, type_no):
        with pytest.raises(DomainError):
            app_efficiency(100.0, 80.0, type_no)


class TestArchEfficiency:
    def test_theoretical_peak(self):
        score = arch_efficiency(700.0, GPU, 0)
        assert score.value == pytest.approx(0.1)
        assert score.baseline_performance == 7000.0

    def test_roofline(self):
        score = arch_efficiency(360.0, GPU, 1, ai=0.5)
        assert score.value == pytest.approx(0.8)
        assert score.baseline_performance == pytest.approx(450.0)

    def test_roofline_clamped(self):
        score = arch_efficiency(500.0, GPU, 1, ai=0.5)
        assert score.value == 1.0
        assert score.clamped

    def test_missing_peak(self):
        with pytest.raises(ConfigurationError):
            arch_efficiency(1.0, Platform("x", "bare"), 0)

    def test_missing_roofline(self):
        with pytest.raises(ConfigurationError):
            arch_efficiency(1.0, CPU, 1, ai=1.0)

    def test_missing_intensity(self):
        with pytest.raises(ConfigurationError):
            arch_efficiency(1.0, GPU, 1)


class TestBaselineAutoUpdate:
    def test_type_1_and_type_2_follow_new_records(self, repo, make_record):
        first = repo.ingest(make_record(100, model="omp"))
        subject = repo.snapshot().record(first.record_id)
        assert efficiency_for_record(repo, subject, APP_TYPE_1).value == 1.0

        repo.ingest(make_record(80, model="sycl"))
        assert efficiency_for_record(repo, subject, APP_TYPE_1).value == 0.8

        repo.ingest(make_record(70, model="cuda", portable=False))
        assert efficiency_for_record(repo, subject, APP_TYPE_2).value == 0.7
        assert efficiency_for_record(repo, subject, APP_TYPE_1).value == 0.8

    def test_type_0_pairs_same_model_peak(self, repo, make_record):
        base = repo.ingest(make_record(100, model="omp"))
        repo.ingest(make_record(50, model="sycl", level=Level.PEAK, flags="-O3"))
        repo.ingest(make_record(80, model="omp", level=Level.PEAK, flags="-O3"))
        record = repo.snapshot().record(base.record_id)
        score = efficiency_for_record(repo, record, APP_TYPE_0)
        assert score.value == pytest.approx(0.8)
        assert score.baseline_record == "r000003"

    def test_type_0_needs_peak_record(self, repo, make_record):
        base = repo.snapshot().record(repo.ingest(make_record(100)).record_id)
        with pytest.raises(BaselineNotFoundError):
            efficiency_for_record(repo, base, APP_TYPE_0)

    def test_type_0_of_peak_record(self, repo, make_record):
        summary = repo.ingest(make_record(100, level=Level.PEAK))
        peak = repo.snapshot().record(summary.record_id)
        with pytest.raises(UsageError):
            efficiency_for_record(repo, peak, APP_TYPE_0)

    def test_architectural_needs_throughput(self, repo, make_record):
        summary = repo.ingest(make_record(100, platform="p2"))
        with pytest.raises(ConfigurationError):
            efficiency_for_record(
                repo, repo.snapshot().record(summary.record_id), ARCH_TYPE_0
            )

    def test_architectural_from_record(self, repo, make_record):
        summary = repo.ingest(
            make_record(
                100, platform="p2", achieved_throughput=360.0, arithmetic_intensity=0.5
            )
        )
        record = repo.snapshot().record(summary.record_id)
        assert efficiency_for_record(repo, record, ARCH_TYPE_1).value == pytest.approx(
            0.8
        )


class TestResolveBaseline:
    def test_tie_goes_to_earlier_ingest(self, repo, make_record):
        repo.ingest(make_record(50, model="omp"))
        repo.ingest(make_record(50, model="sycl"))
        baseline = resolve_baseline(repo, "app", "p1", "ref", "portable_any")
        assert baseline.record_id == "r000001"

    def test_workload_must_match(self, repo, make_record):
        repo.ingest(make_record(50, workload="small"))
        with pytest.raises(BaselineNotFoundError) as error:
            resolve_baseline(repo, "app", "p1", "ref", ReferenceSpace.ANY_IMPL)
        assert error.value.key == ("app", "p1", "ref", "any_impl")

    def test_agrees_with_index(self, repo, make_record):
        repo.ingest(make_record([90, 110, 100], model="omp"))
        repo.ingest(make_record([95, 96], model="sycl"))
        repo.ingest(make_record(70, model="cuda", portable=False))
        repo.ingest(make_record(85, model="omp", level=Level.PEAK, flags="-O3"))
        snapshot = repo.snapshot()
        for space in ReferenceSpace:
            resolved = resolve_baseline(
                snapshot, "app", "p1", "ref", space, model="omp"
            )
            indexed = snapshot.best_known("app", "p1", "ref", space, "omp")
            assert resolved.record_id == indexed.best_record

    def test_same_impl_peak_agrees_with_index_per_model(self, repo, make_record):
        repo.ingest(make_record(50, model="sycl", level=Level.PEAK, flags="-O3"))
        repo.ingest(make_record(90, model="omp", level=Level.PEAK, flags="-O3"))
        snapshot = repo.snapshot()
        for model, expected in (("omp", "r000002"), ("sycl", "r000001")):
            resolved = resolve_baseline(
                snapshot,
                "app",
                "p1",
                "ref",
                ReferenceSpace.SAME_IMPL_PEAK,
                model=model,
            )
            indexed = snapshot.best_known(
                "app", "p1", "ref", ReferenceSpace.SAME_IMPL_PEAK, model
            )
            assert resolved.record_id == indexed.best_record == expected

    def test_same_impl_peak_needs_model(self, repo, make_record):
        repo.ingest(make_record(50, level=Level.PEAK, flags="-O3"))
        with pytest.raises(UsageError):
            resolve_baseline(repo, "app", "p1", "ref", ReferenceSpace.SAME_IMPL_PEAK)
        with pytest.raises(UsageError):
            repo.best_known("app", "p1", "ref", ReferenceSpace.SAME_IMPL_PEAK)


@given(runtimes, runtimes)
@settings(max_examples=1000)
def test_clamp_flag_iff_ratio_above_one(achieved, baseline):
    score = app_efficiency(achieved, baseline, 2)
    assert score.clamped == (baseline / achieved > 1)
    assert 0 < score.value <= 1


@given(runtimes, st.floats(min_value=1e-3, max_value=1e4))
@settings(max_examples=1000)
def test_roofline_efficiency_not_below_peak_efficiency(throughput, ai):
    peak = arch_efficiency(throughput, GPU, 0)
    roofline = arch_efficiency(throughput, GPU, 1, ai=ai)
    assert roofline.value >= peak.value


@given(
    runtimes,
    runtimes,
    st.lists(runtimes, max_size=4),
    st.lists(runtimes, max_size=4),
)
@settings(max_examples=1000)
def test_wider_reference_space_lowers_efficiency(
    make_record, base, peak, portable, non_portable
):
    repo = Repository()
    repo.add_platform(CPU)
    subject = repo.ingest(make_record(base, model="omp"))
    repo.ingest(make_record(peak, model="omp", level=Level.PEAK, flags="-O3"))
    for i, seconds in enumerate(portable):
        repo.ingest(make_record(seconds, model=f"portable{i}"))
    for i, seconds in enumerate(non_portable):
        repo.ingest(make_record(seconds, model=f"native{i}", portable=False))
    record = repo.snapshot().record(subject.record_id)
    type_0, type_1, type_2 = (
        efficiency_for_record(repo, record, etype).value
        for etype in (APP_TYPE_0, APP_TYPE_1, APP_TYPE_2)
    )
    assert type_2 <= type_1 <= type_0

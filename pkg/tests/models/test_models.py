import numpy as np
import pytest
from pydantic import ValidationError

from src.config.settings import AnalysisSettings, LoggingSettings
from src.models.assignment import IGNORE, NEGATIVE, AssignerSpec, AssignmentResult, DiffReport, LabelKind
from src.models.box import Box, PixelBox
from src.models.ground_truth import ProximityMeasure, Scene
from src.models.histogram import Histogram, Histogram2D, uniform_edges
from src.models.raster import BinaryMask
from src.models.reports import AssignerSummary, BenchCase, BenchResult, ComparisonReport, MobStats
from tests.util.scenes import make_gt


# Test boxes
def test_box_validation():
    with pytest.raises(ValidationError):
        Box(5, 0, 5, 10)
    with pytest.raises(ValidationError):
        Box(0, 0, float("inf"), 1)
    assert Box.from_xywh(10, 20, 30, 40) == Box(10, 20, 40, 60)


def test_box_helpers():
    box = Box(1, 2, 5, 10)
    assert (box.width, box.height) == (4, 8)
    assert box.center == (3, 6)
    assert box.translate(1, 1) == Box(2, 3, 6, 11)
    assert box.scale(2) == Box(2, 4, 10, 20)


def test_pixel_box_area_and_slices():
    pb = PixelBox(x1=1, y1=2, x2=4, y2=6, m=8, n=8)
    assert pb.area == 12
    assert np.ones((8, 8))[pb.slices()].sum() == 12


# Test masks
def test_binary_mask_rejects_bad_values():
    with pytest.raises(ValueError):
        BinaryMask(np.array([[0, 2]]))
    with pytest.raises(ValueError):
        BinaryMask(np.zeros((0, 3), dtype=bool))


def test_binary_mask_is_read_only_copy():
    data = np.zeros((2, 2), dtype=bool)
    mask = BinaryMask(data)
    data[0, 0] = True
    assert mask.count() == 0
    with pytest.raises(ValueError):
        mask.data[0, 0] = True


def test_binary_mask_union_and_equality():
    a = BinaryMask(np.array([[1, 0], [0, 0]]))
    b = BinaryMask(np.array([[0, 0], [0, 1]]))
    assert a.union(b).count() == 2
    assert a == BinaryMask(np.array([[True, False], [False, False]]))
    with pytest.raises(ValueError):
        a.union(BinaryMask.zeros(3, 3))


# Test scenes
def test_scene_rejects_mask_of_other_size():
    gt = make_gt((0, 0, 4, 4), np.ones((8, 8), dtype=bool))
    with pytest.raises(ValueError):
        Scene(image_id=1, width=10, height=8, gts=(gt,))


def test_scene_rejects_box_outside_image():
    gt = make_gt((4, 4, 12, 8), np.ones((8, 16), dtype=bool))
    with pytest.raises(ValueError):
        Scene(image_id=1, width=10, height=8, gts=(gt,))


def test_ground_truth_needs_pixels():
    with pytest.raises(ValueError):
        make_gt((20, 20, 30, 30), np.ones((8, 8), dtype=bool))


def test_proximity_measure_parse():
    assert ProximityMeasure.parse(" MaIoU ") is ProximityMeasure.MAIOU
    with pytest.raises(ValueError) as exc:
        ProximityMeasure.parse("ciou")
    assert "iou, giou, diou, maiou" in str(exc.value)


# Test assignment results
def test_assignment_result_validation():
    with pytest.raises(ValidationError):
        AssignmentResult.from_labels([0, 2], 2)
    with pytest.raises(ValidationError):
        AssignmentResult.from_labels([-3], 1)


def test_assignment_result_counts():
    result = AssignmentResult.from_labels([1, 1, NEGATIVE, IGNORE, 0], 3)
    assert result.positives_per_gt == (1, 2, 0)
    assert result.count(LabelKind.POSITIVE) == 3
    assert result.summary()["ignore"] == 1
    assert LabelKind.of(IGNORE) is LabelKind.IGNORE


def test_diff_report_merge_offsets_indices():
    a = DiffReport(counts={"negative->positive": 1}, indices={"negative->positive": [2]}, reassigned=[0])
    b = DiffReport(counts={"negative->positive": 2}, indices={"negative->positive": [0, 1]})
    merged = a.merge(b, offset=10)
    assert merged.counts == {"negative->positive": 3}
    assert merged.indices["negative->positive"] == [2, 10, 11]
    assert merged.reassigned == [0]
    assert merged.changed == 3


# Test histograms
def test_uniform_edges():
    assert uniform_edges(4) == (0.0, 0.25, 0.5, 0.75, 1.0)
    with pytest.raises(ValueError):
        uniform_edges(0)


def test_histogram_binning_includes_top_edge():
    hist = Histogram.from_values([0.0, 0.5, 1.0], bins=2)
    assert hist.counts == (1, 2)
    assert hist.total == 3
    assert hist.merge(hist).counts == (2, 4)


def test_histogram_validation():
    with pytest.raises(ValidationError):
        Histogram(edges=(0.0, 1.0), counts=(1, 2))
    with pytest.raises(ValidationError):
        Histogram(edges=(1.0, 0.0), counts=(1,))
    with pytest.raises(ValueError):
        Histogram.empty(2).merge(Histogram.empty(3))


def test_histogram2d():
    hist = Histogram2D.from_pairs([0.5, 0.1], [1.0, 0.1], bins=2)
    assert hist.counts == ((1, 0), (0, 1))
    assert hist.diagonal_total == 2
    assert hist.merge(Histogram2D.empty(2)).total == 2


# Test report models
def test_mob_stats_merge():
    a = MobStats(histogram=Histogram.from_values([0.2], 2), gts=1, below_half=1)
    b = MobStats(histogram=Histogram.from_values([0.9], 2), gts=1, below_half=0)
    merged = a.merge(b)
    assert merged.fraction_below_half == 0.5
    assert merged.to_dict()["counts"] == [1, 1]


def test_comparison_names_are_unique():
    spec = AssignerSpec()
    report = ComparisonReport(assigners=[
        AssignerSummary(name=spec.name, spec=spec),
        AssignerSummary(name=spec.name, spec=spec),
    ])
    assert report.names == ["atss-maiou-k9", "atss-maiou-k9#2"]


def test_bench_result_speedup():
    result = BenchResult(case=BenchCase(grid=8, anchors=1, gts=1), pairs=1, brute_seconds=2.0,
                         fast_seconds=0.5, repetitions=5, identical=True)
    assert result.speedup == 4.0
    assert "speedup" not in result.to_dict(include_times=False)
    with pytest.raises(ValidationError):
        BenchCase(grid=8, anchors=1, gts=0)


# Test environment settings
def test_log_level_from_environment(monkeypatch):
    monkeypatch.setenv("MAIOU_LOG", "debug")
    assert LoggingSettings().LEVEL == "DEBUG"


def test_invalid_log_level(monkeypatch):
    monkeypatch.setenv("MAIOU_LOG", "chatty")
    with pytest.raises(ValidationError):
        LoggingSettings()


def test_analysis_settings_from_environment(monkeypatch):
    monkeypatch.setenv("MAIOU_SPEEDUP_FLOOR", "5")
    monkeypatch.setenv("MAIOU_MIN_REPETITIONS", "3")
    analysis = AnalysisSettings()
    assert analysis.SPEEDUP_FLOOR == 5.0
    assert analysis.MIN_REPETITIONS == 3

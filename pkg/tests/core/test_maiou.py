import logging
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.core import geometry
from src.core.maiou import (
    brute_pixel_counts,
    exact_ratio,
    mask_aware_intersection,
    mask_aware_union,
    mask_fallback,
    maiou_brute,
    maiou_brute_matrix,
    maiou_fast,
    mob,
    pairwise,
    pixel_counts,
    pixel_iou,
    pixel_weights,
    ratio_columns,
)
from src.models.box import Box
from src.models.ground_truth import ProximityMeasure
from tests.util.scenes import HALF_ANCHORS, make_gt, random_anchor, random_gt, upscale

GRID_SIZES = [8, 12, 16, 24, 32, 48, 64, 96, 128, 256]


# Test MOB
def test_mob_examples(half_mask_scene):
    gt = half_mask_scene.gts[0]
    assert mob(gt.box, gt) == 0.5
    assert mob(Box(20, 20, 30, 30), gt) == 0.0

    full = make_gt((2, 2, 6, 6), np.ones((8, 8), dtype=bool))
    assert mob(full.box, full) == 1.0
    assert full.mob == 1.0


# Test maIoU on the half-mask scene
def test_half_mask_scene(half_mask_scene):
    """The anchor on the mask scores 1, the one beside it 0, while IoU is 0.5 for both"""
    gt = half_mask_scene.gts[0]
    left, right = (Box(*a) for a in HALF_ANCHORS)
    assert maiou_fast(left, gt) == 1.0
    assert maiou_fast(right, gt) == 0.0
    assert maiou_brute(left, gt) == 1.0
    assert maiou_brute(right, gt) == 0.0
    assert geometry.iou(left, gt.box) == 0.5
    assert geometry.iou(right, gt.box) == 0.5


def test_anchor_equal_to_gt_box_scores_one(half_mask_scene):
    gt = half_mask_scene.gts[0]
    assert maiou_fast(gt.box, gt) == 1.0
    assert maiou_brute(gt.box, gt) == 1.0


def test_anchor_off_image_scores_zero(half_mask_scene):
    gt = half_mask_scene.gts[0]
    assert maiou_fast(Box(-20, -20, -5, -5), gt) == 0.0
    assert maiou_brute(Box(-20, -20, -5, -5), gt) == 0.0


# Test the empty-mask fallback
def test_empty_mask_falls_back_to_pixel_iou(caplog):
    with caplog.at_level(logging.WARNING):
        gt = make_gt((0, 0, 10, 10), np.zeros((10, 10), dtype=bool), annotation_id=42)
    assert gt.empty_mask
    assert "42" in caplog.text
    anchor = Box(5, 0, 15, 10)
    assert maiou_fast(anchor, gt) == pixel_iou(anchor, gt) == 0.5
    assert maiou_brute(anchor, gt) == 0.5


def test_mask_clipped_to_box():
    """Mask pixels outside the box cover are dropped when the gt is built"""
    mask = np.ones((10, 10), dtype=bool)
    gt = make_gt((2, 2, 5, 5), mask)
    assert gt.mask_count == 9
    assert gt.mob == 1.0


# Test pairwise matrices
def test_pairwise_examples(half_mask_scene):
    gt = half_mask_scene.gts[0]
    assert pairwise(np.array([gt.box.as_tuple()]), [gt], ProximityMeasure.IOU).tolist() == [[1.0]]
    disjoint = np.array([[20, 20, 25, 25], [-9, -9, -1, -1]], dtype=float)
    assert pairwise(disjoint, [gt], ProximityMeasure.MAIOU).tolist() == [[0.0], [0.0]]
    assert pairwise(np.array(HALF_ANCHORS), [gt], "maiou").tolist() == [[1.0], [0.0]]


def test_pairwise_empty_inputs(half_mask_scene):
    assert pairwise(np.zeros((0, 4)), half_mask_scene.gts).shape == (0, 1)
    assert pairwise(np.array(HALF_ANCHORS), []).shape == (2, 0)


def test_pairwise_measures_match_geometry(half_mask_scene):
    gt = half_mask_scene.gts[0]
    anchors = np.array([[1, 1, 7, 9], [4, -2, 12, 6]], dtype=float)
    for measure, fn in [("iou", geometry.iou), ("giou", geometry.giou), ("diou", geometry.diou)]:
        out = pairwise(anchors, [gt], measure)
        for i, row in enumerate(anchors):
            assert out[i, 0] == pytest.approx(fn(Box(*(float(v) for v in row)), gt.box))


def test_pairwise_independent_of_workers():
    rng = np.random.default_rng(3)
    gts = [random_gt(rng, 40, 50) for _ in range(4)]
    anchors = np.array([random_anchor(rng, 40, 50).as_tuple() for _ in range(97)])
    single = pairwise(anchors, gts, ProximityMeasure.MAIOU, workers=1)
    assert np.array_equal(single, pairwise(anchors, gts, ProximityMeasure.MAIOU, workers=4))
    assert np.array_equal(single, maiou_brute_matrix(anchors, gts))


# Test oracle equivalence
def test_fast_matches_brute_fuzz():
    """10 000 seeded (anchor, gt box, mask) triples, anchors partly or fully outside the image"""
    rng = np.random.default_rng(20240601)
    checked = 0
    for _ in range(2500):
        size = GRID_SIZES[int(rng.integers(len(GRID_SIZES)))]
        m, n = int(rng.integers(8, size + 1)), int(rng.integers(8, size + 1))
        gt = random_gt(rng, m, n)
        for _ in range(4):
            anchor = random_anchor(rng, m, n)
            fast = maiou_fast(anchor, gt)
            assert fast == maiou_brute(anchor, gt), (anchor, gt.box)
            assert 0.0 <= fast <= 1.0
            checked += 1
    assert checked >= 10_000


@settings(max_examples=100, deadline=None)
@given(st.integers(8, 64), st.integers(8, 64), st.integers(0, 2**31 - 1))
def test_pixel_counts_match_brute(m, n, seed):
    rng = np.random.default_rng(seed)
    gt = random_gt(rng, m, n)
    anchor = random_anchor(rng, m, n)
    assert pixel_counts(anchor, gt) == brute_pixel_counts(anchor, gt)


# Test identities
@settings(max_examples=100, deadline=None)
@given(st.integers(8, 48), st.integers(8, 48), st.integers(0, 2**31 - 1))
def test_gt_box_scores_one(m, n, seed):
    gt = random_gt(np.random.default_rng(seed), m, n)
    if not gt.empty_mask:
        assert maiou_fast(gt.box, gt) == 1.0


@settings(max_examples=100, deadline=None)
@given(st.integers(8, 48), st.integers(8, 48), st.integers(0, 2**31 - 1))
def test_full_mask_equals_pixel_iou(m, n, seed):
    """With MOB = 1 the reweighting is the identity"""
    rng = np.random.default_rng(seed)
    gt = make_gt(random_gt(rng, m, n).box.as_tuple(), np.ones((m, n), dtype=bool))
    assert gt.mob == 1.0
    anchor = random_anchor(rng, m, n)
    assert maiou_fast(anchor, gt) == pixel_iou(anchor, gt)


@pytest.mark.parametrize("factor", [2, 3])
def test_integer_upscale_invariance(factor):
    rng = np.random.default_rng(factor)
    for _ in range(200):
        m, n = int(rng.integers(8, 33)), int(rng.integers(8, 33))
        x1, y1 = int(rng.integers(0, n - 1)), int(rng.integers(0, m - 1))
        x2, y2 = int(rng.integers(x1 + 1, n + 1)), int(rng.integers(y1 + 1, m + 1))
        mask = rng.random((m, n)) < 0.4
        gt = make_gt((x1, y1, x2, y2), mask)
        big = make_gt((x1 * factor, y1 * factor, x2 * factor, y2 * factor), upscale(mask, factor))
        anchor = random_anchor(rng, m, n, integer=True)
        assert maiou_fast(anchor.scale(factor), big) == maiou_fast(anchor, gt)


# Test the mask-aware intersection, union and weights
def test_mask_aware_parts(half_mask_scene):
    gt = half_mask_scene.gts[0]
    left = Box(*HALF_ANCHORS[0])
    assert mask_aware_intersection(left, gt) == 100.0
    assert mask_aware_union(left, gt) == 100.0
    assert mask_aware_intersection(left, gt) / mask_aware_union(left, gt) == maiou_fast(left, gt)


def test_pixel_weights_preserve_box_energy(half_mask_scene):
    gt = half_mask_scene.gts[0]
    weights = pixel_weights(gt)
    assert weights[:, :5].tolist() == [[2.0] * 5] * 10
    assert not weights[:, 5:].any()
    assert weights.sum() == pytest.approx(gt.box_pixels)

    empty = make_gt((1, 1, 4, 4), np.zeros((6, 6), dtype=bool))
    assert pixel_weights(empty).sum() == empty.box_pixels


def test_maiou_grows_with_mask_overlap_at_fixed_union(half_mask_scene):
    """Sliding a half-width anchor inside B keeps the union at |B| while it picks up mask pixels"""
    gt = half_mask_scene.gts[0]
    values = []
    for x in range(5, -1, -1):
        anchor = Box(x, 0, x + 5, 10)
        assert mask_aware_union(anchor, gt) == 100
        values.append(maiou_fast(anchor, gt))
    assert values == pytest.approx([0.0, 0.2, 0.4, 0.6, 0.8, 1.0])
    assert all(a < b for a, b in zip(values, values[1:]))


def test_empty_mask_gts_are_listed(half_mask_scene):
    empty = make_gt((2, 2, 8, 8), np.zeros((10, 10), dtype=bool))
    gts = [half_mask_scene.gts[0], empty]
    assert mask_fallback(gts, ProximityMeasure.MAIOU) == (1,)
    assert mask_fallback(gts, "iou") == ()
    assert mask_fallback(half_mask_scene.gts, ProximityMeasure.MAIOU) == ()


# Test exactness of the final division
def test_exact_ratio_rounds_once_for_huge_counts():
    side = 65535 ** 2
    num, den = side * (side - 1), (side - 7) * side
    assert num > 2 ** 63
    assert exact_ratio(num, den) == float(Fraction(num, den))
    assert exact_ratio(np.int64(3), np.int64(12)) == 0.25


def test_ratio_columns_past_int64_range():
    """|B| * |anchor ∩ M| passes 2**63 on a 65535 x 65535 grid"""
    side = 65535 ** 2
    on_mask = np.array([side - 1, side // 2, 0], dtype=np.int64)
    union = np.array([side, side, side - 3], dtype=np.int64)
    out = ratio_columns(side, on_mask, side - 7, union, side)
    expected = [float(Fraction(side * int(a), (side - 7) * int(u))) for a, u in zip(on_mask, union)]
    assert out.tolist() == expected


def test_ratio_columns_small_counts_match_float_division():
    on_mask = np.array([0, 3, 7], dtype=np.int64)
    union = np.array([10, 10, 12], dtype=np.int64)
    np.testing.assert_array_equal(ratio_columns(4, on_mask, 2, union, 12), (4 * on_mask) / (2 * union))

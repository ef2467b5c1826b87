"""
Mask-aware IoU between an anchor box and a ground truth (box + mask).

    maIoU = (|B| / |M|) * |anchor ∩ M| / |anchor ∪ B|

On-mask pixels of B weigh 1 / MOB(B, M), off-mask pixels weigh 0, which
keeps the total weight of B equal to |B|, so the mask-aware union is the
ordinary union. Everything is counted on the clipped pixel grid, kept as
integers, and divided once at the end. A ground truth with an empty mask
scores plain pixel IoU instead.
"""

import logging
from typing import NamedTuple, Sequence, Tuple, Union

import numpy as np

from src.core import geometry
from src.core.raster import discretize, discretize_many, intersect_pixel_boxes, mask_in_box, pixel_area
from src.models.anchors import AnchorSet
from src.models.box import Box
from src.models.ground_truth import GroundTruth, ProximityMeasure
from src.utils.parallel import chunk_ranges, ordered_map

logger = logging.getLogger(__name__)


class PixelCounts(NamedTuple):
    """Integer ingredients of maIoU for one (anchor, ground truth) pair"""
    anchor_on_mask: int   # |anchor ∩ M|
    overlap: int          # |anchor ∩ B|
    anchor: int           # |anchor|, clipped to the image
    box: int              # |B|
    mask: int             # |M|

    @property
    def union(self) -> int:
        return self.anchor + self.box - self.overlap


# Integers up to this bound convert to float64 without rounding
EXACT_FLOAT_LIMIT = 2 ** 53


def exact_ratio(num, den) -> float:
    """
    The single division every maIoU path ends with.

    Python int division rounds once, correctly, however large the counts.
    """
    return int(num) / int(den)


def ratio_columns(num_scale: int, num: np.ndarray, den_scale: int, den: np.ndarray, bound: int) -> np.ndarray:
    """
    Elementwise (num_scale * num) / (den_scale * den), each entry rounded once.

    bound caps every entry of num and den. Products that could pass 2**53
    are formed as Python ints, which also keeps them clear of int64 overflow.
    """
    if max(num_scale, den_scale) * bound < EXACT_FLOAT_LIMIT:
        return (num_scale * num).astype(np.float64) / (den_scale * den).astype(np.float64)
    return np.fromiter(
        (exact_ratio(num_scale * int(a), den_scale * int(b)) for a, b in zip(num, den)),
        dtype=np.float64, count=len(num),
    )


def mask_fallback(gts: Sequence[GroundTruth], measure: ProximityMeasure) -> Tuple[int, ...]:
    """Indices of the gts that maIoU scores with pixel IoU (empty mask)"""
    if ProximityMeasure.parse(measure) is not ProximityMeasure.MAIOU:
        return ()
    return tuple(g for g, gt in enumerate(gts) if gt.empty_mask)


def _ratio_from_counts(c: PixelCounts) -> float:
    if c.mask == 0:
        return exact_ratio(c.overlap, c.union)
    return exact_ratio(c.box * c.anchor_on_mask, c.mask * c.union)


##############################################################################
# Scalar forms
##############################################################################

def mob(b: Box, gt: GroundTruth) -> float:
    """Share of b's pixel cover that lies on the mask; 0 when b misses the image"""
    m, n = gt.shape
    pb = discretize(b, m, n)
    if pb is None:
        return 0.0
    return exact_ratio(mask_in_box(gt.integral, pb), pb.area)


def pixel_counts(anchor: Box, gt: GroundTruth) -> PixelCounts:
    """Counts through the integral image: four lookups plus box arithmetic"""
    m, n = gt.shape
    apb = discretize(anchor, m, n)
    on_mask = 0 if apb is None else mask_in_box(gt.integral, apb)
    overlap = pixel_area(intersect_pixel_boxes(apb, gt.pixel_box))
    return PixelCounts(
        anchor_on_mask=on_mask,
        overlap=overlap,
        anchor=pixel_area(apb),
        box=gt.box_pixels,
        mask=gt.mask_count,
    )


def maiou_fast(anchor: Box, gt: GroundTruth) -> float:
    return _ratio_from_counts(pixel_counts(anchor, gt))


def brute_pixel_counts(anchor: Box, gt: GroundTruth) -> PixelCounts:
    """
    Counts by visiting every pixel of the window spanned by the anchor and B.

    No integral image and no box arithmetic: each pixel is tested for
    membership in the anchor, in B and in the mask.
    """
    m, n = gt.shape
    apb = discretize(anchor, m, n)
    gpb = gt.pixel_box
    if apb is None:
        wx1, wy1, wx2, wy2 = gpb.x1, gpb.y1, gpb.x2, gpb.y2
    else:
        wx1, wy1 = min(apb.x1, gpb.x1), min(apb.y1, gpb.y1)
        wx2, wy2 = max(apb.x2, gpb.x2), max(apb.y2, gpb.y2)

    cols = np.arange(wx1, wx2)
    rows = np.arange(wy1, wy2)
    in_box = ((rows >= gpb.y1) & (rows < gpb.y2))[:, None] & ((cols >= gpb.x1) & (cols < gpb.x2))[None, :]
    if apb is None:
        in_anchor = np.zeros_like(in_box)
    else:
        in_anchor = ((rows >= apb.y1) & (rows < apb.y2))[:, None] & ((cols >= apb.x1) & (cols < apb.x2))[None, :]
    on_mask = gt.mask.data[wy1:wy2, wx1:wx2]

    return PixelCounts(
        anchor_on_mask=int(np.count_nonzero(in_anchor & on_mask)),
        overlap=int(np.count_nonzero(in_anchor & in_box)),
        anchor=int(np.count_nonzero(in_anchor)),
        box=int(np.count_nonzero(in_box)),
        mask=int(np.count_nonzero(in_box & on_mask)),
    )


def maiou_brute(anchor: Box, gt: GroundTruth) -> float:
    return _ratio_from_counts(brute_pixel_counts(anchor, gt))


def pixel_iou(anchor: Box, gt: GroundTruth) -> float:
    """IoU of the two pixel covers"""
    c = pixel_counts(anchor, gt)
    return exact_ratio(c.overlap, c.union)


def mask_aware_intersection(anchor: Box, gt: GroundTruth) -> float:
    """maI = |anchor ∩ M| / MOB(B, M)"""
    c = pixel_counts(anchor, gt)
    if c.mask == 0:
        return float(c.overlap)
    return exact_ratio(c.box * c.anchor_on_mask, c.mask)


def mask_aware_union(anchor: Box, gt: GroundTruth) -> float:
    """maU, equal to the pixel union because the reweighting preserves |B|"""
    return float(pixel_counts(anchor, gt).union)


def pixel_weights(gt: GroundTruth) -> np.ndarray:
    """
    Per-pixel maIoU weights over the image: |B|/|M| on mask pixels, 0 elsewhere.

    Summed over B they give |B|. An empty mask falls back to IoU weights
    (1 everywhere in B).
    """
    weights = np.zeros(gt.shape, dtype=np.float64)
    if gt.empty_mask:
        rows, cols = gt.pixel_box.slices()
        weights[rows, cols] = 1.0
        return weights
    weights[gt.mask.data] = gt.box_pixels / gt.mask_count
    return weights


##############################################################################
# Matrix forms
##############################################################################

def _as_boxes(anchors) -> np.ndarray:
    if isinstance(anchors, AnchorSet):
        return anchors.boxes
    return np.asarray(anchors, dtype=np.float64).reshape(-1, 4)


def _pixel_count_columns(boxes: np.ndarray, gt: GroundTruth):
    """Vectorized pixel_counts for every anchor against one ground truth"""
    m, n = gt.shape
    pb = discretize_many(boxes, m, n)
    x1, y1, x2, y2 = pb[:, 0], pb[:, 1], pb[:, 2], pb[:, 3]
    t = gt.integral.table
    on_mask = t[y2, x2] + t[y1, x1] - t[y2, x1] - t[y1, x2]
    anchor = (x2 - x1) * (y2 - y1)
    g = gt.pixel_box
    ow = np.clip(np.minimum(x2, g.x2) - np.maximum(x1, g.x1), 0, None)
    oh = np.clip(np.minimum(y2, g.y2) - np.maximum(y1, g.y1), 0, None)
    overlap = ow * oh
    union = anchor + gt.box_pixels - overlap
    return on_mask, overlap, union


def maiou_column(boxes: np.ndarray, gt: GroundTruth) -> np.ndarray:
    on_mask, overlap, union = _pixel_count_columns(boxes, gt)
    m, n = gt.shape
    if gt.empty_mask:
        return ratio_columns(1, overlap, 1, union, m * n)
    return ratio_columns(gt.box_pixels, on_mask, gt.mask_count, union, m * n)


def pixel_iou_column(boxes: np.ndarray, gt: GroundTruth) -> np.ndarray:
    _, overlap, union = _pixel_count_columns(boxes, gt)
    m, n = gt.shape
    return ratio_columns(1, overlap, 1, union, m * n)


def _score_block(boxes: np.ndarray, gts: Sequence[GroundTruth], measure: ProximityMeasure) -> np.ndarray:
    if measure is ProximityMeasure.MAIOU:
        return np.stack([maiou_column(boxes, gt) for gt in gts], axis=1)
    gt_boxes = np.asarray([gt.box.as_tuple() for gt in gts], dtype=np.float64)
    if measure is ProximityMeasure.IOU:
        return geometry.iou_matrix(boxes, gt_boxes)
    if measure is ProximityMeasure.GIOU:
        return geometry.giou_matrix(boxes, gt_boxes)
    return geometry.diou_matrix(boxes, gt_boxes)


def pairwise(anchors: Union[AnchorSet, np.ndarray], gts: Sequence[GroundTruth],
             measure: ProximityMeasure = ProximityMeasure.MAIOU, workers: int = 1) -> np.ndarray:
    """
    (num_anchors, num_gts) proximity matrix.

    IoU, GIoU and DIoU use continuous coordinates; maIoU uses pixel counts.
    Rows may be split across workers; the result does not depend on how.
    """
    measure = ProximityMeasure.parse(measure)
    boxes = _as_boxes(anchors)
    gts = list(gts)
    if len(boxes) == 0 or not gts:
        return np.zeros((len(boxes), len(gts)), dtype=np.float64)

    ranges = chunk_ranges(len(boxes), workers)
    blocks = ordered_map(lambda r: _score_block(boxes[r[0]:r[1]], gts, measure), ranges, workers)
    return np.concatenate(blocks, axis=0)


def pixel_iou_matrix(anchors: Union[AnchorSet, np.ndarray], gts: Sequence[GroundTruth]) -> np.ndarray:
    boxes = _as_boxes(anchors)
    gts = list(gts)
    if len(boxes) == 0 or not gts:
        return np.zeros((len(boxes), len(gts)), dtype=np.float64)
    return np.stack([pixel_iou_column(boxes, gt) for gt in gts], axis=1)


def maiou_brute_matrix(anchors: Union[AnchorSet, np.ndarray], gts: Sequence[GroundTruth]) -> np.ndarray:
    """Oracle matrix, one brute-force pixel walk per pair"""
    boxes = _as_boxes(anchors)
    gts = list(gts)
    out = np.zeros((len(boxes), len(gts)), dtype=np.float64)
    for i, row in enumerate(boxes):
        anchor = Box(*(float(v) for v in row))
        for j, gt in enumerate(gts):
            out[i, j] = maiou_brute(anchor, gt)
    return out

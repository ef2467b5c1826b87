"""
Anchor labelling: the fixed IoU-threshold rule and ATSS with a pluggable
proximity measure.
"""

import logging
from typing import NamedTuple, Sequence

import numpy as np

from src.core.maiou import mask_fallback, pairwise
from src.models.anchors import AnchorSet
from src.models.assignment import (
    IGNORE,
    NEGATIVE,
    AssignerSpec,
    AssignmentResult,
    DiffReport,
    FixedThresholds,
    LabelKind,
)
from src.models.ground_truth import GroundTruth, ProximityMeasure
from src.utils.errors import UsageError
from src.utils.parallel import ordered_map

logger = logging.getLogger(__name__)


def assign_fixed(prox: np.ndarray, th: FixedThresholds,
                 measure: ProximityMeasure = ProximityMeasure.IOU) -> AssignmentResult:
    """
    Label each anchor by its best ground truth: positive at or above tau_pos,
    negative below tau_neg, ignored in between. Ties go to the lower gt index.
    """
    prox = np.asarray(prox, dtype=np.float64)
    if prox.ndim != 2:
        raise ValueError(f"Proximity matrix must be 2-D, got shape {prox.shape}")
    num_anchors, num_gts = prox.shape
    if num_gts == 0:
        labels = np.full(num_anchors, NEGATIVE, dtype=np.int64)
        return AssignmentResult.from_labels(labels, 0, kind="fixed", measure=measure)

    best_gt = prox.argmax(axis=1)
    best = prox[np.arange(num_anchors), best_gt]
    labels = np.where(
        best >= th.tau_pos,
        best_gt,
        np.where(best < th.tau_neg, NEGATIVE, IGNORE),
    ).astype(np.int64)
    return AssignmentResult.from_labels(labels, num_gts, kind="fixed", measure=measure)


# Rounding slack for score >= threshold; scores live in [-1, 1]
THRESHOLD_TOLERANCE = 1e-12


def adaptive_threshold(scores: np.ndarray) -> float:
    """
    Mean plus population standard deviation of the candidate scores.

    Equal scores give exactly that score; summation order would otherwise
    leave a rounding residue above it.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.size == 0:
        return float("nan")
    if scores.min() == scores.max():
        return float(scores[0])
    return float(scores.mean() + scores.std())


class _GtCandidates(NamedTuple):
    positives: np.ndarray   # anchor indices surviving both filters
    scores: np.ndarray      # their scores
    threshold: float


def _atss_for_gt(anchors: AnchorSet, centers: np.ndarray, gt: GroundTruth,
                 measure: ProximityMeasure, k: int) -> _GtCandidates:
    gx, gy = gt.box.center
    dist = np.hypot(centers[:, 0] - gx, centers[:, 1] - gy)

    # k closest centers on every level; stable sort keeps lower indices first on ties
    picks = []
    for level in range(anchors.num_levels):
        sl = anchors.level_slice(level)
        if sl.stop <= sl.start:
            continue
        order = np.argsort(dist[sl], kind="stable")[:k]
        picks.append(order + sl.start)
    candidates = np.concatenate(picks) if picks else np.zeros(0, dtype=np.int64)
    if candidates.size == 0:
        return _GtCandidates(candidates, np.zeros(0), float("nan"))

    scores = pairwise(anchors.boxes[candidates], [gt], measure)[:, 0]
    threshold = adaptive_threshold(scores)

    cx, cy = centers[candidates, 0], centers[candidates, 1]
    b = gt.box
    inside = (cx > b.x1) & (cx < b.x2) & (cy > b.y1) & (cy < b.y2)
    keep = (scores >= threshold - THRESHOLD_TOLERANCE) & inside
    return _GtCandidates(candidates[keep], scores[keep], threshold)


def atss_assign(anchors: AnchorSet, gts: Sequence[GroundTruth],
                measure: ProximityMeasure = ProximityMeasure.MAIOU, k: int = 9,
                workers: int = 1) -> AssignmentResult:
    """
    Adaptive training sample selection.

    Per ground truth: take the k anchors closest to its center on each level,
    threshold their scores at mean + std, and keep those whose centers lie
    strictly inside the box. An anchor claimed by several ground truths goes to
    the highest score, then the lowest gt index. Everything else is negative.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    measure = ProximityMeasure.parse(measure)
    gts = list(gts)
    fallback = mask_fallback(gts, measure)
    labels = np.full(len(anchors), NEGATIVE, dtype=np.int64)
    if not gts or len(anchors) == 0:
        return AssignmentResult.from_labels(labels, len(gts), kind="atss", measure=measure, mask_fallback=fallback)

    centers = anchors.centers
    per_gt = ordered_map(lambda gt: _atss_for_gt(anchors, centers, gt, measure, k), gts, workers)

    # sequential reduction in gt order; strict '>' keeps the lower gt index on ties
    best = np.full(len(anchors), -np.inf)
    for g, result in enumerate(per_gt):
        better = result.scores > best[result.positives]
        idx = result.positives[better]
        labels[idx] = g
        best[idx] = result.scores[better]

    thresholds = tuple(r.threshold for r in per_gt)
    logger.debug(f"ATSS ({measure.value}, k={k}) thresholds: {[round(t, 4) for t in thresholds]}")
    return AssignmentResult.from_labels(
        labels, len(gts), thresholds=thresholds, kind="atss", measure=measure, mask_fallback=fallback
    )


def assignment_diff(a: AssignmentResult, b: AssignmentResult) -> DiffReport:
    """
    Count label-kind transitions from a to b.

    Indices are listed for transitions that change the kind; anchors positive
    in both but matched to different ground truths are listed as reassigned.
    """
    if len(a) != len(b):
        raise UsageError(f"Cannot diff assignments over {len(a)} and {len(b)} anchors")
    la, lb = a.labels_array, b.labels_array

    def kind_of(labels):
        return np.where(labels >= 0, 0, np.where(labels == NEGATIVE, 1, 2))

    kinds = [LabelKind.POSITIVE, LabelKind.NEGATIVE, LabelKind.IGNORE]
    ka, kb = kind_of(la), kind_of(lb)
    counts = {}
    indices = {}
    for i, src in enumerate(kinds):
        for j, dst in enumerate(kinds):
            hits = np.flatnonzero((ka == i) & (kb == j))
            key = DiffReport.key(src, dst)
            counts[key] = int(hits.size)
            if i != j:
                indices[key] = [int(v) for v in hits]
    reassigned = np.flatnonzero((la >= 0) & (lb >= 0) & (la != lb))
    return DiffReport(
        counts=dict(sorted(counts.items())),
        indices=dict(sorted(indices.items())),
        reassigned=[int(v) for v in reassigned],
    )


def run_assigner(spec: AssignerSpec, anchors: AnchorSet, gts: Sequence[GroundTruth],
                 workers: int = 1) -> AssignmentResult:
    """Dispatch an AssignerSpec onto the anchors of one image"""
    if spec.kind == "atss":
        return atss_assign(anchors, gts, spec.measure, spec.k, workers=workers)
    gts = list(gts)
    prox = pairwise(anchors, gts, spec.measure, workers=workers)
    result = assign_fixed(prox, spec.thresholds, measure=spec.measure)
    fallback = mask_fallback(gts, spec.measure)
    return result.model_copy(update={"mask_fallback": fallback}) if fallback else result


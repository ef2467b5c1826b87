"""
Dataset-level statistics: MOB distribution, IoU vs maIoU joint distribution
and label-level comparison of assigners.

Every statistic is accumulated per scene and merged in scene order, so the
result is the same for any worker count.
"""

import logging
from collections import Counter
from functools import reduce
from typing import List, Optional, Sequence

import numpy as np

from src.core.anchors import generate
from src.core.assigner import assignment_diff, run_assigner
from src.core.maiou import pairwise, pixel_iou_matrix
from src.models.anchors import AnchorConfig, AnchorSet
from src.models.assignment import AssignerSpec, AssignmentResult, LabelKind
from src.models.ground_truth import ProximityMeasure, Scene
from src.models.histogram import Histogram, Histogram2D
from src.models.reports import AssignerSummary, ComparisonReport, JointStats, MobStats, PairDiff
from src.utils.errors import EmptyInputError, UsageError
from src.utils.parallel import ordered_map

logger = logging.getLogger(__name__)


##############################################################################
# MOB distribution
##############################################################################

def scene_mob_stats(scene: Scene, bins: int = 20) -> MobStats:
    values = [gt.mob for gt in scene.gts]
    return MobStats(
        histogram=Histogram.from_values(values, bins),
        gts=len(values),
        below_half=sum(1 for v in values if v < 0.5),
    )


def mob_histogram(scenes: Sequence[Scene], bins: int = 20, workers: int = 1) -> MobStats:
    """Histogram of MOB(B, M) over every ground truth, with the share below 0.5"""
    partials = ordered_map(lambda s: scene_mob_stats(s, bins), scenes, workers)
    stats = reduce(MobStats.merge, partials, MobStats(histogram=Histogram.empty(bins), gts=0, below_half=0))
    if stats.gts == 0:
        raise EmptyInputError("MOB histogram needs at least one ground truth")
    logger.info(f"MOB < 0.5 for {stats.below_half}/{stats.gts} ground truths ({stats.fraction_below_half:.1%})")
    return stats


##############################################################################
# IoU vs maIoU
##############################################################################

def scene_joint_histogram(scene: Scene, anchors: AnchorSet, bins: int = 20) -> JointStats:
    """Joint (pixel IoU, maIoU) histogram for one scene and an explicit anchor set"""
    if not scene.gts or len(anchors) == 0:
        return JointStats(histogram=Histogram2D.empty(bins), pairs=0)
    iou = pixel_iou_matrix(anchors, scene.gts).reshape(-1)
    maiou = pairwise(anchors, scene.gts, ProximityMeasure.MAIOU).reshape(-1)

    keep = (iou > 0) | (maiou > 0)
    iou, maiou = iou[keep], maiou[keep]
    return JointStats(
        histogram=Histogram2D.from_pairs(iou, maiou, bins),
        pairs=int(keep.sum()),
        dropped_zero_pairs=int((~keep).sum()),
        low_iou_high_maiou=int(((iou < 0.5) & (maiou >= 0.5)).sum()),
        high_iou_low_maiou=int(((maiou < 0.5) & (iou >= 0.5)).sum()),
    )


def joint_histogram(scenes: Sequence[Scene], anchor_cfg: Optional[AnchorConfig] = None,
                    bins: int = 20, workers: int = 1) -> JointStats:
    """Joint histogram over every (anchor, gt) pair, anchors generated per scene"""
    anchor_cfg = anchor_cfg or AnchorConfig()

    def one(scene: Scene) -> JointStats:
        return scene_joint_histogram(scene, generate(scene.height, scene.width, anchor_cfg), bins)

    partials = ordered_map(one, scenes, workers)
    stats = reduce(JointStats.merge, partials, JointStats(histogram=Histogram2D.empty(bins), pairs=0))
    logger.info(
        f"Joint histogram: {stats.pairs} pairs, {stats.low_iou_high_maiou} low-IoU/high-maIoU, "
        f"{stats.high_iou_low_maiou} high-IoU/low-maIoU"
    )
    return stats


##############################################################################
# Assigner comparison
##############################################################################

def compare_assigners(scenes: Sequence[Scene], anchor_cfg: Optional[AnchorConfig],
                      specs: Sequence[AssignerSpec], workers: int = 1) -> ComparisonReport:
    """
    Run every spec on every scene and report label totals plus pairwise
    transitions. Anchor indices in the diffs run over all scenes in order.
    """
    specs = list(specs)
    if not specs:
        raise UsageError("At least one assigner spec is required")
    anchor_cfg = anchor_cfg or AnchorConfig()

    def one(scene: Scene):
        anchors = generate(scene.height, scene.width, anchor_cfg)
        return len(anchors), [run_assigner(spec, anchors, scene.gts) for spec in specs]

    per_scene = ordered_map(one, scenes, workers)

    summaries: List[AssignerSummary] = []
    for i, spec in enumerate(specs):
        totals = Counter()
        per_gt = Counter()
        anchors = gts = 0
        for count, results in per_scene:
            r = results[i]
            anchors += count
            gts += r.num_gts
            for kind in LabelKind:
                totals[kind] += r.count(kind)
            per_gt.update(r.positives_per_gt)
        summaries.append(AssignerSummary(
            name=spec.name,
            spec=spec,
            anchors=anchors,
            positive=totals[LabelKind.POSITIVE],
            negative=totals[LabelKind.NEGATIVE],
            ignore=totals[LabelKind.IGNORE],
            gts=gts,
            positives_per_gt=dict(sorted(per_gt.items())),
        ))

    diffs = []
    for a in range(len(specs)):
        for b in range(a + 1, len(specs)):
            report = None
            offset = 0
            for count, results in per_scene:
                d = assignment_diff(results[a], results[b])
                report = d if report is None else report.merge(d, offset)
                offset += count
            if report is None:
                empty = AssignmentResult.from_labels(np.zeros(0, dtype=np.int64), 0)
                report = assignment_diff(empty, empty)
            diffs.append(PairDiff(a=a, b=b, report=report))
            logger.info(f"{specs[a].name} -> {specs[b].name}: {report.changed} anchors change kind")

    return ComparisonReport(assigners=summaries, diffs=diffs)


"""
Timing of brute-force versus integral-image maIoU over synthetic scenes.

Scenes are seeded, so both paths and every run see the same anchors, boxes
and masks. Timings are single-threaded.
"""

import logging
import statistics
import time
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from src.config.settings import settings
from src.core.anchors import generate
from src.core.maiou import maiou_brute_matrix, pairwise
from src.models.box import Box
from src.models.ground_truth import GroundTruth, ProximityMeasure
from src.models.raster import BinaryMask
from src.models.reports import BenchCase, BenchReport, BenchResult

logger = logging.getLogger(__name__)

DEFAULT_CASES = (
    BenchCase(grid=8, anchors=1, gts=1),
    BenchCase(grid=550, anchors=6416, gts=8),
)


def ellipse_mask(box: Tuple[int, int, int, int], m: int, n: int) -> BinaryMask:
    """Filled ellipse inscribed in an integer box, sampled at pixel centers"""
    x1, y1, x2, y2 = box
    cx, cy = (x1 + x2) / 2, (y1 + y2) / 2
    rx, ry = (x2 - x1) / 2, (y2 - y1) / 2
    ys = np.arange(m, dtype=np.float64)[:, None] + 0.5
    xs = np.arange(n, dtype=np.float64)[None, :] + 0.5
    return BinaryMask(((xs - cx) / rx) ** 2 + ((ys - cy) / ry) ** 2 <= 1.0)


def synthetic_scene(case: BenchCase, seed: int = 0):
    """
    Anchors from the default FPN grid of a case.grid square image, subsampled
    or resampled to case.anchors, and case.gts ellipse-masked boxes.

    Returns (anchor boxes, [(Box, BinaryMask), ...]).
    """
    rng = np.random.default_rng([seed, case.grid, case.anchors, case.gts])
    grid = generate(case.grid, case.grid).boxes
    if case.anchors == len(grid):
        boxes = grid
    elif case.anchors < len(grid):
        boxes = grid[np.sort(rng.choice(len(grid), size=case.anchors, replace=False))]
    else:
        boxes = grid[np.sort(rng.choice(len(grid), size=case.anchors, replace=True))]

    g = case.grid
    lo, hi = max(1, g // 8), max(2, g // 2)
    raw = []
    for _ in range(case.gts):
        w, h = (int(v) for v in rng.integers(lo, hi, size=2, endpoint=True))
        w, h = min(w, g), min(h, g)
        x1 = int(rng.integers(0, g - w, endpoint=True))
        y1 = int(rng.integers(0, g - h, endpoint=True))
        pixel_box = (x1, y1, x1 + w, y1 + h)
        raw.append((Box(*(float(v) for v in pixel_box)), ellipse_mask(pixel_box, g, g)))
    return boxes, raw


def _median_time(fn: Callable[[], np.ndarray], repetitions: int):
    result = fn()  # warm-up
    times = []
    for _ in range(repetitions):
        start = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - start)
    return statistics.median(times), result


def run_case(case: BenchCase, repetitions: int = 5, seed: int = 0) -> BenchResult:
    boxes, raw = synthetic_scene(case, seed)
    built = [GroundTruth.build(box, mask) for box, mask in raw]

    def brute():
        return maiou_brute_matrix(boxes, built)

    def fast():
        # integral images are part of the measured cost
        gts = [GroundTruth.build(box, mask) for box, mask in raw]
        return pairwise(boxes, gts, ProximityMeasure.MAIOU, workers=1)

    brute_s, brute_m = _median_time(brute, repetitions)
    fast_s, fast_m = _median_time(fast, repetitions)
    identical = bool(np.array_equal(brute_m, fast_m))
    if not identical:
        logger.error(f"Brute and fast maIoU disagree on {case}")

    result = BenchResult(
        case=case,
        pairs=len(boxes) * len(built),
        brute_seconds=brute_s,
        fast_seconds=fast_s,
        repetitions=repetitions,
        identical=identical,
        low_confidence=repetitions < settings.ANALYSIS.MIN_REPETITIONS,
    )
    logger.info(
        f"grid {case.grid}, {case.anchors} anchors, {case.gts} gts: brute {brute_s:.4f}s, "
        f"fast {fast_s:.4f}s, speedup {result.speedup:.1f}x"
    )
    return result


def bench_maiou(grid_sizes: Sequence[int], anchor_counts: Sequence[int], gt_counts: Sequence[int],
                repetitions: int = 5, seed: int = 0,
                speedup_floor: Optional[float] = None) -> BenchReport:
    """
    Time both maIoU paths on each zipped (grid, anchors, gts) case.

    Fewer than MIN_REPETITIONS repetitions still run but are flagged
    low-confidence.
    """
    if not (len(grid_sizes) == len(anchor_counts) == len(gt_counts)):
        raise ValueError("grid_sizes, anchor_counts and gt_counts must have the same length")
    if repetitions < 1:
        raise ValueError(f"repetitions must be >= 1, got {repetitions}")
    cases: List[BenchCase] = [
        BenchCase(grid=g, anchors=a, gts=n) for g, a, n in zip(grid_sizes, anchor_counts, gt_counts)
    ]
    if repetitions < settings.ANALYSIS.MIN_REPETITIONS:
        logger.warning(f"{repetitions} repetitions is below {settings.ANALYSIS.MIN_REPETITIONS}; timings are low-confidence")
    return BenchReport(
        results=[run_case(case, repetitions, seed) for case in cases],
        seed=seed,
        speedup_floor=speedup_floor if speedup_floor is not None else settings.ANALYSIS.SPEEDUP_FLOOR,
        host=settings.HOST_NAME,
    )

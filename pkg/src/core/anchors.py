"""
FPN anchor-grid generation.

Defaults reproduce a single 1:1 anchor of base scale 4 per location on
strides 8..128, which gives 6416 anchors for a 550 x 550 image.
"""

import logging
import math
from typing import Optional, Tuple

import numpy as np

from src.models.anchors import AnchorConfig, AnchorSet, LevelGrid

logger = logging.getLogger(__name__)


def level_dims(image_h: int, image_w: int, stride: int) -> Tuple[int, int]:
    """Feature-map size of one level: ceil(image / stride) per axis"""
    if image_h <= 0 or image_w <= 0 or stride <= 0:
        raise ValueError(f"Image size and stride must be positive, got {image_h}x{image_w} / {stride}")
    return math.ceil(image_h / stride), math.ceil(image_w / stride)


def _cell_shapes(stride: int, cfg: AnchorConfig) -> np.ndarray:
    """(per_location, 2) widths and heights, scale-major then ratio"""
    shapes = []
    for scale in cfg.scales:
        for ratio in cfg.ratios:
            side = scale * stride
            shapes.append((side * math.sqrt(ratio), side / math.sqrt(ratio)))
    return np.asarray(shapes, dtype=np.float64)


def generate(image_h: int, image_w: int, cfg: Optional[AnchorConfig] = None) -> AnchorSet:
    """Unclipped anchors for every level of cfg, in AnchorSet order"""
    cfg = cfg or AnchorConfig()
    per_location = cfg.anchors_per_location

    all_boxes = []
    all_levels = []
    grids = []
    start = 0
    for level, stride in enumerate(cfg.strides):
        rows, cols = level_dims(image_h, image_w, stride)
        cy = (np.arange(rows, dtype=np.float64) + cfg.offset) * stride
        cx = (np.arange(cols, dtype=np.float64) + cfg.offset) * stride
        # (rows, cols) grids of centers, flattened row-major
        cyy, cxx = np.meshgrid(cy, cx, indexing="ij")
        centers = np.stack([cxx.reshape(-1), cyy.reshape(-1)], axis=1)

        shapes = _cell_shapes(stride, cfg)
        half = shapes / 2
        # (locations, per_location, 4)
        boxes = np.empty((centers.shape[0], per_location, 4), dtype=np.float64)
        boxes[:, :, 0] = centers[:, None, 0] - half[None, :, 0]
        boxes[:, :, 1] = centers[:, None, 1] - half[None, :, 1]
        boxes[:, :, 2] = centers[:, None, 0] + half[None, :, 0]
        boxes[:, :, 3] = centers[:, None, 1] + half[None, :, 1]

        grid = LevelGrid(stride=stride, rows=rows, cols=cols, start=start, per_location=per_location)
        grids.append(grid)
        all_boxes.append(boxes.reshape(-1, 4))
        all_levels.append(np.full(grid.count, level, dtype=np.int64))
        start += grid.count

    anchors = AnchorSet(
        boxes=np.concatenate(all_boxes) if all_boxes else np.zeros((0, 4)),
        level_ids=np.concatenate(all_levels) if all_levels else np.zeros(0, dtype=np.int64),
        levels=tuple(grids),
        num_scales=len(cfg.scales),
        num_ratios=len(cfg.ratios),
    )
    logger.debug(f"Generated {len(anchors)} anchors for {image_h}x{image_w} over {len(grids)} levels")
    return anchors


def expected_count(image_h: int, image_w: int, cfg: Optional[AnchorConfig] = None) -> int:
    """Total anchors generate() will produce, without building them"""
    cfg = cfg or AnchorConfig()
    total = 0
    for stride in cfg.strides:
        rows, cols = level_dims(image_h, image_w, stride)
        total += rows * cols
    return total * cfg.anchors_per_location

from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator

from src.models.box import Box


class AnchorConfig(BaseModel):
    """FPN anchor layout: one grid per stride, len(scales) * len(ratios) anchors per cell"""
    strides: List[int] = Field(default_factory=lambda: [8, 16, 32, 64, 128])
    scales: List[float] = Field(default_factory=lambda: [4.0])
    ratios: List[float] = Field(default_factory=lambda: [1.0])
    offset: float = Field(0.5, ge=0.0, le=1.0)

    @field_validator("strides")
    def validate_strides(cls, v):
        if not v:
            raise ValueError("At least one stride is required")
        if any(s <= 0 for s in v):
            raise ValueError(f"Strides must be positive, got {v}")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError(f"Strides must be strictly increasing, got {v}")
        return v

    @field_validator("scales", "ratios")
    def validate_positive(cls, v, info):
        if not v:
            raise ValueError(f"At least one value is required for {info.field_name}")
        if any(not (x > 0) for x in v):
            raise ValueError(f"{info.field_name} must be positive, got {v}")
        return v

    @property
    def anchors_per_location(self) -> int:
        return len(self.scales) * len(self.ratios)


class LevelGrid(NamedTuple):
    """One FPN level: stride, grid dims and where its anchors start in the flat order"""
    stride: int
    rows: int
    cols: int
    start: int
    per_location: int

    @property
    def count(self) -> int:
        return self.rows * self.cols * self.per_location

    @property
    def stop(self) -> int:
        return self.start + self.count


class AnchorIndex(NamedTuple):
    level: int
    row: int
    col: int
    scale: int
    ratio: int


@dataclass(frozen=True, eq=False)
class AnchorSet:
    """
    All anchors of one image, flattened level-major, then row-major, then
    per-location (scale-major, ratio-minor).
    """
    boxes: np.ndarray
    level_ids: np.ndarray
    levels: Tuple[LevelGrid, ...]
    num_scales: int = 1
    num_ratios: int = 1

    def __post_init__(self):
        boxes = np.asarray(self.boxes, dtype=np.float64).reshape(-1, 4).copy()
        level_ids = np.asarray(self.level_ids, dtype=np.int64).reshape(-1).copy()
        levels = tuple(self.levels)
        if len(level_ids) != len(boxes):
            raise ValueError(f"{len(boxes)} anchors but {len(level_ids)} level ids")
        expected = sum(level.count for level in levels)
        if expected != len(boxes):
            raise ValueError(f"Level grids describe {expected} anchors, got {len(boxes)}")
        if len(boxes) and not ((boxes[:, 2] > boxes[:, 0]) & (boxes[:, 3] > boxes[:, 1])).all():
            raise ValueError("Every anchor must have positive width and height")
        boxes.flags.writeable = False
        level_ids.flags.writeable = False
        object.__setattr__(self, "boxes", boxes)
        object.__setattr__(self, "level_ids", level_ids)
        object.__setattr__(self, "levels", levels)

    @classmethod
    def from_boxes(cls, boxes, level_ids: Optional[List[int]] = None) -> "AnchorSet":
        """
        Wrap explicit anchors. Without level ids everything sits on one level;
        with them, anchors must already be grouped by level.
        """
        boxes = np.asarray(boxes, dtype=np.float64).reshape(-1, 4)
        if level_ids is None:
            level_ids = np.zeros(len(boxes), dtype=np.int64)
        level_ids = np.asarray(level_ids, dtype=np.int64)
        if len(level_ids) and (np.diff(level_ids) < 0).any():
            raise ValueError("Explicit anchors must be ordered by level id")
        levels = []
        start = 0
        for level in range(int(level_ids.max()) + 1 if len(level_ids) else 0):
            count = int((level_ids == level).sum())
            levels.append(LevelGrid(stride=0, rows=1, cols=count, start=start, per_location=1))
            start += count
        return cls(boxes=boxes, level_ids=level_ids, levels=tuple(levels))

    def __len__(self):
        return int(self.boxes.shape[0])

    @property
    def num_levels(self) -> int:
        return len(self.levels)

    @property
    def centers(self) -> np.ndarray:
        return np.stack(
            [(self.boxes[:, 0] + self.boxes[:, 2]) / 2, (self.boxes[:, 1] + self.boxes[:, 3]) / 2],
            axis=1,
        )

    def box(self, index: int) -> Box:
        x1, y1, x2, y2 = (float(v) for v in self.boxes[index])
        return Box(x1, y1, x2, y2)

    def level_slice(self, level: int) -> slice:
        grid = self.levels[level]
        return slice(grid.start, grid.stop)

    def flat_index(self, level: int, row: int, col: int, scale: int = 0, ratio: int = 0) -> int:
        grid = self.levels[level]
        if not (0 <= row < grid.rows and 0 <= col < grid.cols):
            raise IndexError(f"Cell ({row}, {col}) outside level {level} grid {grid.rows}x{grid.cols}")
        if not (0 <= scale < self.num_scales and 0 <= ratio < self.num_ratios):
            raise IndexError(f"Anchor shape ({scale}, {ratio}) out of range")
        location = row * grid.cols + col
        return grid.start + location * grid.per_location + scale * self.num_ratios + ratio

    def unravel(self, index: int) -> AnchorIndex:
        if not (0 <= index < len(self)):
            raise IndexError(f"Anchor index {index} out of range for {len(self)} anchors")
        level = int(self.level_ids[index])
        grid = self.levels[level]
        location, shape = divmod(index - grid.start, grid.per_location)
        row, col = divmod(location, grid.cols)
        scale, ratio = divmod(shape, self.num_ratios)
        return AnchorIndex(level=level, row=row, col=col, scale=scale, ratio=ratio)

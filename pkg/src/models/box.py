import math
from typing import Tuple

from pydantic import BaseModel, ConfigDict, model_validator


class Box(BaseModel):
    """Axis-aligned rectangle in continuous pixel coordinates (x = column, y = row)"""
    x1: float
    y1: float
    x2: float
    y2: float

    model_config = ConfigDict(frozen=True)

    def __init__(self, x1: float, y1: float, x2: float, y2: float, **data):
        super().__init__(x1=x1, y1=y1, x2=x2, y2=y2, **data)

    @model_validator(mode="after")
    def validate_extent(self):
        coords = (self.x1, self.y1, self.x2, self.y2)
        if not all(math.isfinite(c) for c in coords):
            raise ValueError(f"Box coordinates must be finite, got {coords}")
        if not (self.x2 > self.x1 and self.y2 > self.y1):
            raise ValueError(f"Box must have positive width and height, got {coords}")
        return self

    @classmethod
    def from_xywh(cls, x: float, y: float, w: float, h: float) -> "Box":
        """Create a box from a COCO-style [x, y, width, height] bbox"""
        return cls(x, y, x + w, y + h)

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    @property
    def center(self) -> Tuple[float, float]:
        return ((self.x1 + self.x2) / 2, (self.y1 + self.y2) / 2)

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.x1, self.y1, self.x2, self.y2)

    def translate(self, dx: float, dy: float) -> "Box":
        return Box(self.x1 + dx, self.y1 + dy, self.x2 + dx, self.y2 + dy)

    def scale(self, factor: float) -> "Box":
        """Scale about the origin"""
        return Box(self.x1 * factor, self.y1 * factor, self.x2 * factor, self.y2 * factor)


class PixelBox(BaseModel):
    """
    Integer pixel-index bounds [x1, x2) x [y1, y2) on an m x n grid.

    The grid size travels with the box so that out-of-grid boxes are
    rejected here, once, instead of at every lookup.
    """
    x1: int
    y1: int
    x2: int
    y2: int
    m: int
    n: int

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def validate_bounds(self):
        if self.m < 1 or self.n < 1:
            raise ValueError(f"Grid must be at least 1x1, got {self.m}x{self.n}")
        if not (0 <= self.x1 < self.x2 <= self.n):
            raise ValueError(f"PixelBox columns [{self.x1}, {self.x2}) outside grid width {self.n}")
        if not (0 <= self.y1 < self.y2 <= self.m):
            raise ValueError(f"PixelBox rows [{self.y1}, {self.y2}) outside grid height {self.m}")
        return self

    @property
    def area(self) -> int:
        return (self.x2 - self.x1) * (self.y2 - self.y1)

    def slices(self) -> Tuple[slice, slice]:
        """Row and column slices selecting this box from an m x n array"""
        return slice(self.y1, self.y2), slice(self.x1, self.x2)

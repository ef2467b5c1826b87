"""
Binary masks, integral images and pixel-domain box discretization.

Pixel (i, j) covers [j, j+1) x [i, i+1); its center is (j + 0.5, i + 0.5).
Every count here is an exact integer.
"""

import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np

from src.models.box import Box, PixelBox
from src.models.raster import BinaryMask, IntegralImage
from src.utils.errors import InvalidAnnotationError

logger = logging.getLogger(__name__)


def rasterize_polygon(vertices: Sequence[Tuple[float, float]], m: int, n: int) -> BinaryMask:
    """
    Rasterize a polygon on an m x n grid with the even-odd rule.

    A pixel is set when its center lies inside the polygon. Each row is a
    scanline: edges crossing the row's center height are intersected, and a
    center is inside when an odd number of crossings lie strictly to its right.
    """
    if m < 1 or n < 1:
        raise ValueError(f"Grid must be at least 1x1, got {m}x{n}")
    pts = np.asarray(vertices, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise InvalidAnnotationError(f"polygon needs at least 3 vertices, got {len(pts)}")
    if not np.isfinite(pts).all():
        raise InvalidAnnotationError("polygon has non-finite coordinates")

    x0, y0 = pts[:, 0], pts[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)

    # Only rows whose centers fall within the polygon's vertical span can be hit
    row_lo = max(0, int(math.floor(pts[:, 1].min() - 0.5)))
    row_hi = min(m, int(math.ceil(pts[:, 1].max() + 0.5)))
    data = np.zeros((m, n), dtype=np.bool_)
    if row_lo >= row_hi:
        return BinaryMask(data)

    centers_y = np.arange(row_lo, row_hi, dtype=np.float64) + 0.5
    centers_x = np.arange(n, dtype=np.float64) + 0.5

    # Half-open crossing test, as in the crossing-number rule:
    # upward (y0 <= y < y1) or downward (y1 <= y < y0). Horizontal edges never cross.
    cy = centers_y[:, None]
    crosses = ((y0 <= cy) & (cy < y1)) | ((y1 <= cy) & (cy < y0))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (cy - y0) / (y1 - y0)
        xints = x0 + t * (x1 - x0)

    for r, row in enumerate(range(row_lo, row_hi)):
        xs = np.sort(xints[r][crosses[r]])
        if xs.size == 0:
            continue
        # crossings strictly right of each center
        right = xs.size - np.searchsorted(xs, centers_x, side="right")
        data[row] = (right % 2) == 1

    return BinaryMask(data)


def decode_rle(counts: Sequence[int], m: int, n: int) -> BinaryMask:
    """
    Decode an uncompressed COCO run-length encoding.

    Runs alternate zeros and ones starting with zeros, over the mask read
    in column-major order.
    """
    if m < 1 or n < 1:
        raise ValueError(f"Grid must be at least 1x1, got {m}x{n}")
    counts = list(counts)
    if any(isinstance(c, bool) or not isinstance(c, (int, np.integer)) for c in counts):
        raise InvalidAnnotationError("RLE counts must be non-negative integers")
    runs = np.asarray(counts, dtype=np.int64)
    if runs.ndim != 1 or (runs < 0).any():
        raise InvalidAnnotationError("RLE counts must be non-negative integers")
    total = int(runs.sum())
    if total != m * n:
        raise InvalidAnnotationError(f"RLE counts sum to {total}, expected {m}x{n}={m * n}")
    values = (np.arange(len(runs)) % 2).astype(np.bool_)
    flat = np.repeat(values, runs)
    return BinaryMask(flat.reshape((m, n), order="F"))


def build_integral(mask: BinaryMask) -> IntegralImage:
    """Prefix-sum table of the mask: one cumulative pass per axis"""
    m, n = mask.shape
    table = np.zeros((m + 1, n + 1), dtype=np.int64)
    table[1:, 1:] = mask.data.astype(np.int64).cumsum(axis=0).cumsum(axis=1)
    return IntegralImage(table)


def mask_total(ii: IntegralImage) -> int:
    """|M|, the bottom-right entry of the table"""
    return int(ii.table[ii.m, ii.n])


def mask_in_box(ii: IntegralImage, pb: PixelBox) -> int:
    """Mask pixels inside pb from four table lookups"""
    if (pb.m, pb.n) != (ii.m, ii.n):
        raise ValueError(f"PixelBox grid {pb.m}x{pb.n} does not match integral image {ii.m}x{ii.n}")
    t = ii.table
    return int(t[pb.y2, pb.x2] + t[pb.y1, pb.x1] - t[pb.y2, pb.x1] - t[pb.y1, pb.x2])


def discretize(b: Box, m: int, n: int) -> Optional[PixelBox]:
    """
    Outer pixel cover of a continuous box, clipped to the m x n grid.

    Returns None when nothing of the box is left on the grid.
    """
    x1 = min(max(math.floor(b.x1), 0), n)
    x2 = min(max(math.ceil(b.x2), 0), n)
    y1 = min(max(math.floor(b.y1), 0), m)
    y2 = min(max(math.ceil(b.y2), 0), m)
    if x2 <= x1 or y2 <= y1:
        return None
    return PixelBox(x1=x1, y1=y1, x2=x2, y2=y2, m=m, n=n)


def discretize_many(boxes: np.ndarray, m: int, n: int) -> np.ndarray:
    """
    Vectorized discretize for an (N, 4) array of x1, y1, x2, y2.

    Returns an (N, 4) int64 array. Boxes with nothing on the grid come back
    with zero width or height, which makes every count derived from them zero.
    """
    boxes = np.asarray(boxes, dtype=np.float64).reshape(-1, 4)
    out = np.empty(boxes.shape, dtype=np.int64)
    out[:, 0] = np.clip(np.floor(boxes[:, 0]), 0, n)
    out[:, 1] = np.clip(np.floor(boxes[:, 1]), 0, m)
    out[:, 2] = np.clip(np.ceil(boxes[:, 2]), 0, n)
    out[:, 3] = np.clip(np.ceil(boxes[:, 3]), 0, m)
    return out


def pixel_area(pb: Optional[PixelBox]) -> int:
    return 0 if pb is None else pb.area


def intersect_pixel_boxes(a: Optional[PixelBox], b: Optional[PixelBox]) -> Optional[PixelBox]:
    if a is None or b is None:
        return None
    x1, y1 = max(a.x1, b.x1), max(a.y1, b.y1)
    x2, y2 = min(a.x2, b.x2), min(a.y2, b.y2)
    if x2 <= x1 or y2 <= y1:
        return None
    return PixelBox(x1=x1, y1=y1, x2=x2, y2=y2, m=a.m, n=a.n)


def crop_to_box(mask: BinaryMask, pb: Optional[PixelBox]) -> BinaryMask:
    """Zero every mask pixel outside pb"""
    data = np.zeros(mask.shape, dtype=np.bool_)
    if pb is not None:
        rows, cols = pb.slices()
        data[rows, cols] = mask.data[rows, cols]
    return BinaryMask(data)


def mask_extent(mask: BinaryMask) -> Optional[PixelBox]:
    """Tight pixel bounds of the set pixels, None for an empty mask"""
    rows = np.flatnonzero(mask.data.any(axis=1))
    if rows.size == 0:
        return None
    cols = np.flatnonzero(mask.data.any(axis=0))
    return PixelBox(
        x1=int(cols[0]), y1=int(rows[0]), x2=int(cols[-1]) + 1, y2=int(rows[-1]) + 1,
        m=mask.height, n=mask.width,
    )

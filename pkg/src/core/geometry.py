"""
Continuous-domain box arithmetic and the box-only IoU variants.

Scalar functions take Box values; the *_matrix functions take (N, 4) and
(K, 4) arrays of x1, y1, x2, y2 and return (N, K) matrices with the same
formulas, used when scoring whole anchor sets.
"""

import math

import numpy as np

from src.models.box import Box


def area(b: Box) -> float:
    return (b.x2 - b.x1) * (b.y2 - b.y1)


def intersection_area(a: Box, b: Box) -> float:
    w = min(a.x2, b.x2) - max(a.x1, b.x1)
    h = min(a.y2, b.y2) - max(a.y1, b.y1)
    if w <= 0 or h <= 0:
        return 0.0
    return w * h


def enclosing_box(a: Box, b: Box) -> Box:
    """Smallest box containing both"""
    return Box(min(a.x1, b.x1), min(a.y1, b.y1), max(a.x2, b.x2), max(a.y2, b.y2))


def iou(a: Box, b: Box) -> float:
    inter = intersection_area(a, b)
    union = area(a) + area(b) - inter
    return inter / union


def giou(a: Box, b: Box) -> float:
    """IoU minus the share of the enclosing box not covered by the union"""
    inter = intersection_area(a, b)
    union = area(a) + area(b) - inter
    enclosing = area(enclosing_box(a, b))
    return inter / union - (enclosing - union) / enclosing


def center_distance(a: Box, b: Box) -> float:
    (ax, ay), (bx, by) = a.center, b.center
    return math.hypot(ax - bx, ay - by)


def diou(a: Box, b: Box) -> float:
    """IoU minus squared center distance over squared enclosing-box diagonal"""
    (ax, ay), (bx, by) = a.center, b.center
    rho2 = (ax - bx) ** 2 + (ay - by) ** 2
    c = enclosing_box(a, b)
    c2 = c.width ** 2 + c.height ** 2
    return iou(a, b) - rho2 / c2


def center_inside(point, b: Box) -> bool:
    """Strict interiority: a point on the boundary is outside"""
    x, y = point
    return b.x1 < x < b.x2 and b.y1 < y < b.y2


##############################################################################
# Vectorized forms
##############################################################################

def _split(boxes):
    boxes = np.asarray(boxes, dtype=np.float64).reshape(-1, 4)
    return boxes[:, 0], boxes[:, 1], boxes[:, 2], boxes[:, 3]


def _inter_union(a, b):
    ax1, ay1, ax2, ay2 = (v[:, None] for v in _split(a))
    bx1, by1, bx2, by2 = (v[None, :] for v in _split(b))
    w = np.clip(np.minimum(ax2, bx2) - np.maximum(ax1, bx1), 0, None)
    h = np.clip(np.minimum(ay2, by2) - np.maximum(ay1, by1), 0, None)
    inter = w * h
    union = (ax2 - ax1) * (ay2 - ay1) + (bx2 - bx1) * (by2 - by1) - inter
    enc_w = np.maximum(ax2, bx2) - np.minimum(ax1, bx1)
    enc_h = np.maximum(ay2, by2) - np.minimum(ay1, by1)
    return inter, union, enc_w, enc_h


def iou_matrix(a, b) -> np.ndarray:
    inter, union, _, _ = _inter_union(a, b)
    return inter / union


def giou_matrix(a, b) -> np.ndarray:
    inter, union, enc_w, enc_h = _inter_union(a, b)
    enclosing = enc_w * enc_h
    return inter / union - (enclosing - union) / enclosing


def diou_matrix(a, b) -> np.ndarray:
    inter, union, enc_w, enc_h = _inter_union(a, b)
    ca, cb = centers(a), centers(b)
    rho2 = (ca[:, None, 0] - cb[None, :, 0]) ** 2 + (ca[:, None, 1] - cb[None, :, 1]) ** 2
    return inter / union - rho2 / (enc_w ** 2 + enc_h ** 2)


def centers(boxes) -> np.ndarray:
    x1, y1, x2, y2 = _split(boxes)
    return np.stack([(x1 + x2) / 2, (y1 + y2) / 2], axis=1)


def center_distance_matrix(a, b) -> np.ndarray:
    ca, cb = centers(a), centers(b)
    return np.hypot(ca[:, None, 0] - cb[None, :, 0], ca[:, None, 1] - cb[None, :, 1])

"""
maiou
Mask-aware IoU for anchor assignment: exact pixel-domain maIoU, FPN anchors,
fixed-threshold and ATSS assigners, COCO ingestion and dataset statistics.
"""

__version__ = "1.0.0"

"""
Geometry, rasterization, maIoU, anchor generation and assignment.
"""

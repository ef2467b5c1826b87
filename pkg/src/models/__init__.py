"""
Domain models: boxes, masks, ground truths, anchors, assignments and reports.
"""

# Models package

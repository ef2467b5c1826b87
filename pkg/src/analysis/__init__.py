"""
Dataset statistics, assigner comparison, benchmark and report rendering.
"""

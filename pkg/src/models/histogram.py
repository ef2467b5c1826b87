from typing import Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator


def uniform_edges(bins: int) -> Tuple[float, ...]:
    """bins + 1 evenly spaced edges on [0, 1]"""
    if bins < 1:
        raise ValueError(f"Histogram needs at least one bin, got {bins}")
    return tuple(float(e) for e in np.linspace(0.0, 1.0, bins + 1))


def _check_edges(edges: Sequence[float], name: str):
    if len(edges) < 2:
        raise ValueError(f"{name} needs at least two edges")
    if any(b <= a for a, b in zip(edges, edges[1:])):
        raise ValueError(f"{name} must be strictly increasing")


class Histogram(BaseModel):
    """
    1-D histogram with numpy binning semantics: bins are [lo, hi) except the
    last one, which also holds its upper edge.
    """
    edges: Tuple[float, ...]
    counts: Tuple[int, ...]

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def validate_shape(self):
        _check_edges(self.edges, "edges")
        if len(self.counts) != len(self.edges) - 1:
            raise ValueError(f"{len(self.edges)} edges need {len(self.edges) - 1} counts, got {len(self.counts)}")
        if any(c < 0 for c in self.counts):
            raise ValueError("Counts must be non-negative")
        return self

    @classmethod
    def empty(cls, bins: int) -> "Histogram":
        return cls(edges=uniform_edges(bins), counts=(0,) * bins)

    @classmethod
    def from_values(cls, values, bins: int = 20) -> "Histogram":
        edges = uniform_edges(bins)
        counts, _ = np.histogram(np.asarray(values, dtype=np.float64), bins=np.asarray(edges))
        return cls(edges=edges, counts=tuple(int(c) for c in counts))

    @property
    def bins(self) -> int:
        return len(self.counts)

    @property
    def total(self) -> int:
        return sum(self.counts)

    def merge(self, other: "Histogram") -> "Histogram":
        if self.edges != other.edges:
            raise ValueError("Cannot merge histograms with different edges")
        return Histogram(edges=self.edges, counts=tuple(a + b for a, b in zip(self.counts, other.counts)))


class Histogram2D(BaseModel):
    """counts[i][j] holds observations in x bin i and y bin j"""
    x_edges: Tuple[float, ...]
    y_edges: Tuple[float, ...]
    counts: Tuple[Tuple[int, ...], ...]

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def validate_shape(self):
        _check_edges(self.x_edges, "x_edges")
        _check_edges(self.y_edges, "y_edges")
        if len(self.counts) != len(self.x_edges) - 1 or \
                any(len(row) != len(self.y_edges) - 1 for row in self.counts):
            raise ValueError("counts grid does not match the edges")
        return self

    @classmethod
    def empty(cls, bins: int) -> "Histogram2D":
        edges = uniform_edges(bins)
        return cls(x_edges=edges, y_edges=edges, counts=tuple((0,) * bins for _ in range(bins)))

    @classmethod
    def from_pairs(cls, x, y, bins: int = 20) -> "Histogram2D":
        edges = uniform_edges(bins)
        grid = np.asarray(edges)
        counts, _, _ = np.histogram2d(
            np.asarray(x, dtype=np.float64).reshape(-1),
            np.asarray(y, dtype=np.float64).reshape(-1),
            bins=[grid, grid],
        )
        return cls(
            x_edges=edges,
            y_edges=edges,
            counts=tuple(tuple(int(c) for c in row) for row in counts),
        )

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=np.int64)

    @property
    def total(self) -> int:
        return int(self.array.sum())

    @property
    def diagonal_total(self) -> int:
        return int(np.trace(self.array))

    def merge(self, other: "Histogram2D") -> "Histogram2D":
        if self.x_edges != other.x_edges or self.y_edges != other.y_edges:
            raise ValueError("Cannot merge histograms with different edges")
        merged = self.array + other.array
        return Histogram2D(
            x_edges=self.x_edges,
            y_edges=self.y_edges,
            counts=tuple(tuple(int(c) for c in row) for row in merged),
        )

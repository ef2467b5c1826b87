from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """m x n object mask, row-major, stored as a read-only boolean array"""
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise ValueError(f"Mask must be a non-empty 2-D grid, got shape {data.shape}")
        if data.dtype != np.bool_:
            if not np.isin(data, (0, 1)).all():
                raise ValueError("Mask cells must be 0 or 1")
            data = data.astype(np.bool_)
        else:
            data = data.copy()
        data.flags.writeable = False
        object.__setattr__(self, "data", data)

    @classmethod
    def zeros(cls, m: int, n: int) -> "BinaryMask":
        return cls(np.zeros((m, n), dtype=np.bool_))

    @property
    def height(self) -> int:
        return int(self.data.shape[0])

    @property
    def width(self) -> int:
        return int(self.data.shape[1])

    @property
    def shape(self):
        return self.data.shape

    def count(self) -> int:
        """Direct popcount; the integral image gives the same number in O(1)"""
        return int(np.count_nonzero(self.data))

    def union(self, other: "BinaryMask") -> "BinaryMask":
        if self.shape != other.shape:
            raise ValueError(f"Cannot union masks of shape {self.shape} and {other.shape}")
        return BinaryMask(self.data | other.data)

    def __eq__(self, other):
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.data, other.data))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class IntegralImage:
    """
    (m+1) x (n+1) prefix-sum table of a mask.

    table[i, j] is the number of mask pixels in rows < i and columns < j,
    so the first row and column are zero and table[m, n] is |M|.
    """
    table: np.ndarray

    def __post_init__(self):
        table = np.asarray(self.table)
        if table.ndim != 2 or table.shape[0] < 2 or table.shape[1] < 2:
            raise ValueError(f"Integral table must be at least 2x2, got shape {table.shape}")
        if not np.issubdtype(table.dtype, np.integer):
            raise ValueError(f"Integral table must hold integers, got {table.dtype}")
        table = table.astype(np.int64, copy=True)
        table.flags.writeable = False
        object.__setattr__(self, "table", table)

    @property
    def m(self) -> int:
        return int(self.table.shape[0] - 1)

    @property
    def n(self) -> int:
        return int(self.table.shape[1] - 1)

    __hash__ = None

"""离散网格函数数据模型"""

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from ..fields.models import Grid
from ..utils.exceptions import InvalidField


@dataclass(frozen=True)
class GridFunction:
    """节点上的复值函数"""
    values: np.ndarray
    grid: Grid

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=complex).reshape(-1)
        if values.shape != (self.grid.n_nodes,):
            raise InvalidField("u", f"期望 {self.grid.n_nodes} 个节点值，实际 {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InvalidField("u", "包含非有限值")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable[[np.ndarray], np.ndarray]) -> "GridFunction":
        """fn 接收坐标数组 (n_nodes, dim)"""
        return cls(np.asarray(fn(grid.coordinates()), dtype=complex), grid)

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls(np.zeros(grid.n_nodes, dtype=complex), grid)

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "GridFunction":
        return GridFunction(fn(self.values), self.grid)

    def __mul__(self, other: Union[complex, float, "GridFunction"]) -> "GridFunction":
        factor = other.values if isinstance(other, GridFunction) else other
        return GridFunction(self.values * factor, self.grid)

    __rmul__ = __mul__

    def __add__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(self.values + other.values, self.grid)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(self.values - other.values, self.grid)

    def conj(self) -> "GridFunction":
        return GridFunction(np.conj(self.values), self.grid)


@dataclass(frozen=True)
class DiscreteGradient:
    """节点梯度 (n_nodes, N)，对输入线性"""
    values: np.ndarray
    grid: Grid

    def component(self, k: int) -> np.ndarray:
        return self.values[:, k]

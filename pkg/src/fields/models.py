"""系数场数据模型"""

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from ..utils.exceptions import GridError, InvalidField

DEFAULT_MAX_NODES = 1_000_000


class BoundaryCondition(Enum):
    """边界条件 (整次运行统一)"""
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"

    @classmethod
    def parse(cls, value: Union[str, "BoundaryCondition"]) -> "BoundaryCondition":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise GridError(f"未知边界条件: {value}")


@dataclass(frozen=True)
class Grid:
    """一维/二维结构化网格 (轴对齐盒子)"""
    extent: Tuple[Tuple[float, float], ...]  # 每个方向的区间 [a_k, b_k]
    n: Tuple[int, ...]  # 每个方向的节点数
    bc: BoundaryCondition = BoundaryCondition.DIRICHLET
    max_nodes: int = field(default=DEFAULT_MAX_NODES, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "extent", tuple((float(a), float(b)) for a, b in self.extent))
        object.__setattr__(self, "n", tuple(int(k) for k in self.n))
        object.__setattr__(self, "bc", BoundaryCondition.parse(self.bc))
        if len(self.extent) != len(self.n) or self.dim not in (1, 2):
            raise GridError(f"只支持一维或二维网格: extent={self.extent}, n={self.n}")
        for (a, b), k in zip(self.extent, self.n):
            if k < 3:
                raise GridError(f"每个方向至少需要3个节点: n={k}")
            if not b > a:
                raise GridError(f"区间端点必须满足 a < b: [{a}, {b}]")
        if self.n_nodes > self.max_nodes:
            raise GridError(f"节点总数 {self.n_nodes} 超出上限 {self.max_nodes}")

    @classmethod
    def line(cls, a: float, b: float, n: int, bc: Union[str, BoundaryCondition] = "dirichlet") -> "Grid":
        return cls(extent=((a, b),), n=(n,), bc=BoundaryCondition.parse(bc))

    @classmethod
    def box(
        cls,
        x: Tuple[float, float],
        y: Tuple[float, float],
        n: Union[int, Tuple[int, int]],
        bc: Union[str, BoundaryCondition] = "dirichlet",
    ) -> "Grid":
        nx, ny = (n, n) if isinstance(n, int) else n
        return cls(extent=(tuple(x), tuple(y)), n=(nx, ny), bc=BoundaryCondition.parse(bc))  # type: ignore[arg-type]

    @property
    def dim(self) -> int:
        return len(self.n)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.n

    @property
    def n_nodes(self) -> int:
        return int(np.prod(self.n))

    @property
    def spacing(self) -> Tuple[float, ...]:
        return tuple((b - a) / (k - 1) for (a, b), k in zip(self.extent, self.n))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axes(self) -> Tuple[np.ndarray, ...]:
        return tuple(np.linspace(a, b, k) for (a, b), k in zip(self.extent, self.n))

    def coordinates(self) -> np.ndarray:
        """节点坐标 (n_nodes, dim)，按行主序 (x 下标在前)"""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        if self.dim == 1:
            mask[[0, -1]] = True
        else:
            mask[[0, -1], :] = True
            mask[:, [0, -1]] = True
        return mask.ravel()

    def with_bc(self, bc: Union[str, BoundaryCondition]) -> "Grid":
        return Grid(extent=self.extent, n=self.n, bc=BoundaryCondition.parse(bc), max_nodes=self.max_nodes)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dim": self.dim,
            "extent": [list(e) for e in self.extent],
            "n": list(self.n),
            "bc": self.bc.value,
        }


def _frozen(values: np.ndarray) -> np.ndarray:
    values.setflags(write=False)
    return values


def _check_finite(name: str, values: np.ndarray) -> None:
    if not np.all(np.isfinite(values)):
        bad = int(np.argwhere(~np.isfinite(values.reshape(values.shape[0], -1)))[0][0])
        raise InvalidField(name, f"节点 {bad} 处出现非有限值")


@dataclass(frozen=True)
class ScalarField:
    """每个节点一个复数"""
    values: np.ndarray
    grid: Grid
    name: str = "Q"

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=complex).reshape(-1)
        if values.shape != (self.grid.n_nodes,):
            raise InvalidField(self.name, f"期望 {self.grid.n_nodes} 个节点值，实际 {values.shape}")
        _check_finite(self.name, values)
        object.__setattr__(self, "values", _frozen(values))

    @classmethod
    def constant(cls, grid: Grid, value: complex, name: str = "Q") -> "ScalarField":
        return cls(np.full(grid.n_nodes, complex(value)), grid, name)

    @classmethod
    def zeros(cls, grid: Grid, name: str = "Q") -> "ScalarField":
        return cls.constant(grid, 0.0, name)


@dataclass(frozen=True)
class VectorField:
    """每个节点一个复 N 维向量"""
    values: np.ndarray
    grid: Grid
    name: str = "b"

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=complex)
        d = self.grid.dim
        if values.ndim == 1 and values.shape == (d,):
            values = np.broadcast_to(values, (self.grid.n_nodes, d)).copy()
        if values.shape != (self.grid.n_nodes, d):
            raise InvalidField(self.name, f"期望形状 {(self.grid.n_nodes, d)}，实际 {values.shape}")
        _check_finite(self.name, values)
        object.__setattr__(self, "values", _frozen(values))

    @classmethod
    def constant(cls, grid: Grid, value: Sequence[complex], name: str = "b") -> "VectorField":
        return cls(np.asarray(value, dtype=complex), grid, name)

    @classmethod
    def zeros(cls, grid: Grid, name: str = "b") -> "VectorField":
        return cls(np.zeros((grid.n_nodes, grid.dim), dtype=complex), grid, name)


@dataclass(frozen=True)
class MatrixField:
    """每个节点一个复 N×N 矩阵"""
    values: np.ndarray
    grid: Grid
    name: str = "A"

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=complex)
        d = self.grid.dim
        if values.shape == (d, d):
            values = np.broadcast_to(values, (self.grid.n_nodes, d, d)).copy()
        if values.shape != (self.grid.n_nodes, d, d):
            raise InvalidField(self.name, f"期望形状 {(self.grid.n_nodes, d, d)}，实际 {values.shape}")
        _check_finite(self.name, values)
        object.__setattr__(self, "values", _frozen(values))

    @classmethod
    def constant(cls, grid: Grid, value: Any, name: str = "A") -> "MatrixField":
        value = np.asarray(value, dtype=complex)
        if value.ndim == 0:
            value = value * np.eye(grid.dim)
        return cls(value, grid, name)

    @classmethod
    def identity(cls, grid: Grid) -> "MatrixField":
        return cls.constant(grid, 1.0)

    def conj_transpose(self) -> "MatrixField":
        return MatrixField(np.conj(np.swapaxes(self.values, 1, 2)), self.grid, self.name)


@dataclass(frozen=True)
class CoefficientSet:
    """算子 L = -div(A grad) + b1·grad + div(b2 ·) + Q 的全部系数"""
    A: MatrixField
    b1: VectorField
    b2: VectorField
    Q: ScalarField
    grid: Grid

    def __post_init__(self) -> None:
        for name in ("A", "b1", "b2", "Q"):
            if getattr(self, name).grid != self.grid:
                raise InvalidField(name, "系数场必须共享同一网格")

    @classmethod
    def build(
        cls,
        grid: Grid,
        A: Any = 1.0,
        b1: Any = None,
        b2: Any = None,
        Q: Any = None,
    ) -> "CoefficientSet":
        """常数或逐节点数组均可"""
        def as_matrix(value: Any) -> MatrixField:
            if isinstance(value, MatrixField):
                return value
            arr = np.asarray(value, dtype=complex)
            if arr.ndim <= 2:
                return MatrixField.constant(grid, arr)
            return MatrixField(arr, grid)

        def as_vector(value: Any, name: str) -> VectorField:
            if isinstance(value, VectorField):
                return value
            if value is None:
                return VectorField.zeros(grid, name)
            return VectorField(np.asarray(value, dtype=complex), grid, name)

        def as_scalar(value: Any) -> ScalarField:
            if isinstance(value, ScalarField):
                return value
            if value is None:
                return ScalarField.zeros(grid)
            arr = np.asarray(value, dtype=complex)
            if arr.ndim == 0:
                return ScalarField.constant(grid, complex(arr))
            return ScalarField(arr, grid)

        return cls(
            A=as_matrix(A),
            b1=as_vector(b1, "b1"),
            b2=as_vector(b2, "b2"),
            Q=as_scalar(Q),
            grid=grid,
        )

    def replace(self, **changes: Any) -> "CoefficientSet":
        data = {"A": self.A, "b1": self.b1, "b2": self.b2, "Q": self.Q}
        data.update(changes)
        return CoefficientSet.build(self.grid, **data)

    def adjoint(self) -> "CoefficientSet":
        """形式伴随的系数 (A*, -conj b2, -conj b1, conj Q)"""
        return CoefficientSet(
            A=self.A.conj_transpose(),
            b1=VectorField(-np.conj(self.b2.values), self.grid, "b1"),
            b2=VectorField(-np.conj(self.b1.values), self.grid, "b2"),
            Q=ScalarField(np.conj(self.Q.values), self.grid, "Q"),
            grid=self.grid,
        )


@dataclass(frozen=True)
class Decomposition:
    """A = A0s + A0a + i(A1s + A1a) 的实对称/反对称分量"""
    A0s: np.ndarray  # (n_nodes, N, N)
    A0a: np.ndarray
    A1s: np.ndarray
    A1a: np.ndarray
    grid: Grid

    def reassemble(self) -> MatrixField:
        return MatrixField(self.A0s + self.A0a + 1j * (self.A1s + self.A1a), self.grid)

    @cached_property
    def A0s_inv(self) -> np.ndarray:
        return np.linalg.inv(self.A0s)

"""结构化网格上的离散微积分

节点梯度 (grad) 用二阶中心差分; 能量形式使用 P1 有限元的单元梯度,
二维时每个网格单元沿对角线剖分为两个直角三角形。求积为梯形公式。
"""

from functools import lru_cache
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np
import scipy.sparse as sp
from loguru import logger

from .models import DiscreteGradient, GridFunction
from ..fields.models import BoundaryCondition, Grid
from ..utils.exceptions import BadExponent
from ..utils.serialization import rows_to_csv


def _centered_1d(n: int, h: float, bc: BoundaryCondition) -> sp.csr_matrix:
    """一维中心差分; Neumann 端点偶反射 (导数为 0)，Dirichlet 端点关于边界值奇反射"""
    rows: List[int] = []
    cols: List[int] = []
    vals: List[float] = []
    for k in range(1, n - 1):
        rows += [k, k]
        cols += [k + 1, k - 1]
        vals += [0.5 / h, -0.5 / h]
    if bc is BoundaryCondition.DIRICHLET:
        rows += [0, 0, n - 1, n - 1]
        cols += [1, 0, n - 1, n - 2]
        vals += [1.0 / h, -1.0 / h, 1.0 / h, -1.0 / h]
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def _trapezoid_1d(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[[0, -1]] = 0.5 * h
    return w


class Mesh:
    """网格上的离散算子集合 (节点梯度、单元梯度、单元均值、求积权重)"""

    def __init__(self, grid: Grid):
        self.grid = grid
        self.dim = grid.dim
        self.h = grid.spacing
        self.weights = self._build_weights()
        self.nodal_gradient = self._build_nodal_gradient()
        self.elements, self.areas, self.element_grad, self.element_avg = self._build_elements()
        self.free = ~grid.boundary_mask() if grid.bc is BoundaryCondition.DIRICHLET else np.ones(grid.n_nodes, dtype=bool)
        self.free_index = np.flatnonzero(self.free)

    @classmethod
    def for_grid(cls, grid: Grid) -> "Mesh":
        return _cached_mesh(grid)

    def _build_weights(self) -> np.ndarray:
        w = _trapezoid_1d(self.grid.n[0], self.h[0])
        for k in range(1, self.dim):
            w = np.kron(w, _trapezoid_1d(self.grid.n[k], self.h[k]))
        return w

    def _build_nodal_gradient(self) -> Tuple[sp.csr_matrix, ...]:
        d1 = [_centered_1d(n, h, self.grid.bc) for n, h in zip(self.grid.n, self.h)]
        if self.dim == 1:
            return (d1[0],)
        nx, ny = self.grid.n
        return (
            sp.kron(d1[0], sp.identity(ny), format="csr"),
            sp.kron(sp.identity(nx), d1[1], format="csr"),
        )

    def _build_elements(self) -> Tuple[np.ndarray, np.ndarray, Tuple[sp.csr_matrix, ...], sp.csr_matrix]:
        n_nodes = self.grid.n_nodes
        if self.dim == 1:
            n = self.grid.n[0]
            h = self.h[0]
            k = np.arange(n - 1)
            elements = np.stack([k, k + 1], axis=1)
            rows = np.repeat(k, 2)
            gx = sp.csr_matrix(
                (np.tile([-1.0 / h, 1.0 / h], n - 1), (rows, elements.ravel())), shape=(n - 1, n_nodes)
            )
            avg = sp.csr_matrix((np.full(2 * (n - 1), 0.5), (rows, elements.ravel())), shape=(n - 1, n_nodes))
            return elements, np.full(n - 1, h), (gx,), avg

        nx, ny = self.grid.n
        hx, hy = self.h
        i, j = np.meshgrid(np.arange(nx - 1), np.arange(ny - 1), indexing="ij")
        i, j = i.ravel(), j.ravel()
        a = i * ny + j
        b = (i + 1) * ny + j
        c = (i + 1) * ny + (j + 1)
        d = i * ny + (j + 1)
        n_cells = a.size
        # T1 = (a, b, c), T2 = (a, c, d)
        elements = np.concatenate([np.stack([a, b, c], axis=1), np.stack([a, c, d], axis=1)])
        e1 = np.arange(n_cells)
        e2 = e1 + n_cells
        n_el = 2 * n_cells

        def op(entries: List[Tuple[np.ndarray, np.ndarray, float]]) -> sp.csr_matrix:
            rows = np.concatenate([r for r, _, _ in entries])
            cols = np.concatenate([c_ for _, c_, _ in entries])
            vals = np.concatenate([np.full(r.size, v) for r, _, v in entries])
            return sp.csr_matrix((vals, (rows, cols)), shape=(n_el, n_nodes))

        gx = op([(e1, b, 1 / hx), (e1, a, -1 / hx), (e2, c, 1 / hx), (e2, d, -1 / hx)])
        gy = op([(e1, c, 1 / hy), (e1, b, -1 / hy), (e2, d, 1 / hy), (e2, a, -1 / hy)])
        avg = op([(np.arange(n_el), elements[:, m], 1.0 / 3.0) for m in range(3)])
        return elements, np.full(n_el, 0.5 * hx * hy), (gx, gy), avg

    # 节点量

    def grad(self, u: Union[GridFunction, np.ndarray]) -> DiscreteGradient:
        """节点中心差分梯度 (内部二阶精度)"""
        values = u.values if isinstance(u, GridFunction) else np.asarray(u)
        return DiscreteGradient(np.stack([D @ values for D in self.nodal_gradient], axis=-1), self.grid)

    def integrate(self, values: np.ndarray) -> complex:
        return complex(np.dot(self.weights, values))

    def lp_norm(self, u: Union[GridFunction, np.ndarray], p: float) -> float:
        """梯形求积的 L^p 范数; p = inf 时为最大模"""
        values = np.abs(u.values if isinstance(u, GridFunction) else np.asarray(u))
        if p < 1:
            raise BadExponent(p, "[1, ∞]")
        if np.isinf(p):
            return float(np.max(values))
        return float(np.dot(self.weights, values ** p) ** (1.0 / p))

    def inner(self, u: Union[GridFunction, np.ndarray], v: Union[GridFunction, np.ndarray]) -> complex:
        """(u, v) = ∫ u conj(v)"""
        uv = u.values if isinstance(u, GridFunction) else np.asarray(u)
        vv = v.values if isinstance(v, GridFunction) else np.asarray(v)
        return complex(np.dot(self.weights, uv * np.conj(vv)))

    # 单元量

    def element_gradient(self, values: np.ndarray) -> np.ndarray:
        """P1 单元梯度 (n_el, N)"""
        return np.stack([G @ values for G in self.element_grad], axis=-1)

    def element_mean(self, values: np.ndarray) -> np.ndarray:
        """顶点平均; 支持尾部附加维度"""
        values = np.asarray(values)
        if values.ndim == 1:
            return self.element_avg @ values
        flat = values.reshape(values.shape[0], -1)
        return (self.element_avg @ flat).reshape((-1,) + values.shape[1:])

    def element_integral(self, values: np.ndarray) -> complex:
        return complex(np.dot(self.areas, values))

    # 边界条件

    def restrict(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values)[self.free_index]

    def extend(self, dof_values: np.ndarray) -> np.ndarray:
        """自由度 -> 全节点 (Dirichlet 边界补 0)"""
        out = np.zeros(self.grid.n_nodes, dtype=complex)
        out[self.free_index] = dof_values
        return out

    def apply_bc(self, values: np.ndarray) -> np.ndarray:
        return self.extend(self.restrict(values))

    def dof_weights(self) -> np.ndarray:
        return self.weights[self.free_index]

    def to_csv(self, u: Union[GridFunction, np.ndarray], path: Union[str, Path, None] = None) -> str:
        """导出 (坐标, re, im)"""
        values = u.values if isinstance(u, GridFunction) else np.asarray(u, dtype=complex)
        coords = self.grid.coordinates()
        names = ["x", "y"][: self.dim]
        rows = []
        for k in range(self.grid.n_nodes):
            row = {name: float(coords[k, m]) for m, name in enumerate(names)}
            row.update(re=float(values[k].real), im=float(values[k].imag))
            rows.append(row)
        logger.debug(f"导出网格函数: {self.grid.n_nodes} 个节点")
        return rows_to_csv(rows, names + ["re", "im"], path)


@lru_cache(maxsize=32)
def _cached_mesh(grid: Grid) -> Mesh:
    return Mesh(grid)

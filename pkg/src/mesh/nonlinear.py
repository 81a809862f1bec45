"""逐节点非线性映射 |u|, sgn u, η(u), v_p(u), w_p(u)"""

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from loguru import logger

from .calculus import Mesh
from .models import GridFunction
from ..utils.exceptions import BadExponent

DEFAULT_FLOOR = 1e-30
FLOOR_WARN_FRACTION = 1e-3


@dataclass(frozen=True)
class SignumMaps:
    absu: np.ndarray  # |u|
    sgnu: np.ndarray  # u/|u|，|u| ≤ floor 处为 0
    eta: np.ndarray  # Im(conj(sgn u)·grad u)，形状 (n_nodes, N)
    v_p: np.ndarray  # u|u|^{p/2-1}
    w_p: np.ndarray  # u|u|^{p-2}
    floored_fraction: float

    @property
    def flagged(self) -> bool:
        return self.floored_fraction > FLOOR_WARN_FRACTION


def sign(values: np.ndarray, floor: float = DEFAULT_FLOOR) -> np.ndarray:
    absu = np.abs(values)
    out = np.zeros_like(values, dtype=complex)
    mask = absu > floor
    out[mask] = values[mask] / absu[mask]
    return out


def power_maps(values: np.ndarray, p: float, floor: float = DEFAULT_FLOOR) -> tuple:
    """(v_p, w_p)，负幂中用 max(|u|, floor)"""
    if not p > 1:
        raise BadExponent(p)
    r = np.maximum(np.abs(values), floor)
    return values * r ** (0.5 * p - 1.0), values * r ** (p - 2.0)


def signum_maps(
    u: Union[GridFunction, np.ndarray],
    p: float,
    floor: float = DEFAULT_FLOOR,
    mesh: Optional[Mesh] = None,
) -> SignumMaps:
    """计算全部辅助非线性映射

    Args:
        u: 网格函数
        p: 指数，要求 p ∈ (1, ∞)
        floor: 正则化阈值
        mesh: 已构建的网格算子 (省略时按 u.grid 取缓存)

    Raises:
        BadExponent: p ≤ 1 或 p = ∞
    """
    if not (p > 1 and np.isfinite(p)):
        raise BadExponent(p)
    if isinstance(u, GridFunction):
        mesh = mesh or Mesh.for_grid(u.grid)
        values = u.values
    else:
        if mesh is None:
            raise ValueError("传入裸数组时必须提供 mesh")
        values = np.asarray(u, dtype=complex)

    absu = np.abs(values)
    sgnu = sign(values, floor)
    grad = mesh.grad(values).values
    eta = np.imag(np.conj(sgnu)[:, None] * grad)
    v_p, w_p = power_maps(values, p, floor)

    floored = float(np.mean(absu <= floor))
    if floored > FLOOR_WARN_FRACTION:
        logger.warning(f"{floored:.2%} 的节点 |u| 低于阈值 {floor:g}，η 与 sgn 在这些节点取 0")
    return SignumMaps(absu=absu, sgnu=sgnu, eta=eta, v_p=v_p, w_p=w_p, floored_fraction=floored)

"""矩阵场的实/虚、对称/反对称分解与椭圆性检查"""

from typing import Tuple, Union

import numpy as np
from loguru import logger

from .models import CoefficientSet, Decomposition, MatrixField
from ..utils.exceptions import InvalidField, NotElliptic

RECONSTRUCTION_TOL = 1e-14
EIG_TOL = 1e-12


def decompose(A: MatrixField, tol: float = RECONSTRUCTION_TOL) -> Decomposition:
    """逐节点拆分 A 的对称与反对称部分

    Args:
        A: 复矩阵场
        tol: 重构相对误差上限

    Returns:
        Decomposition: 四个实矩阵场
    """
    values = np.asarray(A.values)
    if not np.all(np.isfinite(values)):
        raise InvalidField(A.name, "包含非有限值")

    A0 = values.real
    A1 = values.imag
    A0t = np.swapaxes(A0, 1, 2)
    A1t = np.swapaxes(A1, 1, 2)
    dec = Decomposition(
        A0s=0.5 * (A0 + A0t),
        A0a=0.5 * (A0 - A0t),
        A1s=0.5 * (A1 + A1t),
        A1a=0.5 * (A1 - A1t),
        grid=A.grid,
    )

    scale = max(float(np.max(np.abs(values))), 1.0)
    error = float(np.max(np.abs(dec.reassemble().values - values)))
    if error > tol * scale:
        raise InvalidField(A.name, f"分解重构误差过大: {error:.3e}")
    return dec


def node_eigenvalues(S: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """对称矩阵堆的最小/最大特征值; 2×2 用闭式公式"""
    d = S.shape[-1]
    if d == 1:
        lam = S[:, 0, 0]
        return lam, lam
    if d == 2:
        a, b, c = S[:, 0, 0], S[:, 0, 1], S[:, 1, 1]
        mean = 0.5 * (a + c)
        radius = np.hypot(0.5 * (a - c), b)
        return mean - radius, mean + radius
    eig = np.linalg.eigvalsh(S)
    return eig[:, 0], eig[:, -1]


def validate_ellipticity(
    source: Union[CoefficientSet, Decomposition],
    tol: float = EIG_TOL,
) -> Tuple[float, float]:
    """返回 (c1, c2) = 各节点 A0s 极端特征值的最小/最大值

    Raises:
        NotElliptic: 某节点最小特征值 ≤ tol
    """
    dec = source if isinstance(source, Decomposition) else decompose(source.A)
    lam_min, lam_max = node_eigenvalues(dec.A0s)
    node = int(np.argmin(lam_min))
    if lam_min[node] <= tol:
        logger.warning(f"椭圆性检查失败: 节点 {node}, 特征值 {lam_min[node]:.3e}")
        raise NotElliptic(node, float(lam_min[node]))
    return float(lam_min[node]), float(np.max(lam_max))

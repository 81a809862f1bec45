"""从 JSON 文档构建 CoefficientSet

系数可以是 DSL 字符串、按分量的 DSL 字符串数组，或按行主序排列的节点数组
(复数写成 [re, im])。
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
from loguru import logger
from pydantic import BaseModel, ValidationError, field_validator

from .decomposition import validate_ellipticity
from .models import (
    DEFAULT_MAX_NODES,
    BoundaryCondition,
    CoefficientSet,
    Grid,
    MatrixField,
    ScalarField,
    VectorField,
)
from ..dsl.evaluator import Evaluator
from ..dsl.parser import parse_expr
from ..intervals.models import GrowthMode
from ..utils.exceptions import ConfigError, InvalidField
from ..utils.serialization import from_pairs, read_json


class GridSpec(BaseModel):
    extent: List[List[float]]
    n: List[int]
    dim: Optional[int] = None

    @field_validator("extent")
    @classmethod
    def extent_validation(cls, v: List[List[float]]) -> List[List[float]]:
        if any(len(pair) != 2 for pair in v):
            raise ValueError("extent 的每一项必须是 [a, b]")
        return v


class CoefficientDocument(BaseModel):
    grid: GridSpec
    bc: str = "dirichlet"
    A: Any = 1.0
    b1: Any = None
    b2: Any = None
    Q: Any = None
    constants: Dict[str, float] = {}
    mode: str = "closed"

    @field_validator("bc")
    @classmethod
    def bc_validation(cls, v: str) -> str:
        BoundaryCondition(v.lower())
        return v.lower()

    @field_validator("mode")
    @classmethod
    def mode_validation(cls, v: str) -> str:
        try:
            return GrowthMode.parse(v).value
        except ConfigError as e:
            raise ValueError(str(e)) from e


@dataclass
class LoadedProblem:
    """加载结果: 系数 + 声明的常数 + 增长界模式"""
    coefficients: CoefficientSet
    declared: Dict[str, float] = field(default_factory=dict)
    mode: str = "closed"
    source: Optional[str] = None


def _contains_str(value: Any) -> bool:
    if isinstance(value, str):
        return True
    if isinstance(value, (list, tuple)):
        return any(_contains_str(v) for v in value)
    return False


def _eval_entries(value: Any, evaluator: Evaluator) -> np.ndarray:
    """嵌套的 DSL 字符串/数字 -> 节点数组，分量轴放在最后"""
    if isinstance(value, str):
        return evaluator(parse_expr(value))
    if isinstance(value, (int, float)):
        return np.full(evaluator.n, complex(value))
    parts = [_eval_entries(v, evaluator) for v in value]
    return np.stack(parts, axis=-1 if parts[0].ndim == 1 else -2)


def _field_values(name: str, value: Any, grid: Grid, rank: int, evaluator: Evaluator) -> Optional[np.ndarray]:
    if value is None:
        return None
    if _contains_str(value) or isinstance(value, (int, float)):
        arr = _eval_entries(value, evaluator)
    else:
        arr = from_pairs(value)
    if rank == 2 and arr.ndim == 1:
        arr = arr[:, None, None] * np.eye(grid.dim)
    if rank == 1 and arr.ndim == 1 and arr.shape[0] == grid.dim and grid.n_nodes != grid.dim:
        arr = np.broadcast_to(arr, (grid.n_nodes, grid.dim))
    if rank == 0 and arr.ndim == 0:
        arr = np.full(grid.n_nodes, complex(arr))
    logger.debug(f"系数 {name} 形状 {arr.shape}")
    return arr


def load_coefficients(
    document: Union[Dict[str, Any], str, Path],
    max_nodes: int = DEFAULT_MAX_NODES,
    check_ellipticity: bool = True,
    min_nodes_per_axis: int = 3,
) -> LoadedProblem:
    """解析配置文档并构建系数集

    Args:
        document: JSON 字典或 JSON 文件路径
        max_nodes: 节点数上限
        min_nodes_per_axis: 每个方向的最少节点数
        check_ellipticity: 是否检查 A0s 正定

    Returns:
        LoadedProblem
    """
    source = None
    if isinstance(document, (str, Path)):
        source = str(document)
        try:
            document = read_json(document)
        except FileNotFoundError:
            raise ConfigError(f"系数文件不存在: {source}")
        except Exception as e:
            raise ConfigError(f"无法解析系数文件 {source}: {e}")

    try:
        doc = CoefficientDocument(**document)  # type: ignore[arg-type]
    except ValidationError as e:
        raise ConfigError(f"系数文档格式错误: {e}")

    if min(doc.grid.n, default=0) < min_nodes_per_axis:
        raise ConfigError(f"每个方向至少需要 {min_nodes_per_axis} 个节点: n={doc.grid.n}")
    grid = Grid(
        extent=tuple(tuple(e) for e in doc.grid.extent),  # type: ignore[arg-type]
        n=tuple(doc.grid.n),
        bc=BoundaryCondition(doc.bc),
        max_nodes=max_nodes,
    )
    if doc.grid.dim is not None and doc.grid.dim != grid.dim:
        raise ConfigError(f"grid.dim={doc.grid.dim} 与 extent/n 不一致")

    evaluator = Evaluator(grid.coordinates())
    try:
        A = _field_values("A", doc.A, grid, 2, evaluator)
        b1 = _field_values("b1", doc.b1, grid, 1, evaluator)
        b2 = _field_values("b2", doc.b2, grid, 1, evaluator)
        Q = _field_values("Q", doc.Q, grid, 0, evaluator)
        cs = CoefficientSet(
            A=MatrixField(A, grid, "A"),
            b1=VectorField(b1, grid, "b1") if b1 is not None else VectorField.zeros(grid, "b1"),
            b2=VectorField(b2, grid, "b2") if b2 is not None else VectorField.zeros(grid, "b2"),
            Q=ScalarField(Q, grid, "Q") if Q is not None else ScalarField.zeros(grid),
            grid=grid,
        )
    except (ValueError, IndexError) as e:
        raise InvalidField("coefficients", str(e))

    if check_ellipticity:
        c1, c2 = validate_ellipticity(cs)
        logger.info(f"系数加载完成: {grid.dim}维, {grid.n_nodes} 个节点, 椭圆常数 [{c1:.4g}, {c2:.4g}]")

    return LoadedProblem(coefficients=cs, declared=dict(doc.constants), mode=doc.mode, source=source)

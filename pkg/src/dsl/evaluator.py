"""在网格节点上向量化求值语法树"""

from typing import Callable, Dict, Union

import numpy as np

from .ast import Binary, Call, Expr, Imag, MatrixLit, Num, Unary, Var, VectorLit
from .parser import parse_expr

_UNARY: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "exp": np.exp,
    "sin": np.sin,
    "cos": np.cos,
    "sqrt": np.sqrt,
    "abs": lambda z: np.abs(z).astype(complex),
}


def _pick(a: np.ndarray, b: np.ndarray, smaller: bool) -> np.ndarray:
    """min/max 按实部比较"""
    take_a = a.real <= b.real if smaller else a.real >= b.real
    return np.where(take_a, a, b)


def coordinate_env(coords: np.ndarray) -> Dict[str, np.ndarray]:
    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    x = coords[:, 0].astype(complex)
    y = coords[:, 1].astype(complex) if coords.shape[1] > 1 else np.zeros_like(x)
    n = x.shape[0]
    return {
        "x": x,
        "y": y,
        "r2": x * x + y * y,
        "pi": np.full(n, np.pi, dtype=complex),
        "e": np.full(n, np.e, dtype=complex),
    }


class Evaluator:
    """对坐标数组 (n, dim) 求值

    标量表达式返回 (n,)，向量 (n, d)，矩阵 (n, d, d)。
    """

    def __init__(self, coords: np.ndarray):
        self.env = coordinate_env(coords)
        self.n = self.env["x"].shape[0]

    def __call__(self, node: Expr) -> np.ndarray:
        with np.errstate(all="ignore"):
            return self.eval(node)

    def eval(self, node: Expr) -> np.ndarray:
        if isinstance(node, Num):
            return np.full(self.n, complex(node.value))
        if isinstance(node, Imag):
            return np.full(self.n, complex(0.0, node.value))
        if isinstance(node, Var):
            return self.env[node.name]
        if isinstance(node, Unary):
            return -self.eval(node.operand)
        if isinstance(node, Binary):
            a, b = self.eval(node.left), self.eval(node.right)
            if node.op == "+":
                return a + b
            if node.op == "-":
                return a - b
            if node.op == "*":
                return a * b
            if node.op == "/":
                return a / b
            return np.power(a, b)
        if isinstance(node, Call):
            args = [self.eval(a) for a in node.args]
            if node.name in _UNARY:
                return _UNARY[node.name](args[0])
            result = args[0]
            for other in args[1:]:
                result = _pick(result, other, smaller=node.name == "min")
            return result
        if isinstance(node, VectorLit):
            return np.stack([self.eval(item) for item in node.items], axis=-1)
        if isinstance(node, MatrixLit):
            rows = [np.stack([self.eval(item) for item in row], axis=-1) for row in node.rows]
            return np.stack(rows, axis=-2)
        raise TypeError(f"未知节点类型: {type(node).__name__}")


def evaluate(expr: Union[str, Expr], coords: np.ndarray) -> np.ndarray:
    node = parse_expr(expr) if isinstance(expr, str) else expr
    return Evaluator(coords)(node)

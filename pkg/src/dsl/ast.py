"""系数表达式的语法树节点"""

from dataclasses import dataclass, field
from typing import Tuple, Union

VARIABLES = frozenset({"x", "y", "r2", "pi", "e"})
UNARY_FUNCTIONS = frozenset({"exp", "sin", "cos", "sqrt", "abs"})
VARIADIC_FUNCTIONS = frozenset({"min", "max"})
FUNCTIONS = UNARY_FUNCTIONS | VARIADIC_FUNCTIONS


@dataclass(frozen=True)
class Num:
    """实数字面量"""
    value: float
    pos: Tuple[int, int] = field(default=(1, 1), compare=False, repr=False)


@dataclass(frozen=True)
class Imag:
    """纯虚字面量 b·i ('i' 本身为 Imag(1.0))"""
    value: float
    pos: Tuple[int, int] = field(default=(1, 1), compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    name: str
    pos: Tuple[int, int] = field(default=(1, 1), compare=False, repr=False)


@dataclass(frozen=True)
class Unary:
    op: str  # 只有 '-'
    operand: "Expr"
    pos: Tuple[int, int] = field(default=(1, 1), compare=False, repr=False)


@dataclass(frozen=True)
class Binary:
    op: str  # + - * / ^
    left: "Expr"
    right: "Expr"
    pos: Tuple[int, int] = field(default=(1, 1), compare=False, repr=False)


@dataclass(frozen=True)
class Call:
    name: str
    args: Tuple["Expr", ...]
    pos: Tuple[int, int] = field(default=(1, 1), compare=False, repr=False)


@dataclass(frozen=True)
class VectorLit:
    items: Tuple["Expr", ...]
    pos: Tuple[int, int] = field(default=(1, 1), compare=False, repr=False)


@dataclass(frozen=True)
class MatrixLit:
    rows: Tuple[Tuple["Expr", ...], ...]
    pos: Tuple[int, int] = field(default=(1, 1), compare=False, repr=False)


Expr = Union[Num, Imag, Var, Unary, Binary, Call, VectorLit, MatrixLit]
Scalar = (Num, Imag, Var, Unary, Binary, Call)


def rank(node: Expr) -> int:
    """0 = 标量, 1 = 向量, 2 = 矩阵"""
    if isinstance(node, MatrixLit):
        return 2
    if isinstance(node, VectorLit):
        return 1
    return 0

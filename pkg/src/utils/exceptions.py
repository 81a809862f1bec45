"""自定义异常类"""

from typing import Any, Iterable, Optional


class SemigroupLabError(Exception):
    """基础异常类"""
    pass


class ConfigError(SemigroupLabError):
    """配置相关错误"""
    pass


class GridError(SemigroupLabError):
    """网格参数错误"""
    pass


class InvalidField(SemigroupLabError):
    """系数场包含非有限值或形状不匹配"""
    def __init__(self, field_name: str, message: str):
        self.field_name = field_name
        super().__init__(f"系数场 {field_name} 无效: {message}")


class NotElliptic(SemigroupLabError):
    """A0s 在某节点非正定"""
    def __init__(self, node: int, eigenvalue: float):
        self.node = node
        self.eigenvalue = eigenvalue
        super().__init__(f"节点 {node} 处 A0s 非正定 (最小特征值 {eigenvalue:.3e})")


class NotFormBounded(SemigroupLabError):
    """无法在探针族上找到有界的 (slope, offset) 对"""
    def __init__(self, quantity: str, offset: float):
        self.quantity = quantity
        self.offset = offset
        super().__init__(f"{quantity} 不是 h0-形式有界的 (所需偏移量 {offset:.3e} 超出上限)")


class BadExponent(SemigroupLabError):
    """指数 p 超出允许范围"""
    def __init__(self, p: float, allowed: str = "(1, ∞)"):
        self.p = p
        super().__init__(f"指数 p={p} 不在 {allowed} 内")


class ModeError(SemigroupLabError):
    """增长界模式不适用 (β′ = 0 且 α_s·B′ > 0)"""
    pass


class OutsideInterval(SemigroupLabError):
    """p 不在区间 I 的内部"""
    def __init__(self, p: float, eps: float):
        self.p = p
        self.eps = eps
        super().__init__(f"p={p} 不在区间 I 的内部 (ε_p = {eps:.3e})")


class BadWeight(SemigroupLabError):
    """权函数在某节点非正"""
    def __init__(self, node: int, value: float):
        self.node = node
        self.value = value
        super().__init__(f"权函数在节点 {node} 处非正: {value}")


class AssemblyError(SemigroupLabError):
    """离散算子组装失败"""
    pass


class HypothesisUnmet(SemigroupLabError):
    """探针上的前提不等式不成立"""
    def __init__(self, violation: float, probe: Optional[int] = None):
        self.violation = violation
        self.probe = probe
        super().__init__(f"前提不等式在探针 {probe} 上不成立 (违反量 {violation:.3e})")


class BadParameter(SemigroupLabError):
    """参数取值非法"""
    def __init__(self, name: str, value: Any, message: str = ""):
        self.name = name
        self.value = value
        detail = f": {message}" if message else ""
        super().__init__(f"参数 {name}={value!r} 非法{detail}")


class DslSyntaxError(SemigroupLabError):
    """系数表达式语法错误"""
    def __init__(self, line: int, col: int, expected: Iterable[str], found: str = ""):
        self.line = line
        self.col = col
        self.expected = sorted(set(expected))
        self.found = found
        super().__init__(
            f"语法错误 (行 {line}, 列 {col}): 期望 {', '.join(self.expected)}，实际为 {found!r}"
        )


class UnknownIdent(SemigroupLabError):
    """系数表达式中出现未知标识符"""
    def __init__(self, name: str, line: int = 1, col: int = 1):
        self.name = name
        self.line = line
        self.col = col
        super().__init__(f"未知标识符 {name!r} (行 {line}, 列 {col})")

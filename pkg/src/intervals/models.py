"""指数、增长界模式与区间报告"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from ..constants.models import StructuralConstants
from ..utils.exceptions import BadExponent, ConfigError


class GrowthMode(Enum):
    """closed: 闭式增长界，要求 β′ > 0 或 α_s·B′ = 0
    coercive: 由声明的 τ_p 强制性给出增长界，退化漂移用 omega_split
    """
    CLOSED = "closed"
    COERCIVE = "coercive"

    @classmethod
    def _missing_(cls, value: object) -> Optional["GrowthMode"]:
        aliases = {
            "thm1.3": cls.CLOSED,
            "thm1.5": cls.COERCIVE,
            "closed-form": cls.CLOSED,
            "declared": cls.COERCIVE,
        }
        return aliases.get(str(value).lower())

    @classmethod
    def parse(cls, value: Any) -> "GrowthMode":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ConfigError(f"未知增长界模式: {value} (可选 closed / coercive)")


@dataclass(frozen=True)
class Exponent:
    """以 s = 1/p ∈ [0, 1] 表示的指数，s = 0 即 p = ∞"""
    s: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.s <= 1.0:
            raise BadExponent(self.p if self.s > 0 else math.inf, "[1, ∞]")

    @classmethod
    def of(cls, p: float) -> "Exponent":
        if not p >= 1:
            raise BadExponent(p, "[1, ∞]")
        return cls(0.0 if math.isinf(p) else 1.0 / p)

    @property
    def p(self) -> float:
        return math.inf if self.s == 0 else 1.0 / self.s

    @property
    def dual(self) -> "Exponent":
        return Exponent(1.0 - self.s)


@dataclass(frozen=True)
class Interval:
    """闭区间 [lower, upper]; upper = inf 表示右端无界 (∞ 本身不属于 I)"""
    lower: float
    upper: float

    @property
    def empty(self) -> bool:
        return self.lower > self.upper

    def contains(self, p: float) -> bool:
        return not self.empty and self.lower <= p <= self.upper and not math.isinf(p)

    def interior(self, p: float) -> bool:
        return not self.empty and self.lower < p < self.upper

    def dual(self) -> "Interval":
        def conj(p: float) -> float:
            if math.isinf(p):
                return 1.0
            return math.inf if p == 1 else p / (p - 1.0)

        if self.empty:
            return self
        return Interval(conj(self.upper), conj(self.lower))

    def to_dict(self) -> Dict[str, Any]:
        if self.empty:
            return {"empty": True}
        return {"lower": self.lower, "upper": self.upper}

    @classmethod
    def empty_interval(cls) -> "Interval":
        return cls(math.inf, -math.inf)


@dataclass
class IntervalRow:
    p: float
    eps: float
    omega_hat: Optional[float]
    B_hat: float
    in_I: bool
    mu: Optional[float] = None
    omega: Optional[float] = None


@dataclass
class IntervalReport:
    """区间 I 与增长界的汇总"""
    constants: StructuralConstants
    interval: Interval
    interior_nonempty: bool
    mode: str
    rows: List[IntervalRow] = field(default_factory=list)
    extended: Optional[Tuple[float, float]] = None  # (p_min, p_max)，J 端点只给出括号
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "constants": self.constants.to_dict(),
            "I": self.interval.to_dict(),
            "interior_nonempty": self.interior_nonempty,
            "mode": self.mode,
            "table": [row.__dict__ for row in self.rows],
            "notes": list(self.notes),
        }
        if self.extended is not None:
            data["extended"] = {"p_min": self.extended[0], "p_max": self.extended[1], "status": "bracketed"}
        return data

"""算例结果数据模型"""

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

from ..semigroup.models import TruncationReport

EXPECTED = "EXPECTED"


@dataclass
class HardyThresholds:
    beta: float
    N: int
    p_minus: float
    p_plus: float
    p_max: float
    p_min: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class NeumannRow:
    lam: float
    closed_form: float
    quadrature: float
    discrete: float
    norm_p: float  # ‖u_λ‖_p
    interior_value: Optional[float] = None  # p = 4 处的泛函值
    interior_floor: Optional[float] = None  # -ω₄‖u_λ‖₄⁴


@dataclass
class NeumannReport:
    """Neumann 边界下 β′ = 0 的反例: 端点 p 处耗散泛函趋于负常数"""
    p: float
    interval: Dict[str, Any]
    limit: float
    rows: List[NeumannRow] = field(default_factory=list)
    quadrature_ok: bool = True
    discrete_ok: bool = True
    norm_decreasing: bool = True
    interior_ok: Optional[bool] = None

    @property
    def passed(self) -> bool:
        return self.quadrature_ok and self.discrete_ok and self.norm_decreasing and self.interior_ok is not False

    def to_dict(self) -> Dict[str, Any]:
        return {**asdict(self), "passed": self.passed}


@dataclass
class DivergenceFreeRow:
    c: float
    dirichlet_deviation: float
    neumann_deviation: float
    status: str
    neumann_status: str = EXPECTED


@dataclass
class DivergenceFreeReport:
    rows: List[DivergenceFreeRow] = field(default_factory=list)
    tol: float = 1e-10

    @property
    def max_deviation(self) -> float:
        return max((row.dirichlet_deviation for row in self.rows), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tol

    def to_dict(self) -> Dict[str, Any]:
        return {**asdict(self), "max_deviation": self.max_deviation, "passed": self.passed}


@dataclass
class HardySurrogateReport:
    """正则化 Hardy 势的二维替代算例，只作定性参考"""
    beta: float
    thresholds: HardyThresholds
    interval: Dict[str, Any]
    truncation: TruncationReport
    p: float
    label: str = "qualitative"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "beta": self.beta,
            "thresholds": self.thresholds.to_dict(),
            "interval": self.interval,
            "truncation": self.truncation.to_dict(),
            "p": self.p,
            "label": self.label,
        }


@dataclass
class TauSweepRow:
    p: float
    eps: float
    min_margin: float  # 按 h0(v) + ‖v‖² 归一
    worst_probe: int


@dataclass
class TauSweepReport:
    """Neumann 算例上 τ_p 下界的探针扫描"""
    constants: Dict[str, Any]
    mode: str
    n_probes: int
    tol: float
    rows: List[TauSweepRow] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(row.min_margin >= -self.tol for row in self.rows)

    def to_dict(self) -> Dict[str, Any]:
        return {**asdict(self), "passed": self.passed}

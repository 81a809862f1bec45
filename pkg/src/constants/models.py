"""结构常数数据模型"""

import math
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from typing import Any, Dict, Optional

from ..utils.exceptions import BadParameter


class Provenance(Enum):
    MEASURED = "measured"
    DECLARED = "declared"
    DERIVED = "derived"  # 由其它常数合成，例如 β′, B′


CONSTANT_NAMES = (
    "alpha_s",
    "alpha_a",
    "M",
    "beta_prime",
    "B_prime",
    "beta1",
    "B1",
    "beta2",
    "B2",
    "gamma",
    "Gamma",
    "beta_hat",
    "B_hat",
    "c_hat",
    "c3",
    "c4",
)


@dataclass(frozen=True)
class StructuralConstants:
    """区间公式所需的全部标量常数，均 ≥ 0"""
    alpha_s: float = 0.0
    alpha_a: float = 0.0
    M: float = 0.0
    beta_prime: float = 0.0
    B_prime: float = 0.0
    beta1: float = 0.0
    B1: float = 0.0
    beta2: float = 0.0
    B2: float = 0.0
    gamma: float = 0.0
    Gamma: float = 0.0
    beta_hat: float = 0.0
    B_hat: float = 0.0
    c_hat: float = 0.0
    c3: float = 0.0
    c4: float = 0.0
    provenance: Dict[str, str] = field(default_factory=dict, compare=False)
    grid: Optional[Dict[str, Any]] = field(default=None, compare=False)  # 测量所用网格

    def __post_init__(self) -> None:
        for name in CONSTANT_NAMES:
            value = float(getattr(self, name))
            if not value >= 0:
                raise BadParameter(name, value, "结构常数必须非负")
            object.__setattr__(self, name, value)
        prov = {name: Provenance.DECLARED.value for name in CONSTANT_NAMES}
        prov.update({k: Provenance(v).value for k, v in self.provenance.items()})
        object.__setattr__(self, "provenance", prov)

    @classmethod
    def declared(cls, **values: float) -> "StructuralConstants":
        """解析例子中直接给出的常数"""
        unknown = set(values) - set(CONSTANT_NAMES)
        if unknown:
            raise BadParameter("constants", sorted(unknown), "未知常数名")
        return cls(**values)  # type: ignore[arg-type]

    def with_values(self, provenance: str, **values: float) -> "StructuralConstants":
        prov = dict(self.provenance)
        prov.update({k: provenance for k in values})
        return replace(self, provenance=prov, **values)

    def dual(self) -> "StructuralConstants":
        """交换 (β1, B1) 与 (β2, B2)，对应伴随算子"""
        prov = dict(self.provenance)
        prov["beta1"], prov["beta2"] = prov["beta2"], prov["beta1"]
        prov["B1"], prov["B2"] = prov["B2"], prov["B1"]
        return replace(self, beta1=self.beta2, beta2=self.beta1, B1=self.B2, B2=self.B1, provenance=prov)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {name: getattr(self, name) for name in CONSTANT_NAMES}
        data["provenance"] = dict(self.provenance)
        if self.grid is not None:
            data["grid"] = self.grid
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "StructuralConstants":
        known = {f.name for f in fields(cls)}
        kwargs = {k: v for k, v in data.items() if k in known}
        return cls(**kwargs)


def C_p(constants: StructuralConstants, p: float) -> float:
    """C_p = 2(M² + (1-2/p)² + ĉ) + α_s²，p = inf 按 1/p = 0 处理"""
    g = 1.0 if math.isinf(p) else 1.0 - 2.0 / p
    return 2.0 * (constants.M ** 2 + g * g + constants.c_hat) + constants.alpha_s ** 2

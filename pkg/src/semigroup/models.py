"""离散算子与审计报告数据模型"""

from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import scipy.sparse as sp

from ..fields.models import Grid
from ..utils.serialization import rows_to_csv

PASS = "PASS"
BREACH = "BREACH"
NO_GUARANTEE = "EXPECT-NO-GUARANTEE"
NO_BOUND = "NO-BOUND"
NOT_LOG_CONVEX = "NOT-LOG-CONVEX"


@dataclass(frozen=True)
class DiscreteOperator:
    """弱形式组装的 L_h: ⟨L_h u, v⟩_h = t(u, v)，只作用在自由度上"""
    K: sp.csr_matrix  # 全节点刚度矩阵，t(u, v) = conj(v)ᵀ K u
    weights: np.ndarray  # 全节点求积权重
    free_index: np.ndarray
    grid: Grid

    @property
    def dof(self) -> int:
        return int(self.free_index.size)

    @property
    def bc(self) -> str:
        return self.grid.bc.value

    @property
    def dof_weights(self) -> np.ndarray:
        return self.weights[self.free_index]

    @property
    def K_free(self) -> sp.csr_matrix:
        idx = self.free_index
        return self.K[idx][:, idx].tocsr()

    @property
    def matrix(self) -> sp.csr_matrix:
        """L_h = M⁻¹ K (自由度块)"""
        return (sp.diags(1.0 / self.dof_weights) @ self.K_free).tocsr()

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def restrict(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values, dtype=complex)[self.free_index]

    def extend(self, dof_values: np.ndarray) -> np.ndarray:
        out = np.zeros(self.grid.n_nodes, dtype=complex)
        out[self.free_index] = dof_values
        return out

    def apply(self, u: np.ndarray) -> np.ndarray:
        return self.matrix @ u

    def pairing(self, u: np.ndarray, v: np.ndarray) -> complex:
        """⟨L_h u, v⟩_h，u, v 为自由度向量"""
        return complex(np.vdot(v, self.K_free @ u))

    def adjoint(self) -> "DiscreteOperator":
        """加权内积下的伴随 M⁻¹Kᴴ"""
        return DiscreteOperator(self.K.conj().T.tocsr(), self.weights, self.free_index, self.grid)


@dataclass
class TrajectoryRow:
    p: float
    t: float
    measured: float
    bound: Optional[float]
    margin: Optional[float]
    method: str
    status: str
    spread: float = 0.0


@dataclass
class TrajectoryReport:
    """‖S_p(t)‖_{p→p} 的实测下界与理论界"""
    rows: List[TrajectoryRow] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(row.status != BREACH for row in self.rows)

    @property
    def breaches(self) -> List[TrajectoryRow]:
        return [row for row in self.rows if row.status == BREACH]

    def times(self, p: float) -> List[float]:
        return [row.t for row in self.rows if row.p == p]

    def to_dict(self) -> Dict[str, Any]:
        return {"rows": [asdict(row) for row in self.rows], "metadata": self.metadata, "passed": self.passed}

    def to_csv(self, path: Union[str, Path, None] = None) -> str:
        columns = ["p", "t", "measured", "bound", "margin", "method", "status"]
        return rows_to_csv([asdict(row) for row in self.rows], columns, path)


@dataclass
class NormEstimate:
    """范数下界及多次重启的离散程度"""
    value: float
    spread: float = 0.0
    restarts: int = 0
    iterations: int = 0
    exact: bool = False


@dataclass
class DissipativityResult:
    value: float  # Re⟨(ω + L_h)u, w_p(u)⟩_h
    re_pairing: float  # Re⟨L_h u, w_p(u)⟩_h
    lower_eps_p: Optional[float] = None  # ε_p h0(|v_p|) - ω̂_p‖v_p‖²
    lower_eps: Optional[float] = None  # ε h0(v_p) - (ω̂_p + ε/(1-ε)B̂_p)‖v_p‖²
    norm_p: float = 0.0  # ‖u‖_p

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class ResolventRow:
    lam: float
    measured: float
    bound: float
    margin: float
    status: str


@dataclass
class WeightedGrowthReport:
    mu: float
    omega: float
    rows: List[Dict[str, float]] = field(default_factory=list)
    ceiling_ok: Optional[bool] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class SmoothingReport:
    exponent: float  # 拟合的 θ: ‖S(t)‖_{p→r} ≈ C t^{-θ}
    constant: float
    rows: List[Dict[str, float]] = field(default_factory=list)
    passed: bool = True

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class TruncationReport:
    m_values: List[float]
    gaps: List[float]  # 相邻 m 之间的 sup_t ‖S_m f - S_m′ f‖_p
    tol: float
    label: str = "bracketed"

    @property
    def monotone(self) -> bool:
        return all(b <= a * (1.0 + 1e-9) + 1e-15 for a, b in zip(self.gaps, self.gaps[1:]))

    @property
    def converged(self) -> bool:
        return bool(self.gaps) and self.gaps[-1] <= self.tol

    @property
    def passed(self) -> bool:
        return self.monotone and self.converged

    def to_dict(self) -> Dict[str, Any]:
        return {**asdict(self), "monotone": self.monotone, "converged": self.converged}


@dataclass
class SectorialityResult:
    """(c0/μ)·Re⟨(L_h + ω + μ)u, w⟩ - |Im⟨L_h u, w⟩| 的最小值"""
    worst_slack: float
    max_ratio: float  # |Im| / Re⟨(L_h + ω + μ)u, w⟩ 的最大值
    n_probes: int

    @property
    def passed(self) -> bool:
        return self.worst_slack >= -1e-10

    def to_dict(self) -> Dict[str, Any]:
        return {**asdict(self), "passed": self.passed}

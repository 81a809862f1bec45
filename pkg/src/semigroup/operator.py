"""离散算子组装与时间推进"""

import math
from typing import Optional

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spsla
from loguru import logger

from .models import DiscreteOperator
from ..forms.context import FormContext
from ..utils.config import PropagatorConfig
from ..utils.exceptions import AssemblyError, BadParameter

SCHEMES = ("crank_nicolson", "implicit_euler")


def assemble(ctx: FormContext) -> DiscreteOperator:
    """t(u, v) = conj(v)ᵀ K u 的刚度矩阵

    K = Σ G_jᵀ diag(|e| A_jk) G_k + Σ Pᵀ diag(|e| b1_k) G_k - Σ G_kᵀ diag(|e| b2_k) P + diag(w Q)
    """
    mesh = ctx.mesh
    G = mesh.element_grad
    P = mesh.element_avg
    area = mesh.areas
    d = ctx.grid.dim

    K = sp.diags(mesh.weights * ctx.cs.Q.values).astype(complex)
    for j in range(d):
        for k in range(d):
            K = K + G[j].T @ sp.diags(area * ctx.A_e[:, j, k]) @ G[k]
    for k in range(d):
        K = K + P.T @ sp.diags(area * ctx.b1_e[:, k]) @ G[k]
        K = K - G[k].T @ sp.diags(area * ctx.b2_e[:, k]) @ P

    if mesh.free_index.size == 0:
        raise AssemblyError("没有自由度")
    if np.any(mesh.weights[mesh.free_index] <= 0):
        raise AssemblyError("质量矩阵奇异")
    op = DiscreteOperator(K=K.tocsr(), weights=mesh.weights, free_index=mesh.free_index, grid=ctx.grid)
    logger.debug(f"组装完成: {op.dof} 个自由度, nnz={op.K.nnz}")
    return op


class Stepper:
    """固定步长的隐式推进器，系统矩阵只分解一次"""

    def __init__(self, op: DiscreteOperator, dt: float, scheme: str = "crank_nicolson"):
        if not dt > 0:
            raise BadParameter("dt", dt, "时间步长必须为正")
        if scheme not in SCHEMES:
            raise BadParameter("scheme", scheme, f"可选 {', '.join(SCHEMES)}")
        self.dt = dt
        self.scheme = scheme
        self.L = op.matrix.astype(complex)
        eye = sp.identity(op.dof, dtype=complex, format="csc")
        theta = 0.5 if scheme == "crank_nicolson" else 1.0
        self.explicit = (eye - (1.0 - theta) * dt * self.L).tocsr() if theta < 1 else None
        # 奇异时抛出 RuntimeError，统一转为 LinAlgError
        try:
            self.lu = spsla.splu((eye + theta * dt * self.L).tocsc())
        except RuntimeError as e:
            raise np.linalg.LinAlgError(f"隐式系统分解失败: {e}")

    def step(self, u: np.ndarray) -> np.ndarray:
        rhs = self.explicit @ u if self.explicit is not None else u
        return self.lu.solve(np.asarray(rhs, dtype=complex))

    def step_adjoint(self, y: np.ndarray) -> np.ndarray:
        """单步矩阵的共轭转置作用"""
        x = self.lu.solve(np.asarray(y, dtype=complex), trans="H")
        if self.explicit is not None:
            x = self.explicit.conj().T @ x
        return x


def step(op: DiscreteOperator, u: np.ndarray, dt: float, scheme: str = "crank_nicolson") -> np.ndarray:
    """u_next ≈ e^{-dt L_h} u"""
    return Stepper(op, dt, scheme).step(u)


class Propagator:
    """S(t) = e^{-t L_h} 的作用 (稠密矩阵或重复隐式步)"""

    def __init__(
        self,
        op: DiscreteOperator,
        t: float,
        method: str,
        matrix: Optional[np.ndarray] = None,
        stepper: Optional[Stepper] = None,
        n_steps: int = 0,
    ):
        self.op = op
        self.t = t
        self.method = method
        self.matrix = matrix
        self.stepper = stepper
        self.n_steps = n_steps

    @property
    def shape(self) -> tuple:
        return (self.op.dof, self.op.dof)

    @property
    def dt(self) -> Optional[float]:
        return self.stepper.dt if self.stepper is not None else None

    def apply(self, x: np.ndarray) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix @ x
        assert self.stepper is not None
        y = np.asarray(x, dtype=complex)
        for _ in range(self.n_steps):
            y = self.stepper.step(y)
        return y

    def apply_adjoint(self, y: np.ndarray) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix.conj().T @ y
        assert self.stepper is not None
        x = np.asarray(y, dtype=complex)
        for _ in range(self.n_steps):
            x = self.stepper.step_adjoint(x)
        return x

    def to_dense(self) -> np.ndarray:
        if self.matrix is None:
            self.matrix = self.apply(np.eye(self.op.dof, dtype=complex))
        return self.matrix

    def describe(self) -> str:
        if self.stepper is None:
            return self.method
        return f"{self.method}(dt={self.stepper.dt:.3g}, steps={self.n_steps})"


def _stepped(op: DiscreteOperator, t: float, dt: float, scheme: str) -> Propagator:
    n_steps = max(1, math.ceil(t / dt - 1e-12))
    return Propagator(op, t, scheme, stepper=Stepper(op, t / n_steps, scheme), n_steps=n_steps)


def propagator(
    op: DiscreteOperator,
    t: float,
    method: Optional[str] = None,
    settings: Optional[PropagatorConfig] = None,
) -> Propagator:
    """构建时刻 t 的传播算子

    auto: 自由度 ≤ dense_cap 时用稠密 expm，否则 Crank–Nicolson 并逐次减半 dt，
    直到相邻两次结果在 scheme_tol 内一致。
    """
    settings = settings or PropagatorConfig()
    method = method or settings.method
    if not t >= 0:
        raise BadParameter("t", t, "时间必须非负")
    if t == 0:
        return Propagator(op, t, "identity", matrix=np.eye(op.dof, dtype=complex))
    if method == "auto":
        method = "expm" if op.dof <= settings.dense_cap else "crank_nicolson"
    if method == "expm":
        return Propagator(op, t, "expm", matrix=sla.expm(-t * op.to_dense()))
    if method not in SCHEMES:
        raise BadParameter("method", method, "可选 auto, expm, crank_nicolson, implicit_euler")

    # 以光滑正向量为探针估计时间离散误差
    probe = np.ones(op.dof, dtype=complex)
    dt = min(settings.dt, t)
    current = _stepped(op, t, dt, method)
    result = current.apply(probe)
    for _ in range(settings.max_halvings):
        finer = _stepped(op, t, dt / 2.0, method)
        refined = finer.apply(probe)
        error = float(np.linalg.norm(refined - result) / max(np.linalg.norm(refined), 1e-300))
        logger.debug(f"dt={dt / 2:.3g}: 相对变化 {error:.3e}")
        dt /= 2.0
        current, result = finer, refined
        if error <= settings.scheme_tol:
            break
    else:
        logger.warning(f"{settings.max_halvings} 次减半后时间离散误差仍高于 {settings.scheme_tol:g}")
    return current

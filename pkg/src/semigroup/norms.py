"""矩阵 p→q 算子范数的估计

1 与 ∞ 端点以及 q = ∞ 用精确的行/列和公式; p = q = 2 的稠密情形用奇异值;
其它情形用非线性幂迭代 x ← ψ_{p′}(Bᴴ ψ_q(Bx))，原问题与对偶问题
各自多次带种子重启并交叉播种，取最好值。
返回值总是某个具体向量的比值，因此是下界。
"""

from typing import Callable, Optional, Tuple, Union

import numpy as np
import scipy.linalg as sla
from loguru import logger

from .models import NormEstimate
from .operator import Propagator
from ..utils.config import PowerIterationConfig
from ..utils.exceptions import BadExponent

Operand = Union[np.ndarray, Propagator]


def dual_exponent(p: float) -> float:
    if np.isinf(p):
        return 1.0
    return np.inf if p == 1 else p / (p - 1.0)


def _pnorm(x: np.ndarray, p: float) -> float:
    a = np.abs(x)
    if np.isinf(p):
        return float(np.max(a))
    return float(np.sum(a ** p) ** (1.0 / p))


def _phase(y: np.ndarray) -> np.ndarray:
    a = np.abs(y)
    return np.where(a > 0, y / np.where(a > 0, a, 1.0), 0.0)


def _duality_map(y: np.ndarray, q: float) -> np.ndarray:
    """ψ_q(y) = |y|^{q-1} sgn(y) / ‖y‖_q^{q-1}，满足 ⟨y, ψ⟩ = ‖y‖_q 且 ‖ψ‖_{q′} = 1"""
    a = np.abs(y)
    norm = _pnorm(y, q)
    if norm == 0:
        return np.zeros_like(y)
    return _phase(y) * (a / norm) ** (q - 1.0)


def _actions(
    S: Operand,
    p: float,
    q: float,
    weights: Optional[np.ndarray],
) -> Tuple[Callable[[np.ndarray], np.ndarray], Callable[[np.ndarray], np.ndarray], int]:
    """B = W^{1/q} S W^{-1/p} 及其共轭转置"""
    n = S.shape[1]
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    left = np.ones(n) if np.isinf(q) else w ** (1.0 / q)
    right = np.ones(n) if np.isinf(p) else w ** (-1.0 / p)

    if isinstance(S, np.ndarray):
        def fwd(x: np.ndarray) -> np.ndarray:
            return left * (S @ (right * x))

        def adj(z: np.ndarray) -> np.ndarray:
            return right * (S.conj().T @ (left * z))
    else:
        def fwd(x: np.ndarray) -> np.ndarray:
            return left * S.apply(right * x)

        def adj(z: np.ndarray) -> np.ndarray:
            return right * S.apply_adjoint(left * z)

    return fwd, adj, n


def _dense(S: Operand) -> np.ndarray:
    return S if isinstance(S, np.ndarray) else S.to_dense()


def _weighted_dense(S: Operand, p: float, q: float, weights: Optional[np.ndarray]) -> np.ndarray:
    B = np.asarray(_dense(S), dtype=complex)
    if weights is None:
        return B
    w = np.asarray(weights, dtype=float)
    left = np.ones_like(w) if np.isinf(q) else w ** (1.0 / q)
    right = np.ones_like(w) if np.isinf(p) else w ** (-1.0 / p)
    return left[:, None] * B * right[None, :]


def opnorm_pq(
    S: Operand,
    p: float,
    q: float,
    weights: Optional[np.ndarray] = None,
    settings: Optional[PowerIterationConfig] = None,
    seed: int = 42,
) -> NormEstimate:
    """加权 ‖S‖_{L^p→L^q}，权重为求积权重 (省略时为普通 ℓ^p)"""
    if not (p >= 1 and q >= 1):
        raise BadExponent(min(p, q), "[1, ∞]")
    settings = settings or PowerIterationConfig()

    if np.isinf(q):
        # 每行在 ℓ^{p′} 中的范数
        B = np.abs(_weighted_dense(S, p, q, weights))
        if p == 1:
            return NormEstimate(value=float(np.max(B)), exact=True)
        r = dual_exponent(p)
        rows = np.max(B, axis=1) if np.isinf(r) else np.sum(B ** r, axis=1) ** (1.0 / r)
        return NormEstimate(value=float(np.max(rows)), exact=True)
    if p == 1 and q == 1:
        B = _weighted_dense(S, p, q, weights)
        return NormEstimate(value=float(np.max(np.sum(np.abs(B), axis=0))), exact=True)
    if np.isinf(p):
        # p = ∞ 时在加权稠密矩阵上迭代
        B = _weighted_dense(S, p, q, weights)
        return _power_iteration(B, p, q, None, settings, seed)
    if p == 2 and q == 2 and (isinstance(S, np.ndarray) or S.matrix is not None):
        B = _weighted_dense(S, p, q, weights)
        return NormEstimate(value=float(sla.svdvals(B)[0]), exact=True)
    return _power_iteration(S, p, q, weights, settings, seed)


def opnorm_p(
    S: Operand,
    p: float,
    weights: Optional[np.ndarray] = None,
    settings: Optional[PowerIterationConfig] = None,
    seed: int = 42,
) -> NormEstimate:
    """‖S‖_{p→p} 的下界; p = 1, ∞ 精确"""
    return opnorm_pq(S, p, p, weights, settings, seed)


Action = Callable[[np.ndarray], np.ndarray]


def _ascend(
    fwd: Action,
    adj: Action,
    p: float,
    q: float,
    x0: np.ndarray,
    settings: PowerIterationConfig,
) -> Tuple[float, np.ndarray, int]:
    """从 x0 出发的单次幂迭代，返回 (值, 最优向量, 迭代数)"""
    p_dual = dual_exponent(p)
    x = x0 / _pnorm(x0, p)
    best, best_x = _pnorm(fwd(x), q), x
    count = 0
    for _ in range(settings.max_iter):
        z = adj(_duality_map(fwd(x), q))
        if not np.any(z):
            break
        x_new = _phase(z) if np.isinf(p_dual) else _duality_map(z, p_dual)
        x_new = x_new / _pnorm(x_new, p)
        value = _pnorm(fwd(x_new), q)
        count += 1
        improved = value - best
        x = x_new
        if value > best:
            best, best_x = value, x_new
        if abs(improved) <= settings.tol * max(best, 1e-300):
            break
    return best, best_x, count


def _power_iteration(
    S: Operand,
    p: float,
    q: float,
    weights: Optional[np.ndarray],
    settings: PowerIterationConfig,
    seed: int,
) -> NormEstimate:
    """同时在 B: ℓ^p → ℓ^q 与 Bᴴ: ℓ^{q′} → ℓ^{p′} 上迭代

    两个问题的范数相等，起点取同一组向量，并用对方的最优向量交叉播种，
    因此 ‖S‖_{p→q} 与 ‖Sᴴ‖_{q′→p′} 的估计一致。
    """
    fwd, adj, n = _actions(S, p, q, weights)
    rng = np.random.default_rng(seed)
    starts = [np.ones(n, dtype=complex)]
    for _ in range(settings.restarts):
        starts.append(rng.standard_normal(n) + 1j * rng.standard_normal(n))

    p_dual, q_dual = dual_exponent(p), dual_exponent(q)
    # ψ_∞ 不是单值映射，端点只跑原问题
    with_dual = 1.0 < p < np.inf and 1.0 < q < np.inf

    values = []
    total_iter = 0
    best_primal, best_dual = (0.0, starts[0]), (0.0, starts[0])
    for x0 in starts:
        value, x, count = _ascend(fwd, adj, p, q, x0, settings)
        values.append(value)
        total_iter += count
        if value > best_primal[0]:
            best_primal = (value, x)
        if with_dual:
            value, y, count = _ascend(adj, fwd, q_dual, p_dual, x0, settings)
            values.append(value)
            total_iter += count
            if value > best_dual[0]:
                best_dual = (value, y)

    if with_dual:
        # 对偶问题的最优 y 经 ψ_{p′}(Bᴴy) 映回原问题，反之亦然
        from_dual = _duality_map(adj(best_dual[1]), p_dual)
        from_primal = _duality_map(fwd(best_primal[1]), q)
        for fw, ad, a, b, x0 in ((fwd, adj, p, q, from_dual), (adj, fwd, q_dual, p_dual, from_primal)):
            if np.any(x0):
                value, _, count = _ascend(fw, ad, a, b, x0, settings)
                values.append(value)
                total_iter += count

    estimate = NormEstimate(
        value=float(max(values)),
        spread=float(max(values) - min(values)),
        restarts=len(starts),
        iterations=total_iter,
    )
    logger.debug(
        f"幂迭代 p={p:g}, q={q:g}: {estimate.value:.10g} (重启 {estimate.restarts}, 离散度 {estimate.spread:.2e})"
    )
    return estimate

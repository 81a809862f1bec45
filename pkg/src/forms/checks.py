"""形式层面的恒等式与不等式检查"""

from dataclasses import asdict, dataclass
from typing import Any, Dict, Iterable, Tuple, Union

import numpy as np
from loguru import logger

from .context import FormContext
from .functionals import (
    U_hat,
    form_h0,
    form_t,
    l2_norm_sq,
    tau_p,
    tau_p_signed,
)
from ..constants.models import StructuralConstants
from ..intervals.formulas import B_hat_p, delta_p, eps_p, growth_rate, is_degenerate
from ..intervals.models import GrowthMode
from ..mesh.models import GridFunction
from ..mesh.nonlinear import DEFAULT_FLOOR, signum_maps
from ..utils.exceptions import ModeError

ArrayLike = Union[GridFunction, np.ndarray]


@dataclass
class AccretivityCheck:
    """Re t(u, w_p(u)) 与 τ_p(v_p(u)) 的比较"""
    p: float
    re_t: float
    im_t: float
    tau: float
    residual: float  # Re t(u, w) - τ_p(v)，应 ≥ -tol
    identity_residual: float  # 相对带符号恒等式的残差，O(h²)
    im_ratio: float  # |Im t(u, w)| / (h0 + 1)(v)
    floored_fraction: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class LowerBoundCheck:
    p: float
    eps: float
    tau: float
    lower: float
    margin: float
    mode: str

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class OmegaBracket:
    """ω̃_p 只给出区间 [lower, upper]"""
    p: float
    lower: float
    upper: float
    n_probes: int

    @property
    def consistent(self) -> bool:
        return self.lower <= self.upper + 1e-12

    def to_dict(self) -> Dict[str, Any]:
        return {**asdict(self), "status": "bracketed"}


def check_accretivity_identity(
    ctx: FormContext,
    u: ArrayLike,
    p: float,
    floor: float = DEFAULT_FLOOR,
) -> AccretivityCheck:
    """比较 Re t(u, w_p(u)) 与 τ_p(v_p(u))

    截断参数 r = ∞ (χ ≡ 0)。交叉项 (1-2/p)⟨A1s∇|v|, η⟩ 逐点非负时两者渐近相等，
    一般情形下带符号的版本才是恒等式，τ_p 的残差只需非负。
    """
    values = u.values if isinstance(u, GridFunction) else np.asarray(u, dtype=complex)
    maps = signum_maps(values, p, floor, ctx.mesh)
    t_uw = form_t(ctx, values, maps.w_p)
    tau = tau_p(ctx, maps.v_p, p, floor)
    signed = tau_p_signed(ctx, maps.v_p, p, floor)
    scale = form_h0(ctx, maps.v_p) + l2_norm_sq(ctx, maps.v_p)
    return AccretivityCheck(
        p=p,
        re_t=t_uw.real,
        im_t=t_uw.imag,
        tau=tau,
        residual=t_uw.real - tau,
        identity_residual=t_uw.real - signed,
        im_ratio=abs(t_uw.imag) / scale if scale > 0 else 0.0,
        floored_fraction=maps.floored_fraction,
    )


def tau_lower_bound_check(
    constants: StructuralConstants,
    ctx: FormContext,
    v: ArrayLike,
    p: float,
    eps: float = 0.0,
    mode: Union[str, GrowthMode] = GrowthMode.CLOSED,
) -> LowerBoundCheck:
    """margin = τ_p(v) - [(ε_p - ε - ε/(1-ε)·δ_p²)h0(|v|) + ε h0(v) - (ω + ε/(1-ε)·B̂_p)‖v‖²]

    β′ = 0 且 α_s·B′ > 0 时只有 coercive 模式下 ε = 0 可用，此时 ω 取 omega_split。
    """
    mode = GrowthMode.parse(mode)
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"eps 必须位于 [0, 1): {eps}")
    if is_degenerate(constants, p) and mode is GrowthMode.COERCIVE and eps > 0:
        raise ModeError("β′ = 0 且 α_s·B′ > 0 时 coercive 模式只支持 ε = 0")

    vv = v.values if isinstance(v, GridFunction) else np.asarray(v, dtype=complex)
    tau = tau_p(ctx, vv, p)
    omega = growth_rate(constants, p, mode)
    ratio = eps / (1.0 - eps)
    d = delta_p(constants, p)
    coeff = eps_p(constants, p) - eps - ratio * d * d
    lower = (
        coeff * form_h0(ctx, np.abs(vv))
        + eps * form_h0(ctx, vv)
        - (omega + ratio * B_hat_p(constants, p)) * l2_norm_sq(ctx, vv)
    )
    return LowerBoundCheck(p=p, eps=eps, tau=tau, lower=lower, margin=tau - lower, mode=mode.value)


def t_plus_Uhat_check(ctx: FormContext, v: ArrayLike, p: float) -> float:
    """Re t(v) - τ_p(v) + Ŭ(v)，应 ≥ -tol"""
    vv = v.values if isinstance(v, GridFunction) else np.asarray(v, dtype=complex)
    return form_t(ctx, vv, vv).real - tau_p(ctx, vv, p) + U_hat(ctx, vv)


def omega_tilde_bracket(
    ctx: FormContext,
    constants: StructuralConstants,
    p: float,
    probes: Iterable[np.ndarray],
    mode: Union[str, GrowthMode] = GrowthMode.CLOSED,
) -> OmegaBracket:
    """下界 max(-τ_p(v)/‖v‖²)，上界取增长界"""
    lower = -np.inf
    count = 0
    for v in probes:
        norm = l2_norm_sq(ctx, v)
        if norm <= 0:
            continue
        lower = max(lower, -tau_p(ctx, v, p) / norm)
        count += 1
    upper = growth_rate(constants, p, mode)
    bracket = OmegaBracket(p=p, lower=float(lower), upper=float(upper), n_probes=count)
    if not bracket.consistent:
        logger.warning(f"ω̃_{p:g} 括号不一致: 下界 {lower:.6g} > 上界 {upper:.6g}")
    return bracket


def parallelogram_defect(ctx: FormContext, w: ArrayLike, p: float, m: float) -> float:
    """u = w^{1+im}, v = w^{1-im} 时 τ_p(u+v) + τ_p(u-v) - 2τ_p(u) - 2τ_p(v)

    w 为正实函数; p = 2 时 τ_2 是二次型，亏量为 0。
    """
    ww = np.real(w.values if isinstance(w, GridFunction) else np.asarray(w))
    if np.any(ww <= 0):
        raise ValueError("w 必须逐点为正")
    phase = np.exp(1j * m * np.log(ww))
    u = ww * phase
    v = ww * np.conj(phase)
    return (
        tau_p(ctx, u + v, p)
        + tau_p(ctx, u - v, p)
        - 2.0 * tau_p(ctx, u, p)
        - 2.0 * tau_p(ctx, v, p)
    )


def adjoint_duality_gap(ctx: FormContext, v: ArrayLike, p: float) -> Tuple[float, float]:
    """(τ_p(v), τ*_{p′}(v))，两者应相等"""
    p_dual = 1.0 if np.isinf(p) else (np.inf if p == 1 else p / (p - 1.0))
    return tau_p(ctx, v, p), tau_p(ctx.adjoint(), v, p_dual)

"""离散形式 t, a, h0 与泛函 tau_p, Ŭ, W_rho

所有形式都用 P1 单元梯度与单元均值求积，势项用节点梯形权重。
"""

from typing import Union

import numpy as np

from .context import FormContext
from ..mesh.models import GridFunction
from ..mesh.nonlinear import DEFAULT_FLOOR, sign
from ..utils.exceptions import BadExponent, BadWeight

ArrayLike = Union[GridFunction, np.ndarray]


def _values(u: ArrayLike) -> np.ndarray:
    return np.asarray(u.values if isinstance(u, GridFunction) else u, dtype=complex)


def exponent_gap(p: float) -> float:
    """1 - 2/p，p = inf 时为 1"""
    if not p >= 1:
        raise BadExponent(p, "[1, ∞]")
    return 1.0 if np.isinf(p) else 1.0 - 2.0 / p


def form_t(ctx: FormContext, u: ArrayLike, v: ArrayLike) -> complex:
    """t(u, v) = (A∇u, ∇v) + (b1·∇u, v) - (u, conj(b2)·∇v) + (Qu, v)"""
    uu, vv = _values(u), _values(v)
    mesh = ctx.mesh
    gu = mesh.element_gradient(uu)
    gv_c = np.conj(mesh.element_gradient(vv))
    mu = mesh.element_mean(uu)
    mv_c = np.conj(mesh.element_mean(vv))

    principal = np.einsum("ej,ejk,ek->e", gv_c, ctx.A_e, gu)
    first = np.einsum("ek,ek->e", ctx.b1_e, gu) * mv_c
    second = mu * np.einsum("ek,ek->e", ctx.b2_e, gv_c)
    total = mesh.element_integral(principal + first - second)
    return total + mesh.integrate(ctx.cs.Q.values * uu * np.conj(vv))


def form_a(ctx: FormContext, u: ArrayLike) -> float:
    """a(u) = (A0s ∇u, ∇u)"""
    g = ctx.mesh.element_gradient(_values(u))
    density = np.einsum("ej,ejk,ek->e", np.conj(g), ctx.A0s_e, g).real
    return float(np.dot(ctx.mesh.areas, density))


def form_h0(ctx: FormContext, u: ArrayLike) -> float:
    """h0(u) = a(u) + (V⁺u, u)"""
    uu = _values(u)
    return form_a(ctx, uu) + float(np.dot(ctx.mesh.weights, ctx.V_plus * np.abs(uu) ** 2))


def eta_elements(ctx: FormContext, v: ArrayLike, floor: float = DEFAULT_FLOOR) -> np.ndarray:
    """单元上的 η(v) = Im(conj(sgn v)·∇v)，sgn 取单元均值的相位"""
    vv = _values(v)
    sigma = sign(ctx.mesh.element_mean(vv), floor)
    return np.imag(np.conj(sigma)[:, None] * ctx.mesh.element_gradient(vv))


def _tau_parts(ctx: FormContext, v: ArrayLike, floor: float) -> dict:
    vv = _values(v)
    mesh = ctx.mesh
    absv = np.abs(vv)
    g_abs = mesh.element_gradient(absv).real
    eta = eta_elements(ctx, vv, floor)
    cross = np.einsum("ej,ejk,ek->e", g_abs, ctx.A1s_e, eta)
    drift = mesh.element_mean(absv).real * np.einsum("ek,ek->e", ctx.re_drift_e, g_abs)
    return {
        "re_t": form_t(ctx, vv, vv).real,
        "a_abs": form_a(ctx, absv),
        "cross_abs": float(np.dot(mesh.areas, np.abs(cross))),
        "cross": float(np.dot(mesh.areas, cross)),
        "drift": float(np.dot(mesh.areas, drift)),
    }


def tau_p(ctx: FormContext, v: ArrayLike, p: float, floor: float = DEFAULT_FLOOR) -> float:
    """τ_p(v) = Re t(v) - γ²a(|v|) - 2|γ|∫|⟨A1s∇|v|, η⟩| - γ(|v|Re(b1+b2), ∇|v|)，γ = 1 - 2/p"""
    g = exponent_gap(p)
    parts = _tau_parts(ctx, v, floor)
    return parts["re_t"] - g * g * parts["a_abs"] - 2.0 * abs(g) * parts["cross_abs"] - g * parts["drift"]


def tau_p_signed(ctx: FormContext, v: ArrayLike, p: float, floor: float = DEFAULT_FLOOR) -> float:
    """τ_p 中交叉项不取绝对值的版本; 等于 Re t(u, w_p(u))，v = v_p(u)"""
    g = exponent_gap(p)
    parts = _tau_parts(ctx, v, floor)
    return parts["re_t"] - g * g * parts["a_abs"] - 2.0 * g * parts["cross"] - g * parts["drift"]


def U_hat_field(ctx: FormContext) -> np.ndarray:
    """Ŭ = ¼⟨A0s⁻¹ Re(b1+b2), Re(b1+b2)⟩ 的节点值"""
    r = (ctx.cs.b1.values + ctx.cs.b2.values).real
    return 0.25 * np.einsum("nj,njk,nk->n", r, ctx.dec.A0s_inv, r)


def U_hat(ctx: FormContext, v: ArrayLike) -> float:
    return float(np.dot(ctx.mesh.weights, U_hat_field(ctx) * np.abs(_values(v)) ** 2))


def W_rho_field(ctx: FormContext, rho: ArrayLike) -> np.ndarray:
    """W_ρ = ⟨A0s∇ρ, ∇ρ⟩/ρ²，用 ∇ρ/ρ = ∇log ρ 计算"""
    r = np.real(_values(rho))
    bad = np.flatnonzero(~(r > 0))
    if bad.size:
        raise BadWeight(int(bad[0]), float(r[bad[0]]))
    g = ctx.mesh.grad(np.log(r)).values.real
    return np.einsum("nj,njk,nk->n", g, ctx.dec.A0s, g)


def W_rho(ctx: FormContext, rho: ArrayLike, v: ArrayLike) -> float:
    return float(np.dot(ctx.mesh.weights, W_rho_field(ctx, rho) * np.abs(_values(v)) ** 2))


def l2_norm_sq(ctx: FormContext, v: ArrayLike) -> float:
    return float(np.dot(ctx.mesh.weights, np.abs(_values(v)) ** 2))

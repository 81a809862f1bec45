"""从系数集提取结构常数

逐点常数 (α_s, α_a, M, c3) 是 A0s-度量下的谱范数最大值; 形式界常数
(β_j, B_j, γ, Γ, β̂, B̂, ĉ, c4) 在探针族上测量，按安全系数放大。
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from .models import CONSTANT_NAMES, Provenance, StructuralConstants
from ..fields.decomposition import validate_ellipticity
from ..fields.models import Decomposition
from ..forms.context import FormContext
from ..forms.functionals import U_hat_field, eta_elements, form_h0, l2_norm_sq
from ..forms.probes import probe_family
from ..utils.config import Config, ProbesConfig
from ..utils.exceptions import BadParameter, NotFormBounded


def _metric_norms(dec: Decomposition, X: np.ndarray) -> np.ndarray:
    """逐节点 ‖L⁻¹ X L⁻ᵀ‖₂，L = chol(A0s)"""
    L = np.linalg.cholesky(dec.A0s)
    Y = np.linalg.solve(L, X)
    Z = np.swapaxes(np.linalg.solve(L, np.swapaxes(Y, 1, 2)), 1, 2)
    return np.linalg.norm(Z, ord=2, axis=(1, 2))


def alpha_s_of(dec: Decomposition) -> float:
    """|⟨A1s ξ, η⟩|² ≤ α_s²⟨A0s ξ, ξ⟩⟨A0s η, η⟩ 的最小 α_s"""
    validate_ellipticity(dec)
    return float(np.max(_metric_norms(dec, dec.A1s)))


def anti_bounds(dec: Decomposition) -> Tuple[float, float]:
    """(α_a, M): A1a 与 A0a 在 A0s-度量下的界"""
    validate_ellipticity(dec)
    if dec.grid.dim == 1:
        return 0.0, 0.0
    return float(np.max(_metric_norms(dec, dec.A1a))), float(np.max(_metric_norms(dec, dec.A0a)))


def c3_of(dec: Decomposition) -> float:
    """|⟨Aξ, η⟩| ≤ c3 ⟨A0s ξ, ξ⟩^½⟨A0s η, η⟩^½ (复向量)"""
    validate_ellipticity(dec)
    A = dec.A0s + dec.A0a + 1j * (dec.A1s + dec.A1a)
    return float(np.max(_metric_norms(dec, A)))


@dataclass
class FormBound:
    """q(u) ≤ slope·h0(u) + offset·‖u‖² 在探针族上成立"""
    quantity: str
    slope: float
    offset: float
    n_probes: int

    def as_pair(self) -> Tuple[float, float]:
        return self.slope, self.offset


def _offset_for(q: np.ndarray, H: np.ndarray, N: np.ndarray, slope: float) -> float:
    ok = N > 0
    if not np.any(ok):
        return 0.0
    return float(max(0.0, np.max((q[ok] - slope * H[ok]) / N[ok])))


def fit_form_bound(
    quantity: str,
    q: np.ndarray,
    H: np.ndarray,
    N: np.ndarray,
    settings: ProbesConfig,
) -> FormBound:
    """由探针上的 (q, h0, ‖·‖²) 拟合 (slope, offset)

    不做最小违背的直线拟合。先取零偏移所需的斜率 max q/h0;
    它超出 slope_budget 时斜率固定为预算值 (默认 0.25)，offset 取使
    q ≤ slope·h0 + offset·‖·‖² 在所有探针上成立的最小值。结果整体乘以安全系数。
    """
    q, H, N = (np.asarray(a, dtype=float) for a in (q, H, N))
    pos = H > 0
    slope0 = float(max(0.0, np.max(q[pos] / H[pos]))) if np.any(pos) else 0.0
    slope = slope0 if slope0 <= settings.slope_budget else settings.slope_budget
    offset = _offset_for(q, H, N, slope)
    if offset > settings.offset_cap:
        raise NotFormBounded(quantity, offset)
    bound = FormBound(quantity, settings.safety * slope, settings.safety * offset, int(q.size))
    logger.debug(f"{quantity}: slope={bound.slope:.6g}, offset={bound.offset:.6g} ({bound.n_probes} 个探针)")
    return bound


def hyperbola_pairs(bound_sq: float, betas: Sequence[float]) -> List[Tuple[float, float]]:
    """⟨A0s⁻¹b, b⟩ ≤ bound_sq 时 (β, B) = (β, bound_sq/(2β)) 均可行"""
    pairs = []
    for beta in betas:
        if beta <= 0:
            raise BadParameter("beta", beta, "双曲线参数化要求 β > 0")
        pairs.append((float(beta), bound_sq / (2.0 * beta)))
    return pairs


def _weighted(ctx: FormContext, potential: np.ndarray, u: np.ndarray) -> float:
    return float(np.dot(ctx.mesh.weights, potential * np.abs(u) ** 2))


def _metric_sq(ctx: FormContext, b: np.ndarray) -> np.ndarray:
    """⟨A0s⁻¹ b, b⟩，b 可为复向量"""
    return np.einsum("nj,njk,nk->n", np.conj(b), ctx.dec.A0s_inv, b).real


def drift_quantity(ctx: FormContext, u: np.ndarray, j: int) -> float:
    """(-1)^j ∫ (Re b_j) u·∇u，u ≥ 0"""
    b = (ctx.b1_e if j == 1 else ctx.b2_e).real
    mesh = ctx.mesh
    uu = np.real(u)
    density = mesh.element_mean(uu) * np.einsum("ek,ek->e", b, mesh.element_gradient(uu).real)
    return float((-1) ** j * np.dot(mesh.areas, density))


def drift_bounds(
    ctx: FormContext,
    settings: Optional[ProbesConfig] = None,
) -> Dict[str, FormBound]:
    """测量 β_j/B_j、γ/Γ、β̂²/B̂、ĉ 与 c4

    Returns:
        以常数名为键的 FormBound 字典: "beta1", "beta2", "gamma", "beta_hat", "c_hat", "c4"
    """
    settings = settings or ProbesConfig()
    grid = ctx.grid
    positive = probe_family(grid, settings.n_modes, settings.n_random, settings.seed, positive=True)
    general = probe_family(grid, settings.n_modes, settings.n_random, settings.seed)

    def stats(probes: List[np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
        return (
            np.array([form_h0(ctx, u) for u in probes]),
            np.array([l2_norm_sq(ctx, u) for u in probes]),
        )

    H_pos, N_pos = stats(positive)
    H_gen, N_gen = stats(general)
    bounds: Dict[str, FormBound] = {}

    for j in (1, 2):
        q = np.array([drift_quantity(ctx, u, j) for u in positive])
        bounds[f"beta{j}"] = fit_form_bound(f"β{j}", q, H_pos, N_pos, settings)

    q = np.array([_weighted(ctx, ctx.V_minus, u) for u in general])
    bounds["gamma"] = fit_form_bound("γ", q, H_gen, N_gen, settings)

    im_b = (ctx.cs.b1.values + ctx.cs.b2.values).imag
    q = np.array([_weighted(ctx, _metric_sq(ctx, im_b), u) for u in general])
    bounds["beta_hat"] = fit_form_bound("β̂²", q, H_gen, N_gen, settings)

    # ĉ 与 c4 是 (h0 + 1) 的倍数
    combined = H_gen + N_gen
    for name, potential in (
        ("c_hat", U_hat_field(ctx)),
        ("c4", _metric_sq(ctx, ctx.cs.b1.values) + _metric_sq(ctx, ctx.cs.b2.values) + np.abs(ctx.cs.Q.values)),
    ):
        q = np.array([_weighted(ctx, potential, u) for u in general])
        ratio = float(np.max(q / combined)) if np.any(combined > 0) else 0.0
        bounds[name] = FormBound(name, settings.safety * max(ratio, 0.0), 0.0, len(general))
    return bounds


def synthesize_drift(alpha_a: float, beta_hat: float, B_hat: float) -> Tuple[float, float]:
    """β′ = 2α_a + β̂，B′ = (1 + 2α_a/β̂)B̂; β̂ = 0 时要求 α_a·B̂ = 0"""
    if beta_hat == 0:
        if alpha_a * B_hat > 0:
            raise BadParameter("beta_hat", beta_hat, "β̂ = 0 时需要 α_a·B̂ = 0")
        return 2.0 * alpha_a, B_hat
    return 2.0 * alpha_a + beta_hat, (1.0 + 2.0 * alpha_a / beta_hat) * B_hat


class ConstantsExtractor:
    """结构常数提取器"""

    def __init__(self, config: Optional[Config] = None):
        self.config = config or Config.default()
        self.logger = logger.bind(name=self.__class__.__name__)

    def extract(
        self,
        ctx: FormContext,
        declared: Optional[Dict[str, float]] = None,
    ) -> StructuralConstants:
        """测量全部常数，声明值覆盖测量值

        Args:
            ctx: 形式上下文
            declared: 用户声明的常数 (provenance = declared)

        Returns:
            StructuralConstants
        """
        declared = dict(declared or {})
        unknown = set(declared) - set(CONSTANT_NAMES)
        if unknown:
            raise BadParameter("constants", sorted(unknown), "未知常数名")
        dec = ctx.dec
        self.logger.info(f"开始提取结构常数: {ctx.grid.n_nodes} 个节点, 边界条件 {ctx.bc}")

        alpha_s = alpha_s_of(dec)
        alpha_a, M = anti_bounds(dec)
        measured: Dict[str, float] = {"alpha_s": alpha_s, "alpha_a": alpha_a, "M": M, "c3": c3_of(dec)}

        bounds = drift_bounds(ctx, self.config.probes)
        for j in (1, 2):
            measured[f"beta{j}"], measured[f"B{j}"] = bounds[f"beta{j}"].as_pair()
        measured["gamma"], measured["Gamma"] = bounds["gamma"].as_pair()
        beta_hat_sq, measured["B_hat"] = bounds["beta_hat"].as_pair()
        measured["beta_hat"] = float(np.sqrt(beta_hat_sq))
        measured["c_hat"] = bounds["c_hat"].slope
        measured["c4"] = bounds["c4"].slope

        values = {**measured, **declared}
        provenance = {k: Provenance.MEASURED.value for k in measured}
        provenance.update({k: Provenance.DECLARED.value for k in declared})

        if "beta_prime" not in declared or "B_prime" not in declared:
            beta_prime, B_prime = synthesize_drift(values["alpha_a"], values["beta_hat"], values["B_hat"])
            for name, value in (("beta_prime", beta_prime), ("B_prime", B_prime)):
                if name not in declared:
                    values[name] = value
                    provenance[name] = Provenance.DERIVED.value

        constants = StructuralConstants(**values, provenance=provenance, grid=ctx.grid.to_dict())
        self.logger.info(
            f"常数提取完成: α_s={constants.alpha_s:.4g}, β′={constants.beta_prime:.4g}, "
            f"B′={constants.B_prime:.4g}, γ={constants.gamma:.4g}"
        )
        return constants

    def spot_audit(
        self,
        constants: StructuralConstants,
        ctx: FormContext,
        tol: float = 1e-8,
    ) -> Dict[str, float]:
        """在随机探针上检查声明常数对应的不等式，返回各不等式的最大违反量 (≤ tol 为通过)"""
        settings = self.config.probes
        general = probe_family(ctx.grid, settings.n_modes, settings.n_random, settings.seed)
        positive = probe_family(ctx.grid, settings.n_modes, settings.n_random, settings.seed, positive=True)
        worst: Dict[str, float] = {}

        worst["alpha_s"] = alpha_s_of(ctx.dec) - constants.alpha_s

        for j, (beta, B) in ((1, (constants.beta1, constants.B1)), (2, (constants.beta2, constants.B2))):
            worst[f"beta{j}"] = max(
                drift_quantity(ctx, u, j) - beta * form_h0(ctx, u) - B * l2_norm_sq(ctx, u) for u in positive
            )

        worst["gamma"] = max(
            _weighted(ctx, ctx.V_minus, u) - constants.gamma * form_h0(ctx, u) - constants.Gamma * l2_norm_sq(ctx, u)
            for u in general
        )

        worst["beta_prime"] = max(self._beta_prime_violation(constants, ctx, u) for u in general)

        failed = [k for k, v in worst.items() if v > tol]
        if failed:
            self.logger.warning(f"声明常数未通过抽查: {', '.join(failed)}")
        else:
            self.logger.info(f"声明常数抽查通过 ({len(general)} 个探针)")
        return worst

    @staticmethod
    def _beta_prime_violation(constants: StructuralConstants, ctx: FormContext, u: np.ndarray) -> float:
        """Im⟨A1a∇u - u Im(b1+b2), ∇u⟩ - (β′²h0(|u|) + B′‖u‖²)^½ ⟨A0s η, η⟩^½"""
        mesh = ctx.mesh
        g = mesh.element_gradient(u)
        A1a_e = mesh.element_mean(ctx.dec.A1a)
        im_b = (ctx.b1_e + ctx.b2_e).imag
        density = np.einsum("ej,ejk,ek->e", np.conj(g), A1a_e, g) - mesh.element_mean(u) * np.einsum(
            "ek,ek->e", im_b, np.conj(g)
        )
        lhs = float(np.dot(mesh.areas, density).imag)
        eta = eta_elements(ctx, u)
        eta_sq = float(np.dot(mesh.areas, np.einsum("ej,ejk,ek->e", eta, ctx.A0s_e, eta)))
        scale = constants.beta_prime ** 2 * form_h0(ctx, np.abs(u)) + constants.B_prime * l2_norm_sq(ctx, u)
        return lhs - float(np.sqrt(max(scale, 0.0) * eta_sq))

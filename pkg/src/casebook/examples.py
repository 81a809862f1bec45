"""算例: Hardy 阈值、Neumann 反例与 τ_p 下界扫描、反对称部分的不变性、漂移常数合成"""

import math
from typing import Callable, Dict, Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from scipy.integrate import simpson

from .models import (
    EXPECTED,
    DivergenceFreeReport,
    DivergenceFreeRow,
    HardySurrogateReport,
    HardyThresholds,
    NeumannReport,
    NeumannRow,
    TauSweepReport,
    TauSweepRow,
)
from ..constants.extractor import synthesize_drift
from ..constants.models import StructuralConstants
from ..fields.models import CoefficientSet, Grid
from ..forms.context import FormContext
from ..forms.checks import tau_lower_bound_check
from ..forms.functionals import form_a, form_h0, form_t, l2_norm_sq
from ..forms.probes import probe_family
from ..intervals.formulas import eps_max, extended_endpoints, interval_I, is_degenerate, omega_split
from ..intervals.models import GrowthMode
from ..semigroup.audits import SemigroupAuditor, dissipativity_functional
from ..semigroup.models import BREACH, PASS
from ..semigroup.operator import assemble
from ..utils.config import Config
from ..utils.exceptions import BadParameter

NEUMANN_P = 4.0 + 2.0 * math.sqrt(2.0)
NEUMANN_R = complex(1.0 - math.sqrt(2.0), -1.0)
NEUMANN_CONSTANTS = StructuralConstants.declared(alpha_s=1.0, B_prime=1.0)
# β′ > 0 让 closed 模式在 p ≠ 2 时可用
NEUMANN_SWEEP_CONSTANTS = StructuralConstants.declared(alpha_s=1.0, beta_prime=0.1, B_prime=1.0)

Profile = Tuple[Callable[[np.ndarray], np.ndarray], Callable[[np.ndarray], np.ndarray]]

# τ(0) = τ′(0) = τ′(1) = 0 且 τ > 0 于 (0, 1]
TAU_PROFILES: Dict[str, Profile] = {
    "cubic": (lambda x: x * x * (3.0 - 2.0 * x), lambda x: 6.0 * x * (1.0 - x)),
    "quintic": (
        lambda x: x ** 3 * (10.0 - 15.0 * x + 6.0 * x * x),
        lambda x: 30.0 * x * x * (1.0 - x) ** 2,
    ),
}


def hardy(beta: float, N: int) -> HardyThresholds:
    """p∓ = 2/(1 ± √(1-β))，p_max = N/(N-2)·p₊，p_min = p_max/(p_max - 1)"""
    if not 0.0 < beta < 1.0:
        raise BadParameter("beta", beta, "β 必须位于 (0, 1)")
    root = math.sqrt(1.0 - beta)
    p_minus = 2.0 / (1.0 + root)
    p_plus = 2.0 / (1.0 - root)
    p_min, p_max = extended_endpoints((p_minus, p_plus), N)
    return HardyThresholds(beta=beta, N=N, p_minus=p_minus, p_plus=p_plus, p_max=p_max, p_min=p_min)


def hardy_constants(beta: float) -> StructuralConstants:
    """V⁻ ≤ β h0 时只有 γ = β 非零，I 的端点即 p∓"""
    return StructuralConstants.declared(gamma=beta)


def _neumann_context(n: int) -> FormContext:
    grid = Grid.line(0.0, 1.0, n, "neumann")
    return FormContext.from_coefficients(CoefficientSet.build(grid, A=1.0 + 1.0j, b1=[-1.0j]))


def neumann_closed_form(lam: float, p: float = NEUMANN_P, tau_one: float = 1.0) -> float:
    """Re⟨L u_λ, |u_λ|^{p-2}u_λ⟩ = (e^{p Re(r) λ τ(1)} - 1)/(-p Re r)，p = 4+2√2 时为 (e^{-√8λ} - 1)/√8"""
    k = -p * NEUMANN_R.real
    return (math.exp(-k * lam * tau_one) - 1.0) / k


def neumann_counterexample(
    lambda_list: Iterable[float] = (1.0, 2.0, 5.0, 10.0),
    p: float = NEUMANN_P,
    n: int = 2049,
    profile: str = "cubic",
    quad_tol: float = 1e-6,
    discrete_tol: float = 1e-3,
) -> NeumannReport:
    """L = -(1+i)d²/dx² - i d/dx (Neumann) 在 u_λ = e^{λrτ} 上的耗散泛函

    每个 λ 比较闭式值、Simpson 求积值和离散算子值，并在内点 p = 4 检查
    泛函不低于 -ω₄‖u_λ‖₄⁴ (ω₄ 取 omega_split)。
    """
    if profile not in TAU_PROFILES:
        raise BadParameter("profile", profile, f"可选 {', '.join(TAU_PROFILES)}")
    tau, dtau = TAU_PROFILES[profile]
    lams = sorted(float(lam) for lam in lambda_list)
    if not lams or lams[0] <= 0:
        raise BadParameter("lambda_list", lams, "λ 必须为正")

    ctx = _neumann_context(n)
    op = assemble(ctx)
    x = ctx.grid.axes()[0]
    k = -p * NEUMANN_R.real
    omega_4 = omega_split(NEUMANN_CONSTANTS, 4.0)
    report = NeumannReport(
        p=p,
        interval=interval_I(NEUMANN_CONSTANTS).to_dict(),
        limit=-1.0 / k,
    )

    for lam in lams:
        u = np.exp(lam * NEUMANN_R * tau(x))
        quad = float(-lam * simpson(dtau(x) * np.exp(-k * lam * tau(x)), x=x))
        at_p = dissipativity_functional(op, u, p, 0.0)
        at_4 = dissipativity_functional(op, u, 4.0, 0.0)
        report.rows.append(
            NeumannRow(
                lam=lam,
                closed_form=neumann_closed_form(lam, p, float(tau(np.array(1.0)))),
                quadrature=quad,
                discrete=at_p.re_pairing,
                norm_p=at_p.norm_p,
                interior_value=at_4.re_pairing,
                interior_floor=-omega_4 * at_4.norm_p ** 4,
            )
        )

    rows = report.rows
    report.quadrature_ok = all(abs(r.quadrature - r.closed_form) <= quad_tol for r in rows)
    # 离散误差随 (λh)² 增长
    report.discrete_ok = all(
        abs(r.discrete - r.closed_form) <= discrete_tol * max(1.0, (r.lam / 10.0) ** 2) for r in rows
    )
    report.norm_decreasing = all(b.norm_p < a.norm_p for a, b in zip(rows, rows[1:]))
    report.interior_ok = all(r.interior_value >= r.interior_floor - 1e-8 for r in rows)
    logger.info(
        f"Neumann 反例: p={p:.6f}, λ_max={lams[-1]:g}, 离散值 {rows[-1].discrete:.8f}, 极限 {report.limit:.8f}"
    )
    return report


def neumann_tau_sweep(
    p_list: Iterable[float] = (2.0, 4.0, 6.0),
    n_probes: int = 500,
    n: int = 129,
    seed: int = 42,
    constants: StructuralConstants = NEUMANN_SWEEP_CONSTANTS,
    mode: Union[str, GrowthMode] = GrowthMode.CLOSED,
    tol: float = 1e-6,
) -> TauSweepReport:
    """在 Neumann 算例上扫描 τ_p(v) 的下界，ε 取 0 与 ε_max/2

    探针由实探针两两配对成复函数，margin 按 h0(v) + ‖v‖² 归一。
    β′ = 0 的退化常数只检查 ε = 0 (需 coercive 模式)。
    """
    mode = GrowthMode.parse(mode)
    p_list = [float(p) for p in p_list]
    if not p_list:
        raise BadParameter("p_list", p_list, "至少需要一个 p")
    if n_probes < 2:
        raise BadParameter("n_probes", n_probes, "至少需要 2 个探针")
    ctx = _neumann_context(n)
    real = probe_family(ctx.grid, 6, n_probes, seed)[:n_probes]
    probes = [u + 1j * w for u, w in zip(real, real[1:] + real[:1])]
    scales = [form_h0(ctx, v) + l2_norm_sq(ctx, v) for v in probes]

    report = TauSweepReport(constants=constants.to_dict(), mode=mode.value, n_probes=len(probes), tol=tol)
    for p in p_list:
        eps_list = [0.0] if is_degenerate(constants, p) else [0.0, 0.5 * eps_max(constants, p)]
        for eps in eps_list:
            margins = [
                tau_lower_bound_check(constants, ctx, v, p, eps, mode).margin / scale
                for v, scale in zip(probes, scales)
            ]
            worst = int(np.argmin(margins))
            report.rows.append(TauSweepRow(p=p, eps=eps, min_margin=margins[worst], worst_probe=worst))
    logger.info(f"τ_p 下界扫描: {len(report.rows)} 组，最小 margin {min(r.min_margin for r in report.rows):.3e}")
    return report


def _form_deviation(ctx0: FormContext, ctx_c: FormContext, probes: Sequence[np.ndarray]) -> float:
    worst = 0.0
    for u, v in zip(probes, probes[1:] + probes[:1]):
        scale = math.sqrt(max(form_a(ctx0, u) * form_a(ctx0, v), 1e-300))
        worst = max(worst, abs(form_t(ctx_c, u, v) - form_t(ctx0, u, v)) / scale)
    return worst


def divergence_free_invariance(
    c_list: Iterable[float] = (0.0, 1.0, 5.0),
    n: int = 33,
    n_probes: int = 100,
    seed: int = 42,
    tol: float = 1e-10,
) -> DivergenceFreeReport:
    """A = I + c[[0, 1], [-1, 0]] 时 Dirichlet 下的形式与 c 无关，Neumann 下出现边界项"""
    report = DivergenceFreeReport(tol=tol)
    J = np.array([[0.0, 1.0], [-1.0, 0.0]])
    contexts = {}
    for bc in ("dirichlet", "neumann"):
        grid = Grid.box((0.0, 1.0), (0.0, 1.0), n, bc)
        base = FormContext.from_coefficients(CoefficientSet.build(grid))
        probes = [base.mesh.apply_bc(u) for u in probe_family(grid, 4, n_probes, seed)]
        contexts[bc] = (grid, base, probes)

    for c in c_list:
        deviations = {}
        for bc, (grid, base, probes) in contexts.items():
            ctx_c = FormContext.from_coefficients(CoefficientSet.build(grid, A=np.eye(2) + c * J))
            deviations[bc] = _form_deviation(base, ctx_c, probes)
        status = PASS if deviations["dirichlet"] <= tol else BREACH
        report.rows.append(
            DivergenceFreeRow(
                c=float(c),
                dirichlet_deviation=deviations["dirichlet"],
                neumann_deviation=deviations["neumann"],
                status=status,
                neumann_status=EXPECTED,
            )
        )
    logger.info(f"反对称不变性: 最大偏差 {report.max_deviation:.3e}")
    return report


def drift_synthesis_demo(alpha_a: float, beta_hat: float, B_hat: float) -> Tuple[float, float]:
    """(β′, B′) = (2α_a + β̂, (1 + 2α_a/β̂)B̂)"""
    return synthesize_drift(alpha_a, beta_hat, B_hat)


def hardy_potential(grid: Grid, beta: float, eps: float = 1e-3) -> np.ndarray:
    """V = -β/(4·max(|x|², eps))，对应 N = 3 时的 β(N-2)²/4"""
    r2 = np.sum(grid.coordinates() ** 2, axis=1)
    return -beta / (4.0 * np.maximum(r2, eps))


def hardy_surrogate_run(
    beta: float = 0.75,
    m_list: Iterable[float] = (10.0, 100.0, 1000.0, 10000.0),
    n: int = 33,
    t: float = 0.05,
    p: float = 2.0,
    eps: float = 1e-3,
    config: Optional[Config] = None,
) -> HardySurrogateReport:
    """[-1, 1]² Dirichlet 网格上以 U = |V| 为吸收势做截断收敛检查

    max U = β/(4·eps)，默认 187.5; m 越过它之后 U_m ≡ 0，间隙恒为 0。
    """
    thresholds = hardy(beta, 3)
    grid = Grid.box((-1.0, 1.0), (-1.0, 1.0), n, "dirichlet")
    V = hardy_potential(grid, beta, eps)
    ctx = FormContext.from_coefficients(CoefficientSet.build(grid, Q=V))
    auditor = SemigroupAuditor(config)
    truncation = auditor.truncation_convergence(ctx, np.abs(V), p, m_list, t)
    return HardySurrogateReport(
        beta=beta,
        thresholds=thresholds,
        interval=interval_I(hardy_constants(beta)).to_dict(),
        truncation=truncation,
        p=p,
    )

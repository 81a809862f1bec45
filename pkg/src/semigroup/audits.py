"""半群层面的审计: 拟压缩性、耗散泛函、预解式加权界、加权增长、平滑与截断收敛"""

import math
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger

from .models import (
    BREACH,
    NO_BOUND,
    NO_GUARANTEE,
    NOT_LOG_CONVEX,
    PASS,
    DiscreteOperator,
    DissipativityResult,
    NormEstimate,
    ResolventRow,
    SectorialityResult,
    SmoothingReport,
    TrajectoryReport,
    TrajectoryRow,
    TruncationReport,
    WeightedGrowthReport,
)
from .norms import dual_exponent, opnorm_p, opnorm_pq
from .operator import Propagator, assemble, propagator
from ..constants.models import StructuralConstants
from ..fields.decomposition import validate_ellipticity
from ..forms.context import FormContext
from ..forms.functionals import form_h0, l2_norm_sq
from ..forms.probes import probe_family
from ..intervals.formulas import eps_p, growth_rate, interval_I, mu_omega_for, weighted_ceiling
from ..intervals.models import GrowthMode, Interval
from ..mesh.models import GridFunction
from ..mesh.nonlinear import power_maps
from ..utils.concurrency import run_sweep
from ..utils.config import Config
from ..utils.exceptions import BadParameter, HypothesisUnmet, ModeError, OutsideInterval

ArrayLike = Union[GridFunction, np.ndarray]
ModeLike = Union[str, GrowthMode]


def _dof_vector(op: DiscreteOperator, u: ArrayLike) -> np.ndarray:
    """接受全节点向量或自由度向量"""
    values = np.asarray(u.values if isinstance(u, GridFunction) else u, dtype=complex)
    if values.size == op.grid.n_nodes:
        return op.restrict(values)
    if values.size == op.dof:
        return values
    raise BadParameter("u", values.shape, f"长度应为 {op.grid.n_nodes} (节点) 或 {op.dof} (自由度)")


def _weighted_pnorm(weights: np.ndarray, u: np.ndarray, p: float) -> float:
    if np.isinf(p):
        return float(np.max(np.abs(u)))
    return float(np.dot(weights, np.abs(u) ** p) ** (1.0 / p))


def _rate_for(
    constants: StructuralConstants,
    interval: Interval,
    p: float,
    mode: GrowthMode,
) -> Tuple[Optional[float], Optional[str]]:
    """(增长率, 预设状态)，无增长率时状态为 NO_GUARANTEE 或 NO_BOUND"""
    if not interval.contains(p):
        return None, NO_GUARANTEE
    try:
        return growth_rate(constants, p, mode), None
    except (ModeError, OutsideInterval) as e:
        logger.debug(f"p={p:g} 无可用增长界: {e}")
        return None, NO_BOUND


def dissipativity_functional(
    op: DiscreteOperator,
    u: ArrayLike,
    p: float,
    omega: float,
    ctx: Optional[FormContext] = None,
    constants: Optional[StructuralConstants] = None,
    mode: ModeLike = GrowthMode.CLOSED,
) -> DissipativityResult:
    """Re⟨(ω + L_h)u, w_p(u)⟩_h

    给出 ctx 与 constants 时同时返回两个下界 (对应 Re⟨L_h u, w_p(u)⟩_h):
    ε_p h0(|v_p|) - ω_p‖v_p‖² 与 ε h0(v_p) - (ω̂_p + ε/(1-ε)B̂_p)‖v_p‖²，
    不适用的下界为 None。
    """
    u_f = _dof_vector(op, u)
    full = op.extend(u_f)
    v_full, w_full = power_maps(full, p)
    pair = op.pairing(u_f, op.restrict(w_full))
    norm_pp = float(np.dot(op.dof_weights, np.abs(u_f) ** p))
    result = DissipativityResult(
        value=pair.real + omega * norm_pp,
        re_pairing=pair.real,
        norm_p=norm_pp ** (1.0 / p),
    )
    if ctx is None or constants is None:
        return result

    h_abs = form_h0(ctx, np.abs(v_full))
    l2 = l2_norm_sq(ctx, v_full)
    try:
        result.lower_eps_p = eps_p(constants, p) * h_abs - growth_rate(constants, p, mode) * l2
    except (ModeError, OutsideInterval):
        pass
    try:
        eps, omega_eps = mu_omega_for(constants, p, mode=mode)
        result.lower_eps = eps * form_h0(ctx, v_full) - omega_eps * l2
    except (ModeError, OutsideInterval):
        pass
    return result


def sectoriality_check(
    op: DiscreteOperator,
    probes: Iterable[ArrayLike],
    p: float,
    mu: float,
    omega: float,
    c0: float,
) -> SectorialityResult:
    """|Im⟨L_h u, w_p(u)⟩| ≤ (c0/μ)·Re⟨(L_h + ω + μ)u, w_p(u)⟩"""
    if not mu > 0:
        raise BadParameter("mu", mu, "μ 必须为正")
    worst = math.inf
    max_ratio = 0.0
    count = 0
    for u in probes:
        u_f = _dof_vector(op, u)
        if not np.any(u_f):
            continue
        w_f = op.restrict(power_maps(op.extend(u_f), p)[1])
        pair = op.pairing(u_f, w_f)
        shifted = pair.real + (omega + mu) * float(np.dot(op.dof_weights, np.abs(u_f) ** p))
        worst = min(worst, c0 / mu * shifted - abs(pair.imag))
        if shifted > 0:
            max_ratio = max(max_ratio, abs(pair.imag) / shifted)
        count += 1
    return SectorialityResult(worst_slack=float(worst), max_ratio=float(max_ratio), n_probes=count)


def semigroup_property_defect(
    op: DiscreteOperator,
    f: ArrayLike,
    t: float,
    s: float,
    method: Optional[str] = None,
) -> float:
    """‖S(t+s)f - S(t)S(s)f‖₂ / ‖f‖₂ (加权)"""
    f_dof = _dof_vector(op, f)
    w = op.dof_weights
    direct = propagator(op, t + s, method).apply(f_dof)
    composed = propagator(op, t, method).apply(propagator(op, s, method).apply(f_dof))
    return _weighted_pnorm(w, direct - composed, 2.0) / max(_weighted_pnorm(w, f_dof, 2.0), 1e-300)


class SemigroupAuditor:
    """离散半群的各项审计"""

    def __init__(self, config: Optional[Config] = None):
        self.config = config or Config.default()
        self.logger = logger.bind(name=self.__class__.__name__)

    def _sweep(self, fn, items: Sequence, desc: str) -> List:
        perf = self.config.performance
        return run_sweep(fn, items, perf.threads, desc, perf.show_progress)

    def _norm(self, S: Union[np.ndarray, Propagator], p: float, weights: np.ndarray) -> NormEstimate:
        return opnorm_p(S, p, weights, self.config.power_iteration, self.config.probes.seed)

    def _probes(self, ctx_or_op: Union[FormContext, DiscreteOperator], n_modes: int, n_random: int) -> List[np.ndarray]:
        return probe_family(ctx_or_op.grid, n_modes, n_random, self.config.probes.seed)

    def quasi_contractivity_audit(
        self,
        ctx: FormContext,
        constants: StructuralConstants,
        p_list: Iterable[float],
        t_list: Iterable[float],
        mode: ModeLike = GrowthMode.CLOSED,
        op: Optional[DiscreteOperator] = None,
    ) -> TrajectoryReport:
        """测量 ‖S_p(t)‖_{p→p} 并与 e^{ωt} 比较

        I 外的 p 标记为 EXPECT-NO-GUARANTEE; 增长界不适用 (ModeError) 时标记 NO-BOUND。
        PASS 当且仅当 measured ≤ e^{ωt}(1 + tol_discr) + 时间离散容差。
        """
        mode = GrowthMode.parse(mode)
        times = sorted({float(t) for t in t_list})
        if any(t < 0 for t in times):
            raise BadParameter("t", times, "时间必须非负")
        p_values = [float(p) for p in p_list]
        op = op or assemble(ctx)
        interval = interval_I(constants)
        tol = self.config.audit.tol_discr
        self.logger.info(
            f"拟压缩审计: {len(p_values)} 个 p × {len(times)} 个 t, 自由度 {op.dof}, 模式 {mode.value}"
        )

        props = {t: propagator(op, t, settings=self.config.propagator) for t in times}
        tasks = [(p, t) for p in p_values for t in times]
        weights = op.dof_weights
        estimates = self._sweep(lambda task: self._norm(props[task[1]], task[0], weights), tasks, "拟压缩审计")

        report = TrajectoryReport(
            metadata={
                "mode": mode.value,
                "interval": interval.to_dict(),
                "dof": op.dof,
                "tol_discr": tol,
                "methods": {str(t): props[t].describe() for t in times},
            }
        )
        for (p, t), est in zip(tasks, estimates):
            prop = props[t]
            rate, preset = _rate_for(constants, interval, p, mode)
            if rate is None:
                report.rows.append(
                    TrajectoryRow(p, t, est.value, None, None, prop.describe(), preset or NO_BOUND, est.spread)
                )
                continue
            bound = math.exp(rate * t)
            allowance = self.config.propagator.scheme_tol if prop.stepper is not None else 0.0
            status = PASS if est.value <= bound * (1.0 + tol) + allowance else BREACH
            if status == BREACH:
                self.logger.warning(f"p={p:g}, t={t:g}: 实测 {est.value:.8g} 超过界 {bound:.8g}")
            report.rows.append(
                TrajectoryRow(p, t, est.value, bound, bound - est.value, prop.describe(), status, est.spread)
            )

        self.logger.info(f"拟压缩审计完成: {len(report.breaches)} 处越界")
        return report

    def resolvent_weight_bound(
        self,
        op: DiscreteOperator,
        U: np.ndarray,
        p: float,
        lambda_list: Iterable[float],
        probes: Optional[Iterable[ArrayLike]] = None,
        tol: Optional[float] = None,
    ) -> List[ResolventRow]:
        """‖U^{1/p}(λ + L_h)⁻¹‖_{p→p} ≤ λ^{-1/p′}

        先在探针上验证前提 Σ w U |v_p(u)|² ≤ Re⟨L_h u, w_p(u)⟩_h。

        Raises:
            HypothesisUnmet: 某个探针上前提不成立
        """
        tol = self.config.audit.tol_discr if tol is None else tol
        U_full = np.real(np.asarray(U, dtype=complex))
        if U_full.size != op.grid.n_nodes or np.any(U_full < 0) or not np.all(np.isfinite(U_full)):
            raise BadParameter("U", U_full.shape, "U 必须是非负有限的节点数组")
        probes = list(probes) if probes is not None else self._probes(op, self.config.probes.n_modes, 20)

        for index, u in enumerate(probes):
            u_f = _dof_vector(op, u)
            if not np.any(u_f):
                continue
            v_full, w_full = power_maps(op.extend(u_f), p)
            lhs = float(np.dot(op.weights, U_full * np.abs(v_full) ** 2))
            rhs = op.pairing(u_f, op.restrict(w_full)).real
            violation = lhs - rhs
            if violation > 1e-9 * max(1.0, abs(rhs)):
                self.logger.warning(f"预解式前提在探针 {index} 上不成立: 违反量 {violation:.3e}")
                raise HypothesisUnmet(violation, index)

        L = op.to_dense()
        eye = np.eye(op.dof, dtype=complex)
        scale = op.restrict(U_full).real ** (1.0 / p)
        p_dual = dual_exponent(p)
        rows = []
        for lam in sorted(float(x) for x in lambda_list):
            if not lam > 0:
                raise BadParameter("lambda", lam, "λ 必须为正")
            R = np.linalg.solve(lam * eye + L, eye)
            measured = self._norm(scale[:, None] * R, p, op.dof_weights).value
            bound = 1.0 if np.isinf(p_dual) else lam ** (-1.0 / p_dual)
            status = PASS if measured <= bound * (1.0 + tol) else BREACH
            rows.append(ResolventRow(lam=lam, measured=measured, bound=bound, margin=bound - measured, status=status))
        return rows

    def weighted_growth_audit(
        self,
        ctx: FormContext,
        p: float,
        xi_list: Iterable[Union[float, Sequence[float]]],
        t_list: Iterable[float],
        constants: Optional[StructuralConstants] = None,
        mode: ModeLike = GrowthMode.CLOSED,
    ) -> WeightedGrowthReport:
        """测量 ‖ρ_ξ⁻¹ S_p(t) ρ_ξ‖_{p→p}，ρ_ξ = e^{-⟨ξ,x⟩}，拟合 ln N = μ|ξ|²t + ωt"""
        op = assemble(ctx)
        dim = ctx.grid.dim
        coords = ctx.grid.coordinates()[op.free_index]
        coords = coords - coords.mean(axis=0)
        xis = []
        for xi in xi_list:
            vec = np.atleast_1d(np.asarray(xi, dtype=float))
            if vec.size == 1 and dim > 1:
                vec = np.concatenate([vec, np.zeros(dim - 1)])
            if vec.size != dim:
                raise BadParameter("xi", xi, f"维数应为 {dim}")
            xis.append(vec)
        times = sorted({float(t) for t in t_list if t > 0})
        if not times or not xis:
            raise BadParameter("t_list", times, "至少需要一个正时刻和一个 ξ")

        weights = op.dof_weights
        dense = {t: propagator(op, t, settings=self.config.propagator).to_dense() for t in times}
        tasks = [(xi, t) for xi in xis for t in times]

        def measure(task: Tuple[np.ndarray, float]) -> float:
            xi, t = task
            rho = np.exp(-coords @ xi)
            twisted = (1.0 / rho)[:, None] * dense[t] * rho[None, :]
            return self._norm(twisted, p, weights).value

        norms = self._sweep(measure, tasks, "加权增长审计")
        X = np.array([[float(xi @ xi) * t, t] for xi, t in tasks])
        y = np.log(np.maximum(norms, 1e-300))
        (mu, omega), *_ = np.linalg.lstsq(X, y, rcond=None)

        report = WeightedGrowthReport(mu=float(mu), omega=float(omega))
        for (xi, t), norm, fitted in zip(tasks, norms, X @ np.array([mu, omega])):
            report.rows.append(
                {"xi": float(np.linalg.norm(xi)), "t": t, "norm": float(norm), "rate": math.log(norm) / t, "fitted": float(fitted)}
            )

        if constants is not None:
            try:
                mu_p, omega_p = mu_omega_for(constants, p, mode=mode)
                c2 = validate_ellipticity(ctx.dec)[1]
                report.ceiling_ok = all(
                    row["rate"] <= weighted_ceiling(constants, p, mu_p, omega_p, c2 * row["xi"] ** 2) + 1e-9
                    for row in report.rows
                )
            except (ModeError, OutsideInterval) as e:
                self.logger.info(f"p={p:g} 无加权上界可比较: {e}")
        self.logger.info(f"加权增长拟合: μ={report.mu:.6g}, ω={report.omega:.6g}")
        return report

    def smoothing_audit(
        self,
        ctx: FormContext,
        p: float,
        t_list: Iterable[float],
        r: float = math.inf,
        envelope: float = 0.1,
    ) -> SmoothingReport:
        """测量 ‖S(t)‖_{p→r} 并拟合 C t^{-θ}

        所有点都落在拟合值的 (1 ± envelope) 倍之内时通过。
        """
        op = assemble(ctx)
        times = sorted({float(t) for t in t_list if t > 0})
        if not times:
            raise BadParameter("t_list", times, "至少需要一个正时刻")
        weights = op.dof_weights
        settings = self.config

        def measure(t: float) -> float:
            prop = propagator(op, t, settings=settings.propagator)
            return opnorm_pq(prop, p, r, weights, settings.power_iteration, settings.probes.seed).value

        norms = np.array(self._sweep(measure, times, "平滑审计"))
        log_t = np.log(times)
        if len(times) >= 2:
            slope, intercept = np.polyfit(log_t, np.log(norms), 1)
        else:
            slope, intercept = 0.0, float(np.log(norms[0]))
        fitted = np.exp(intercept + slope * log_t)

        report = SmoothingReport(exponent=float(-slope), constant=float(np.exp(intercept)))
        for t, norm, fit in zip(times, norms, fitted):
            report.rows.append({"t": t, "norm": float(norm), "fitted": float(fit)})
        report.passed = bool(np.all(np.abs(norms / fitted - 1.0) <= envelope))
        self.logger.info(f"平滑拟合: θ={report.exponent:.4f}, C={report.constant:.4g}")
        return report

    def truncation_convergence(
        self,
        ctx: FormContext,
        U: np.ndarray,
        p: float,
        m_list: Iterable[float],
        t: float,
        f_list: Optional[Iterable[ArrayLike]] = None,
        n_times: int = 4,
        tol: float = 1e-6,
    ) -> TruncationReport:
        """加入吸收势 U_m = (U - m)⁺ 后比较相邻 m 的轨道

        gap = max_{f, t_k ≤ t} ‖S_m(t_k) f - S_m′(t_k) f‖_p，f 按 ‖f‖_p = 1 归一。
        """
        U_full = np.real(np.asarray(U, dtype=complex))
        if U_full.size != ctx.grid.n_nodes or np.any(U_full < 0):
            raise BadParameter("U", U_full.shape, "U 必须是非负节点数组")
        m_values = sorted({float(m) for m in m_list})
        if len(m_values) < 2:
            raise BadParameter("m_list", m_values, "至少需要两个不同的截断水平")
        if not t > 0 or n_times < 1:
            raise BadParameter("t", t, "需要 t > 0 且 n_times ≥ 1")

        base = assemble(ctx)
        weights = base.dof_weights
        sources = list(f_list) if f_list is not None else self._probes(ctx, 3, 4)
        corpus = []
        for f in sources:
            f_dof = _dof_vector(base, f)
            norm = _weighted_pnorm(weights, f_dof, p)
            if norm > 0:
                corpus.append(f_dof / norm)

        dt = t / n_times
        settings = self.config.propagator

        def trajectories(m: float) -> List[np.ndarray]:
            op_m = assemble(ctx.with_potential(np.maximum(U_full - m, 0.0)))
            step = propagator(op_m, dt, settings=settings)
            out = []
            for f in corpus:
                y = f
                for _ in range(n_times):
                    y = step.apply(y)
                    out.append(y)
            return out

        runs = self._sweep(trajectories, m_values, "截断收敛")
        gaps = [
            max(_weighted_pnorm(weights, a - b, p) for a, b in zip(left, right))
            for left, right in zip(runs, runs[1:])
        ]
        report = TruncationReport(m_values=m_values, gaps=[float(g) for g in gaps], tol=tol)
        self.logger.info(f"截断收敛: 间隙 {', '.join(f'{g:.3e}' for g in report.gaps)}")
        return report

    def consistency_summary(self, report: TrajectoryReport) -> Dict[str, int]:
        """按状态计数，并检查同一 t 下 s = 1/p ↦ log‖S(t)‖_p 是否为凸

        Riesz–Thorin: ‖S‖_{p_θ} ≤ ‖S‖_{p0}^{1-θ}‖S‖_{p1}^θ。超出插值 (1 + tol_discr) 倍的行计入 NOT-LOG-CONVEX。
        """
        summary: Dict[str, int] = {}
        for row in report.rows:
            summary[row.status] = summary.get(row.status, 0) + 1
        slack = math.log1p(self.config.audit.tol_discr)
        violations = 0
        for t in sorted({row.t for row in report.rows}):
            points = sorted(
                (1.0 / row.p, math.log(row.measured)) for row in report.rows if row.t == t and row.measured > 0
            )
            for (s0, y0), (s, y), (s1, y1) in zip(points, points[1:], points[2:]):
                theta = (s - s0) / (s1 - s0)
                if y > (1.0 - theta) * y0 + theta * y1 + slack:
                    violations += 1
                    self.logger.warning(f"t={t:g}, p={1.0 / s:g}: 实测范数高于相邻 p 的插值界")
        summary[NOT_LOG_CONVEX] = violations
        return summary

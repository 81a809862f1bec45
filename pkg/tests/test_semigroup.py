"""离散算子、传播子、范数估计与半群审计测试"""

import math

import numpy as np
import pytest

from src.casebook.examples import NEUMANN_CONSTANTS, _neumann_context
from src.constants.models import StructuralConstants
from src.fields.models import CoefficientSet, Grid
from src.forms.context import FormContext
from src.forms.functionals import form_h0, form_t
from src.intervals.formulas import omega_split
from src.mesh.nonlinear import power_maps
from src.semigroup.audits import SemigroupAuditor, dissipativity_functional, sectoriality_check, semigroup_property_defect
from src.semigroup.models import BREACH, NO_BOUND, NO_GUARANTEE, NOT_LOG_CONVEX, PASS, TrajectoryReport, TrajectoryRow
from src.semigroup.norms import opnorm_p, opnorm_pq
from src.semigroup.operator import Stepper, assemble, propagator, step
from src.utils.config import Config
from src.utils.exceptions import BadParameter, HypothesisUnmet


def _context(n=33, bc="dirichlet", **coefficients):
    grid = Grid.line(0.0, 1.0, n, bc)
    return FormContext.from_coefficients(CoefficientSet.build(grid, **coefficients))


def _quiet_config(**sections):
    data = {"performance": {"threads": 1, "show_progress": False}, "probes": {"n_random": 10, "n_modes": 4}}
    data.update(sections)
    return Config(data=data)


class TestAssembly:
    """刚度矩阵组装测试"""

    def test_matches_form(self):
        """测试 t(u, v) = conj(v)ᵀ K u (二维复系数)"""
        grid = Grid.box((0.0, 1.0), (0.0, 1.0), 6, "neumann")
        cs = CoefficientSet.build(
            grid, A=[[1 + 0.5j, 0.2], [-0.1j, 2.0]], b1=[0.3j, 0.1], b2=[0.2, -0.4j], Q=0.5 - 1j
        )
        ctx = FormContext.from_coefficients(cs)
        op = assemble(ctx)
        rng = np.random.default_rng(1)
        u = rng.standard_normal(grid.n_nodes) + 1j * rng.standard_normal(grid.n_nodes)
        v = rng.standard_normal(grid.n_nodes) + 1j * rng.standard_normal(grid.n_nodes)
        assert np.vdot(v, op.K @ u) == pytest.approx(form_t(ctx, u, v))

    def test_dirichlet_pairing(self):
        """测试自由度上的 ⟨L_h u, v⟩_h 与形式一致"""
        ctx = _context(A=1 + 1j, b1=[0.5])
        op = assemble(ctx)
        x = ctx.grid.coordinates()[:, 0]
        u = np.sin(np.pi * x) * np.exp(1j * x)
        v = np.sin(2 * np.pi * x) + 0j
        assert op.dof == 31
        assert op.pairing(op.restrict(u), op.restrict(v)) == pytest.approx(form_t(ctx, u, v))
        # 加权内积下 L_h 与 M⁻¹K 一致
        lhs = np.vdot(op.dof_weights * op.restrict(v), op.apply(op.restrict(u)))
        assert lhs == pytest.approx(form_t(ctx, u, v))

    def test_adjoint(self):
        """测试伴随算子为 M⁻¹Kᴴ"""
        op = assemble(_context(A=1 + 1j, b1=[0.5j]))
        adj = op.adjoint()
        assert np.allclose(adj.K.toarray(), op.K.toarray().conj().T)


class TestPropagator:
    """时间推进测试"""

    def setup_method(self):
        self.op = assemble(_context())
        self.f = np.ones(self.op.dof, dtype=complex)

    def test_identity_at_zero(self):
        """测试 S(0) = I"""
        prop = propagator(self.op, 0.0)
        assert prop.method == "identity"
        assert np.allclose(prop.apply(self.f), self.f)

    def test_crank_nicolson_matches_expm(self):
        """测试 Crank–Nicolson 与稠密 expm 一致"""
        exact = propagator(self.op, 0.05, "expm").apply(self.f)
        stepped = propagator(self.op, 0.05, "crank_nicolson")
        approx = stepped.apply(self.f)
        assert stepped.n_steps >= 50
        assert np.linalg.norm(approx - exact) <= 1e-3 * np.linalg.norm(exact)

    def test_adjoint_action(self):
        """测试逐步推进的共轭转置作用"""
        prop = propagator(self.op, 0.02, "implicit_euler")
        dense = prop.to_dense()
        y = np.linspace(0.0, 1.0, self.op.dof) + 0j
        assert np.allclose(prop.apply_adjoint(y), dense.conj().T @ y)

    def test_invalid_arguments(self):
        """测试负时间、未知方法与非正步长"""
        with pytest.raises(BadParameter):
            propagator(self.op, -1.0)
        with pytest.raises(BadParameter):
            propagator(self.op, 1.0, "rk4")
        with pytest.raises(BadParameter):
            Stepper(self.op, 0.0)

    def test_semigroup_property(self):
        """测试 S(t+s) = S(t)S(s)"""
        assert semigroup_property_defect(self.op, self.f, 0.01, 0.02, "expm") < 1e-10

    def test_heat_mode_decay(self):
        """测试 Crank–Nicolson 逐步推进 sin(πx) 按 e^{-π²t} 衰减"""
        op = assemble(_context(n=257))
        x = op.grid.coordinates()[op.free_index, 0]
        u0 = np.sin(np.pi * x) + 0j
        u = u0
        for _ in range(100):
            u = step(op, u, 1e-3)
        ratio = np.linalg.norm(u) / np.linalg.norm(u0)
        assert ratio == pytest.approx(math.exp(-math.pi ** 2 * 0.1), rel=0.01)


class TestNorms:
    """算子范数估计测试"""

    def setup_method(self):
        self.B = np.array([[1.0, -2.0], [3.0, 4j]])

    def test_exact_endpoints(self):
        """测试 p = 1 列和、p = ∞ 行和与 p = 2 奇异值"""
        one = opnorm_p(self.B, 1.0)
        assert one.exact and one.value == pytest.approx(6.0)
        assert opnorm_p(self.B, math.inf).value == pytest.approx(7.0)
        assert opnorm_p(self.B, 2.0).value == pytest.approx(np.linalg.norm(self.B, 2))

    def test_power_iteration_diagonal(self):
        """测试对角矩阵 ‖D‖_p = max|d|"""
        D = np.diag([3.0, 1.0, 2.0]).astype(complex)
        estimate = opnorm_p(D, 3.0)
        assert not estimate.exact
        assert estimate.value == pytest.approx(3.0, rel=1e-6)
        assert estimate.value <= 3.0 + 1e-12

    def test_lower_bound(self):
        """测试幂迭代给出下界"""
        rng = np.random.default_rng(7)
        S = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        upper = max(opnorm_p(S, 1.0).value, opnorm_p(S, math.inf).value)
        # Riesz–Thorin: ‖S‖_p ≤ ‖S‖_1^{1/p}‖S‖_∞^{1-1/p}
        assert opnorm_p(S, 3.0).value <= upper + 1e-12

    def test_weighted_identity(self):
        """测试加权下恒等算子范数为 1"""
        weights = np.array([0.5, 1.0, 2.0])
        eye = np.eye(3, dtype=complex)
        for p in (1.0, 1.5, 2.0, 4.0):
            assert opnorm_p(eye, p, weights).value == pytest.approx(1.0)

    def test_to_infinity(self):
        """测试 p → ∞ 的行范数"""
        assert opnorm_pq(self.B, 2.0, math.inf).value == pytest.approx(5.0)

    def test_adjoint_duality(self):
        """测试随机 100×100 复矩阵上 ‖S‖_3 = ‖Sᴴ‖_{3/2}"""
        rng = np.random.default_rng(0)
        for _ in range(5):
            S = rng.standard_normal((100, 100)) + 1j * rng.standard_normal((100, 100))
            primal = opnorm_p(S, 3.0).value
            dual = opnorm_p(S.conj().T, 1.5).value
            assert primal == pytest.approx(dual, rel=1e-6)

    def test_pq_duality(self):
        """测试 ‖S‖_{p→q} = ‖Sᴴ‖_{q′→p′}"""
        rng = np.random.default_rng(3)
        S = rng.standard_normal((30, 30)) + 1j * rng.standard_normal((30, 30))
        assert opnorm_pq(S, 1.5, 4.0).value == pytest.approx(opnorm_pq(S.conj().T, 4.0 / 3.0, 3.0).value, rel=1e-6)


class TestQuasiContractivity:
    """拟压缩审计测试"""

    def setup_method(self):
        self.auditor = SemigroupAuditor(_quiet_config())

    def test_heat_is_contractive(self):
        """测试热方程在 p ∈ {1.5, 2, 4} 上压缩，∞ 不作保证"""
        ctx = _context()
        report = self.auditor.quasi_contractivity_audit(
            ctx, StructuralConstants(), [1.5, 2.0, 4.0, math.inf], [0.01, 0.1]
        )
        assert report.passed
        statuses = {(row.p, row.t): row.status for row in report.rows}
        assert statuses[(2.0, 0.1)] == PASS
        assert statuses[(math.inf, 0.01)] == NO_GUARANTEE
        assert all(row.measured <= 1.0 + 1e-9 for row in report.rows)
        assert self.auditor.consistency_summary(report) == {PASS: 6, NO_GUARANTEE: 2, NOT_LOG_CONVEX: 0}
        assert report.times(4.0) == [0.01, 0.1]

    def test_breach_with_wrong_constants(self):
        """测试负势下声明零常数导致越界"""
        ctx = _context(Q=-20.0)
        report = self.auditor.quasi_contractivity_audit(ctx, StructuralConstants(), [2.0], [0.1])
        assert not report.passed
        assert report.rows[0].status == BREACH
        # λ1 ≈ π² - 20，实测约为 e^{1.0}
        assert report.rows[0].measured > 2.0 * report.rows[0].bound
        assert "rows" in report.to_dict()
        assert report.to_csv().splitlines()[0] == "p,t,measured,bound,margin,method,status"

    def test_summary_flags_non_log_convex_rows(self):
        """测试 p = 2 处高于 p = 4/3 与 p = 4 插值的实测值被标记"""
        rows = [
            TrajectoryRow(p, 0.1, measured, 2.0, 2.0 - measured, "expm", PASS)
            for p, measured in [(4.0 / 3.0, 1.0), (2.0, 1.5), (4.0, 1.0), (math.inf, 1.0)]
        ]
        summary = self.auditor.consistency_summary(TrajectoryReport(rows=rows))
        assert summary == {PASS: 4, NOT_LOG_CONVEX: 1}
        rows[1] = TrajectoryRow(2.0, 0.1, 1.0, 2.0, 1.0, "expm", PASS)
        assert self.auditor.consistency_summary(TrajectoryReport(rows=rows))[NOT_LOG_CONVEX] == 0

    def test_negative_time_rejected(self):
        """测试负时刻"""
        with pytest.raises(BadParameter):
            self.auditor.quasi_contractivity_audit(_context(), StructuralConstants(), [2.0], [-1.0])

    def test_neumann_coercive_mode(self):
        """测试一维 Neumann 例子在 p = 4 时低于 coercive 增长界 e^{3t/8}"""
        ctx = _neumann_context(257)
        times = [0.01, 0.05, 0.2, 0.5]
        closed = self.auditor.quasi_contractivity_audit(ctx, NEUMANN_CONSTANTS, [4.0], times[:1])
        assert closed.rows[0].status == NO_BOUND
        report = self.auditor.quasi_contractivity_audit(ctx, NEUMANN_CONSTANTS, [4.0], times, mode="coercive")
        assert omega_split(NEUMANN_CONSTANTS, 4.0) == pytest.approx(0.375)
        assert [row.status for row in report.rows] == [PASS] * 4
        for row in report.rows:
            assert row.bound == pytest.approx(math.exp(0.375 * row.t))
            assert row.measured <= row.bound


class TestDissipativity:
    """耗散泛函与扇形性测试"""

    def setup_method(self):
        self.ctx = _context(n=129)
        self.op = assemble(self.ctx)
        x = self.ctx.grid.coordinates()[:, 0]
        self.u = np.sin(np.pi * x) * np.exp(3j * x)

    def test_heat_lower_bounds(self):
        """测试 Re⟨L_h u, w_p(u)⟩ 不低于 ε_p h0(|v_p|)"""
        for p in (1.5, 3.0):
            result = dissipativity_functional(self.op, self.u, p, 0.0, self.ctx, StructuralConstants())
            v, _ = power_maps(self.u, p)
            scale = form_h0(self.ctx, v)
            assert result.lower_eps_p is not None and result.lower_eps is not None
            assert result.re_pairing >= result.lower_eps_p - 1e-3 * scale
            assert result.re_pairing >= result.lower_eps - 1e-3 * scale
            assert result.norm_p > 0

    def test_omega_shift(self):
        """测试 ω 项为 ω‖u‖_p^p"""
        base = dissipativity_functional(self.op, self.u, 2.0, 0.0)
        shifted = dissipativity_functional(self.op, self.u, 2.0, 2.0)
        assert shifted.value - base.value == pytest.approx(2.0 * base.norm_p ** 2)
        assert base.lower_eps_p is None

    def test_wrong_length(self):
        """测试向量长度错误"""
        with pytest.raises(BadParameter):
            dissipativity_functional(self.op, np.ones(5), 2.0, 0.0)

    def test_sectoriality(self):
        """测试 A = 1 + i 时 |Im| = Re"""
        ctx = _context(A=1 + 1j)
        op = assemble(ctx)
        x = ctx.grid.coordinates()[:, 0]
        probes = [np.sin(k * np.pi * x) + 0j for k in range(1, 6)]
        loose = sectoriality_check(op, probes, 2.0, 1.0, 0.0, 1.0)
        assert loose.passed
        assert loose.n_probes == 5
        assert loose.max_ratio <= 1.0
        tight = sectoriality_check(op, probes, 2.0, 1.0, 0.0, 0.5)
        assert not tight.passed
        with pytest.raises(BadParameter):
            sectoriality_check(op, probes, 2.0, 0.0, 0.0, 1.0)


class TestResolvent:
    """预解式加权界测试"""

    def setup_method(self):
        self.auditor = SemigroupAuditor(_quiet_config())
        self.op = assemble(_context())

    def test_half_first_eigenvalue_passes(self):
        """测试 U ≡ 4 < λ1 时界成立"""
        U = np.full(self.op.grid.n_nodes, 4.0)
        rows = self.auditor.resolvent_weight_bound(self.op, U, 2.0, [0.5, 1.0, 4.0])
        assert [row.lam for row in rows] == [0.5, 1.0, 4.0]
        assert all(row.status == PASS for row in rows)
        assert rows[0].bound == pytest.approx(0.5 ** -0.5)

    def test_hypothesis_unmet(self):
        """测试 U ≡ 16 > λ1 时前提不成立"""
        U = np.full(self.op.grid.n_nodes, 16.0)
        with pytest.raises(HypothesisUnmet):
            self.auditor.resolvent_weight_bound(self.op, U, 2.0, [1.0])

    def test_negative_weight(self):
        """测试负权重"""
        with pytest.raises(BadParameter):
            self.auditor.resolvent_weight_bound(self.op, -np.ones(self.op.grid.n_nodes), 2.0, [1.0])


class TestLongTimeAudits:
    """加权增长、平滑与截断收敛测试"""

    def setup_method(self):
        self.auditor = SemigroupAuditor(_quiet_config())

    def test_weighted_growth(self):
        """测试热方程加权增长率不超过上界"""
        ctx = _context()
        report = self.auditor.weighted_growth_audit(ctx, 2.0, [0.5, 1.0], [0.05, 0.1], StructuralConstants())
        assert len(report.rows) == 4
        assert report.ceiling_ok is True
        with pytest.raises(BadParameter):
            self.auditor.weighted_growth_audit(ctx, 2.0, [[1.0, 2.0]], [0.1])

    def test_smoothing_exponent(self):
        """测试 ‖S(t)‖_{2→∞} ~ t^{-1/4}"""
        ctx = _context(n=129)
        report = self.auditor.smoothing_audit(ctx, 2.0, [0.002, 0.004, 0.008])
        assert report.exponent == pytest.approx(0.25, abs=0.05)
        assert report.passed
        assert len(report.rows) == 3

    def test_weighted_growth_rate(self):
        """测试 [0, 4] 上热方程扭曲半群的拟合率 μ ≈ 1 (精确为 ξ²)"""
        grid = Grid.line(0.0, 4.0, 1025, "dirichlet")
        ctx = FormContext.from_coefficients(CoefficientSet.build(grid))
        report = self.auditor.weighted_growth_audit(ctx, 2.0, [1.0, 2.0, 4.0], [0.01, 0.025, 0.05])
        assert len(report.rows) == 9
        assert 0.95 <= report.mu <= 1.05

    def test_smoothing_constant(self):
        """测试 ‖S(t)‖_{2→∞} ≈ (8πt)^{-1/4}"""
        ctx = _context(n=257)
        report = self.auditor.smoothing_audit(ctx, 2.0, [0.001, 0.0025, 0.005, 0.01])
        assert report.exponent == pytest.approx(0.25, abs=0.02)
        assert report.constant == pytest.approx((8.0 * math.pi) ** -0.25, rel=0.1)

    def test_truncation_converges(self):
        """测试 m 超过 max U 后轨道不再变化"""
        ctx = _context()
        x = ctx.grid.coordinates()[:, 0]
        report = self.auditor.truncation_convergence(ctx, 100.0 * x, 2.0, [0.0, 50.0, 100.0, 200.0], 0.05)
        assert len(report.gaps) == 3
        assert report.gaps[-1] == 0.0
        assert report.converged
        with pytest.raises(BadParameter):
            self.auditor.truncation_convergence(ctx, 100.0 * x, 2.0, [1.0], 0.05)

"""双线性形式、τ_p 与形式检查测试"""

import numpy as np
import pytest

from src.constants.models import StructuralConstants
from src.fields.models import CoefficientSet, Grid
from src.forms.checks import (
    adjoint_duality_gap,
    check_accretivity_identity,
    omega_tilde_bracket,
    parallelogram_defect,
    t_plus_Uhat_check,
    tau_lower_bound_check,
)
from src.forms.context import FormContext, adjoint_context
from src.forms.functionals import (
    U_hat,
    W_rho,
    exponent_gap,
    form_a,
    form_h0,
    form_t,
    l2_norm_sq,
    tau_p,
    tau_p_signed,
)
from src.forms.probes import mode_functions, probe_family
from src.intervals.formulas import eps_p
from src.mesh.nonlinear import power_maps
from src.utils.exceptions import BadExponent, BadWeight


def _line_context(n=201, bc="neumann", **coefficients):
    grid = Grid.line(0.0, 1.0, n, bc)
    return FormContext.from_coefficients(CoefficientSet.build(grid, **coefficients))


class TestForms:
    """形式求值测试"""

    def setup_method(self):
        self.ctx = _line_context()
        self.x = self.ctx.grid.coordinates()[:, 0]

    def test_form_a_of_linear(self):
        """测试 a(x) = ∫ 1 = 1"""
        assert form_a(self.ctx, self.x) == pytest.approx(1.0)
        assert form_t(self.ctx, self.x, self.x) == pytest.approx(1.0)

    def test_potential_parts(self):
        """测试 h0 只含 V⁺，V⁻ 单独保存"""
        ctx = _line_context(Q=-2.0 + 3.0j)
        ones = np.ones(ctx.grid.n_nodes)
        assert form_h0(ctx, ones) == pytest.approx(0.0)
        assert np.allclose(ctx.V_minus, 2.0)
        assert np.allclose(ctx.W, 3.0)
        assert form_t(ctx, ones, ones) == pytest.approx(-2.0 + 3.0j)

    def test_sesquilinear(self):
        """测试 t 对第一个变量线性、对第二个变量共轭线性"""
        ctx = _line_context(A=1 + 1j, b1=[0.3j], b2=[0.2], Q=0.5j)
        u = np.exp(1j * self.x)
        v = np.cos(np.pi * self.x) + 0j
        assert form_t(ctx, 2j * u, v) == pytest.approx(2j * form_t(ctx, u, v))
        assert form_t(ctx, u, 2j * v) == pytest.approx(-2j * form_t(ctx, u, v))

    def test_exponent_gap(self):
        """测试 γ = 1 - 2/p"""
        assert exponent_gap(2.0) == 0.0
        assert exponent_gap(4.0) == 0.5
        assert exponent_gap(np.inf) == 1.0
        with pytest.raises(BadExponent):
            exponent_gap(0.5)

    def test_tau_at_two_is_real_part(self):
        """测试 τ_2(v) = Re t(v)"""
        ctx = _line_context(A=1 + 0.5j, b1=[0.4])
        v = (2 + np.cos(np.pi * self.x)) * np.exp(1j * self.x)
        assert tau_p(ctx, v, 2.0) == pytest.approx(form_t(ctx, v, v).real)

    def test_U_hat_and_W_rho(self):
        """测试 Ŭ = ¼|Re b|²‖v‖² 与 W_ρ = |∇log ρ|²"""
        ctx = _line_context(bc="dirichlet", b1=[0.6], b2=[0.4])
        ones = np.ones(ctx.grid.n_nodes)
        assert U_hat(ctx, ones) == pytest.approx(0.25)
        assert W_rho(ctx, np.exp(self.x), ones) == pytest.approx(1.0)
        rho = np.exp(self.x)
        rho[5] = 0.0
        with pytest.raises(BadWeight):
            W_rho(ctx, rho, ones)

    def test_with_potential_and_adjoint(self):
        """测试附加势与伴随上下文"""
        ctx = _line_context(A=1 + 1j, b1=[1j])
        shifted = ctx.with_potential(np.full(ctx.grid.n_nodes, 2.0))
        assert np.allclose(shifted.cs.Q.values, 2.0)
        adj = adjoint_context(ctx)
        assert np.allclose(adj.cs.A.values, 1 - 1j)
        assert np.allclose(adj.cs.b2.values, 1j)


class TestChecks:
    """恒等式与不等式检查测试"""

    def setup_method(self):
        self.x = Grid.line(0.0, 1.0, 201).coordinates()[:, 0]
        self.u = (2 + np.cos(np.pi * self.x)) * np.exp(1j * self.x)

    @pytest.mark.parametrize("p", [1.5, 3.0, 4.0])
    def test_identity_for_real_coefficients(self, p):
        """测试实系数时 Re t(u, w_p(u)) = τ_p(v_p(u)) 到 O(h²)"""
        ctx = _line_context(A=2.0)
        check = check_accretivity_identity(ctx, self.u, p)
        v, _ = power_maps(self.u, p)
        scale = form_h0(ctx, v) + l2_norm_sq(ctx, v)
        assert abs(check.identity_residual) <= 1e-3 * scale
        assert abs(check.residual) <= 1e-3 * scale

    @pytest.mark.parametrize("p", [1.5, 3.0, 6.0])
    def test_identity_residual_is_second_order(self, p):
        """测试带符号恒等式的残差随网格加密按 h² 下降，且 Re t(u, w_p(u)) ≥ τ_p(v)"""
        residuals = []
        # 相位方向取 1 - 2/p 的符号，使 τ_p 严格小于带符号版本
        s = 1.0 if p > 2 else -1.0
        for n in (65, 129, 257):
            ctx = _line_context(n=n, A=1 + 0.5j, b1=[0.3])
            x = ctx.grid.coordinates()[:, 0]
            u = (2 + np.cos(np.pi * x)) * np.exp(1j * s * x)
            check = check_accretivity_identity(ctx, u, p)
            residuals.append(abs(check.identity_residual))
        orders = np.log2(np.array(residuals[:-1]) / np.array(residuals[1:]))
        assert np.all(orders >= 1.5)
        assert check.residual >= -1e-8

    def test_accretive_for_complex_coefficients(self):
        """测试复系数时残差非负"""
        ctx = _line_context(A=1 + 1j)
        for p in (1.5, 2.0, 3.0):
            check = check_accretivity_identity(ctx, self.u, p)
            assert check.residual >= -1e-3 * abs(check.re_t)
            assert check.floored_fraction == 0.0

    def test_tau_signed_bounds_tau(self):
        """测试 τ_p ≤ 带符号版本"""
        ctx = _line_context(A=1 + 1j)
        v = (2 + np.sin(3 * self.x)) * np.exp(2j * self.x ** 2)
        assert tau_p(ctx, v, 3.0) <= tau_p_signed(ctx, v, 3.0) + 1e-12

    def test_lower_bound_for_heat(self):
        """测试热方程: τ_p(v) ≥ ε_p h0(|v|)"""
        ctx = _line_context(bc="dirichlet")
        constants = StructuralConstants()
        v = np.sin(np.pi * self.x) * np.exp(1j * 3 * self.x)
        for p in (1.5, 2.0, 4.0):
            check = tau_lower_bound_check(constants, ctx, v, p)
            assert check.margin >= -1e-12
            assert check.eps == 0.0

    def test_lower_bound_rejects_bad_eps(self):
        """测试 ε 超出 [0, 1)"""
        ctx = _line_context()
        with pytest.raises(ValueError):
            tau_lower_bound_check(StructuralConstants(), ctx, self.u, 2.0, eps=1.0)

    def test_adjoint_duality(self):
        """测试 τ_p(v) = τ*_{p′}(v)"""
        ctx = _line_context(A=1 + 0.7j, b1=[0.3 + 0.2j], b2=[-0.1j], Q=0.4)
        for p in (1.5, 3.0, 6.0):
            a, b = adjoint_duality_gap(ctx, self.u, p)
            assert a == pytest.approx(b, abs=1e-10)

    def test_adjoint_duality_on_random_functions(self):
        """测试 200 个随机光滑函数上 τ_p = τ*_{p′}"""
        ctx = _line_context(A=1 + 0.7j, b1=[0.3 + 0.2j], b2=[-0.1j], Q=0.4)
        probes = probe_family(ctx.grid, 6, 194, 5)
        assert len(probes) == 200
        for p, v in zip([1.5, 3.0, 6.0] * 67, probes):
            a, b = adjoint_duality_gap(ctx, v, p)
            assert a == pytest.approx(b, rel=1e-10, abs=1e-10)

    def test_uhat_absorbs_real_drift(self):
        """测试 Re t(v) - τ_p(v) + Ŭ(v) ≥ 0"""
        ctx = _line_context(b1=[1.5])
        for p in (1.5, 3.0, 8.0):
            assert t_plus_Uhat_check(ctx, self.u, p) >= -1e-12

    def test_omega_tilde_bracket(self):
        """测试热方程的 ω̃_p 括号一致"""
        ctx = _line_context(bc="dirichlet")
        probes = [ctx.mesh.apply_bc(v) for v in probe_family(ctx.grid, 4, 10, 1)]
        bracket = omega_tilde_bracket(ctx, StructuralConstants(), 3.0, probes)
        assert bracket.consistent
        assert bracket.upper == 0.0
        assert bracket.n_probes == 14
        assert bracket.to_dict()["status"] == "bracketed"

    def test_parallelogram_defect(self):
        """测试 τ_2 满足平行四边形律而 τ_4 不满足"""
        ctx = _line_context()
        w = 1.0 + self.x
        assert parallelogram_defect(ctx, w, 2.0, 1.0) == pytest.approx(0.0, abs=1e-10)
        # A = 1 时亏量为 -4γ²m²a(w)
        expected = -4.0 * exponent_gap(4.0) ** 2 * form_a(ctx, w)
        assert parallelogram_defect(ctx, w, 4.0, 1.0) == pytest.approx(expected, rel=1e-2)
        with pytest.raises(ValueError):
            parallelogram_defect(ctx, w - 1.5, 4.0, 1.0)

    def test_eps_matches_heat_interval(self):
        """测试热方程 ε_p = 4/(pp′)"""
        assert eps_p(StructuralConstants(), 4.0) == pytest.approx(0.75)


class TestProbes:
    """探针族测试"""

    def test_dirichlet_modes_vanish_on_boundary(self):
        """测试 Dirichlet 模态在边界为零"""
        grid = Grid.box((0.0, 1.0), (0.0, 1.0), 9, "dirichlet")
        modes = mode_functions(grid, 3)
        assert len(modes) == 6
        for m in modes:
            assert np.allclose(m[grid.boundary_mask()], 0.0, atol=1e-12)

    def test_counts_and_seed(self):
        """测试数量与种子可复现"""
        grid = Grid.line(0.0, 1.0, 33)
        a = probe_family(grid, 4, 5, seed=3)
        b = probe_family(grid, 4, 5, seed=3)
        assert len(a) == 9
        assert all(np.array_equal(x, y) for x, y in zip(a, b))

    def test_positive_probes(self):
        """测试非负实探针"""
        grid = Grid.line(0.0, 1.0, 33, "neumann")
        probes = probe_family(grid, 4, 5, positive=True)
        assert len(probes) == 6
        assert all(np.all(np.real(p) > 0) for p in probes)

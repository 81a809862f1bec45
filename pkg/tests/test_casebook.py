"""算例测试"""

import math

import pytest

from src.casebook.examples import (
    NEUMANN_CONSTANTS,
    NEUMANN_P,
    divergence_free_invariance,
    drift_synthesis_demo,
    hardy,
    hardy_constants,
    hardy_surrogate_run,
    neumann_closed_form,
    neumann_counterexample,
    neumann_tau_sweep,
)
from src.intervals.formulas import eps_p, interval_I
from src.utils.config import Config
from src.utils.exceptions import BadParameter, ModeError


class TestHardy:
    """Hardy 阈值测试"""

    def test_thresholds(self):
        """测试 β = 0.75, N = 5"""
        th = hardy(0.75, 5)
        assert th.p_minus == pytest.approx(4.0 / 3.0)
        assert th.p_plus == pytest.approx(4.0)
        assert th.p_max == pytest.approx(20.0 / 3.0)
        assert th.p_min == pytest.approx(20.0 / 17.0)

    def test_interval_endpoints_match(self):
        """测试 γ = β 时 I = [p₋, p₊]"""
        interval = interval_I(hardy_constants(0.75))
        assert interval.lower == pytest.approx(4.0 / 3.0)
        assert interval.upper == pytest.approx(4.0)

    def test_invalid(self):
        """测试 β 与 N 的范围"""
        with pytest.raises(BadParameter):
            hardy(1.0, 5)
        with pytest.raises(BadParameter):
            hardy(0.5, 2)


class TestNeumann:
    """Neumann 反例测试"""

    def test_endpoint_is_on_boundary(self):
        """测试 p = 4 + 2√2 是 I 的右端点"""
        assert interval_I(NEUMANN_CONSTANTS).upper == pytest.approx(NEUMANN_P)
        assert eps_p(NEUMANN_CONSTANTS, NEUMANN_P) == pytest.approx(0.0, abs=1e-12)

    def test_closed_form(self):
        """测试 (e^{-√8λ} - 1)/√8"""
        root8 = math.sqrt(8.0)
        assert neumann_closed_form(10.0) == pytest.approx((math.exp(-root8 * 10.0) - 1.0) / root8)
        assert neumann_closed_form(1e6) == pytest.approx(-1.0 / root8)

    def test_counterexample(self):
        """测试求积、离散值与闭式一致，且泛函趋于负常数"""
        report = neumann_counterexample([1.0, 2.0, 5.0, 10.0])
        assert report.quadrature_ok
        assert report.discrete_ok
        assert report.norm_decreasing
        assert report.interior_ok
        assert report.passed
        assert report.limit == pytest.approx(-1.0 / math.sqrt(8.0))
        assert report.rows[-1].discrete < 0.0
        assert report.to_dict()["passed"]

    def test_alternative_profile(self):
        """测试五次剖面给出同样的闭式值"""
        report = neumann_counterexample([2.0, 5.0], profile="quintic")
        assert report.quadrature_ok
        assert report.rows[0].closed_form == pytest.approx(neumann_closed_form(2.0))

    def test_invalid_arguments(self):
        """测试未知剖面与非正 λ"""
        with pytest.raises(BadParameter):
            neumann_counterexample([1.0], profile="linear")
        with pytest.raises(BadParameter):
            neumann_counterexample([0.0])


class TestNeumannTauSweep:
    """Neumann 算例上 τ_p 下界扫描测试"""

    def test_small_beta_prime(self):
        """测试 β′ = 0.1 时 closed 模式的下界在 ε = 0 与 ε_max/2 都成立"""
        report = neumann_tau_sweep([2.0, 4.0, 6.0], n_probes=40, n=65)
        assert len(report.rows) == 6
        assert report.passed
        assert report.mode == "closed"
        assert report.to_dict()["constants"]["beta_prime"] == pytest.approx(0.1)

    def test_full_sweep(self):
        """测试默认的 500 个探针、p ∈ {2, 4, 6} 上下界成立"""
        report = neumann_tau_sweep()
        assert report.n_probes == 500
        assert len(report.rows) == 6
        assert {row.eps > 0 for row in report.rows} == {False, True}
        assert report.passed

    def test_degenerate_constants(self):
        """测试 β′ = 0 时只检查 ε = 0，且需 coercive 模式"""
        report = neumann_tau_sweep([4.0], n_probes=20, n=65, constants=NEUMANN_CONSTANTS, mode="coercive")
        assert [row.eps for row in report.rows] == [0.0]
        assert report.passed
        with pytest.raises(ModeError):
            neumann_tau_sweep([4.0], n_probes=20, n=65, constants=NEUMANN_CONSTANTS)

    def test_invalid_arguments(self):
        """测试空 p 列表与探针数"""
        with pytest.raises(BadParameter):
            neumann_tau_sweep([])
        with pytest.raises(BadParameter):
            neumann_tau_sweep([2.0], n_probes=1)


class TestDivergenceFree:
    """反对称部分不变性测试"""

    def test_dirichlet_invariant_neumann_not(self):
        """测试 Dirichlet 下形式与 c 无关，Neumann 下不然"""
        report = divergence_free_invariance([0.0, 1.0, 5.0], n=9, n_probes=10)
        assert report.passed
        assert [row.status for row in report.rows] == ["PASS"] * 3
        assert report.rows[0].neumann_deviation == 0.0
        assert report.rows[2].neumann_deviation > 1e-6
        assert report.rows[2].neumann_status == "EXPECTED"


class TestDriftSynthesis:
    """漂移常数合成测试"""

    def test_demo(self):
        """测试 (1, 2, 4) ↦ (4, 8)"""
        assert drift_synthesis_demo(1.0, 2.0, 4.0) == pytest.approx((4.0, 8.0))


class TestHardySurrogate:
    """Hardy 替代算例测试"""

    def test_truncation_shrinks_then_saturates(self):
        """测试间隙在 m 越过 max U = 187.5 之前严格缩小，之后为 0"""
        config = Config(data={"performance": {"threads": 1, "show_progress": False}})
        report = hardy_surrogate_run(0.75, [10.0, 100.0, 1000.0, 10000.0], config=config)
        gaps = report.truncation.gaps
        assert gaps[0] > gaps[1] > 0.0
        assert gaps[2] == 0.0
        assert report.truncation.passed
        assert report.thresholds.p_plus == pytest.approx(4.0)
        assert report.to_dict()["label"] == "qualitative"

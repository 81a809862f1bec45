"""命令行入口测试"""

import json

import pytest
import yaml

from main import EXIT_BREACH, EXIT_OK, EXIT_USAGE, run


@pytest.fixture
def settings_file(tmp_path):
    """线程数为 1、日志写入临时目录的运行配置"""
    path = tmp_path / "settings.yaml"
    path.write_text(
        yaml.safe_dump({
            "logging": {"level": "WARNING", "file": str(tmp_path / "logs" / "run.log")},
            "probes": {"n_random": 10, "n_modes": 4},
            "performance": {"threads": 1, "show_progress": False},
        }),
        encoding="utf-8",
    )
    return str(path)


def _problem(tmp_path, **extra):
    doc = {"grid": {"extent": [[0, 1]], "n": [65]}, "bc": "dirichlet"}
    doc.update(extra)
    path = tmp_path / "problem.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


class TestIntervalCommand:
    """interval 子命令测试"""

    def test_skew_interval(self, settings_file, capsys):
        """测试 α_s = 1, B′ = 1 的区间"""
        code = run(["interval", "--alpha-s", "1", "--B-prime", "1", "--config-file", settings_file])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert out.splitlines()[0] == "I = [1.171573, 6.828427]"

    def test_json_output(self, settings_file, capsys, tmp_path):
        """测试 JSON 输出与 --output"""
        target = tmp_path / "out" / "interval.json"
        code = run([
            "interval", "--gamma", "0.75", "--N", "5", "--json",
            "--config-file", settings_file, "--output", str(target),
        ])
        assert code == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["I"]["lower"] == pytest.approx(4.0 / 3.0)
        assert data["I"]["upper"] == pytest.approx(4.0)
        assert data["extended"]["p_max"] == pytest.approx(20.0 / 3.0)
        assert json.loads(target.read_text(encoding="utf-8")) == data

    def test_csv_output(self, settings_file, capsys):
        """测试 CSV 输出"""
        code = run(["interval", "--p", "2", "4", "--csv", "--config-file", settings_file])
        assert code == EXIT_OK
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "p,eps,omega_hat,B_hat,in_I,mu,omega"
        assert len(lines) == 3


class TestUsageErrors:
    """用法错误的退出码测试"""

    def test_missing_subcommand(self):
        """测试缺少子命令"""
        assert run([]) == EXIT_USAGE

    def test_unknown_option(self, settings_file):
        """测试未知参数"""
        assert run(["interval", "--bogus", "1", "--config-file", settings_file]) == EXIT_USAGE

    def test_missing_coefficients(self, settings_file):
        """测试需要 --config 的子命令"""
        assert run(["analyze", "--config-file", settings_file]) == EXIT_USAGE

    def test_missing_file(self, settings_file, tmp_path):
        """测试系数文件不存在"""
        code = run(["verify", "--config", str(tmp_path / "none.json"), "--config-file", settings_file])
        assert code == EXIT_USAGE

    def test_missing_settings(self, tmp_path):
        """测试运行配置文件不存在"""
        assert run(["interval", "--config-file", str(tmp_path / "none.yaml")]) == EXIT_USAGE

    def test_bad_mode(self, settings_file):
        """测试未知增长界模式"""
        assert run(["interval", "--mode", "fast", "--config-file", settings_file]) == EXIT_USAGE


class TestProblemCommands:
    """analyze / simulate / verify 子命令测试"""

    def test_simulate_heat_passes(self, settings_file, tmp_path, capsys):
        """测试热方程审计通过"""
        problem = _problem(tmp_path)
        code = run([
            "simulate", "--config", problem, "--declared-only", "--p", "2", "4", "--t", "0.05",
            "--config-file", settings_file,
        ])
        assert code == EXIT_OK
        assert capsys.readouterr().out.count("PASS") == 2

    def test_simulate_breach(self, settings_file, tmp_path):
        """测试声明常数错误时退出码为 2"""
        problem = _problem(tmp_path, Q=-20.0)
        code = run([
            "simulate", "--config", problem, "--declared-only", "--p", "2", "--t", "0.1",
            "--config-file", settings_file,
        ])
        assert code == EXIT_BREACH

    def test_analyze_reports_provenance(self, settings_file, tmp_path, capsys):
        """测试 analyze 的常数来源"""
        problem = _problem(tmp_path, A="1 + 1i", constants={"gamma": 0.0})
        code = run(["analyze", "--config", problem, "--json", "--mode", "coercive", "--config-file", settings_file])
        assert code == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["constants"]["alpha_s"] == pytest.approx(1.0)
        assert data["constants"]["provenance"]["gamma"] == "declared"
        assert data["constants"]["provenance"]["alpha_s"] == "measured"
        assert data["mode"] == "coercive"

    def test_verify_heat(self, settings_file, tmp_path, capsys):
        """测试热方程的形式检查"""
        problem = _problem(tmp_path)
        run(["verify", "--config", problem, "--declared-only", "--json", "--config-file", settings_file])
        checks = json.loads(capsys.readouterr().out)["checks"]
        assert len(checks) == 15
        by_name = {}
        for check in checks:
            by_name.setdefault(check["check"], []).append(check["status"])
        assert by_name["adjoint_duality"] == ["PASS"] * 3
        assert by_name["tau_lower_bound"] == ["PASS"] * 3
        assert by_name["t_plus_Uhat"] == ["PASS"] * 3
        assert by_name["omega_tilde_bracket"] == ["PASS"] * 3


class TestExampleCommand:
    """example 子命令测试"""

    def test_hardy(self, settings_file, capsys):
        """测试 Hardy 阈值"""
        assert run(["example", "hardy", "--beta", "0.75", "--N", "5", "--config-file", settings_file]) == EXIT_OK
        out = capsys.readouterr().out
        assert "p_minus = 1.333333333333" in out
        assert "p_plus = 4.000000000000" in out
        assert "p_max = 6.666666666667" in out
        assert "p_min = 1.176470588235" in out

    def test_drift_synthesis(self, settings_file, capsys):
        """测试漂移常数合成"""
        code = run([
            "example", "drift-synthesis", "--alpha-a", "1", "--beta-hat", "2", "--B-hat", "4",
            "--config-file", settings_file,
        ])
        assert code == EXIT_OK
        assert "β′ = 4, B′ = 8" in capsys.readouterr().out

    def test_bad_beta(self, settings_file):
        """测试 β 超出 (0, 1)"""
        assert run(["example", "hardy", "--beta", "1.5", "--config-file", settings_file]) == EXIT_USAGE

    def test_tau_sweep(self, settings_file, capsys):
        """测试 τ_p 下界扫描"""
        code = run([
            "example", "tau-sweep", "--p", "2", "4", "--n", "65", "--n-probes", "20", "--json",
            "--config-file", settings_file,
        ])
        assert code == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["passed"]
        assert [row["p"] for row in data["rows"]] == [2.0, 2.0, 4.0, 4.0]

#!/usr/bin/env python3
"""
semigroup-lab - 复系数椭圆算子在 L^p 上的拟压缩性分析
主入口文件
"""

import argparse
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from src.casebook.examples import (
    divergence_free_invariance,
    drift_synthesis_demo,
    hardy,
    hardy_surrogate_run,
    neumann_counterexample,
    neumann_tau_sweep,
)
from src.constants.extractor import ConstantsExtractor
from src.constants.models import CONSTANT_NAMES, StructuralConstants
from src.fields.loader import LoadedProblem, load_coefficients
from src.forms.checks import (
    adjoint_duality_gap,
    check_accretivity_identity,
    omega_tilde_bracket,
    t_plus_Uhat_check,
    tau_lower_bound_check,
)
from src.forms.context import FormContext
from src.forms.functionals import form_h0, l2_norm_sq
from src.forms.probes import probe_family
from src.intervals.formulas import interval_I, report
from src.intervals.models import GrowthMode, Interval
from src.semigroup.audits import SemigroupAuditor
from src.utils.config import Config
from src.utils.exceptions import ConfigError, ModeError, SemigroupLabError
from src.utils.logger import setup_logger
from src.utils.serialization import dumps, rows_to_csv

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_BREACH = 2
DEFAULT_SETTINGS = "config/settings.yaml"
DEFAULT_P_GRID = [1.5, 2.0, 3.0, 4.0, 6.0]


class UsageError(Exception):
    pass


class CliParser(argparse.ArgumentParser):
    """用法错误返回退出码 1，而不是 argparse 默认的 2 (2 留给越界)"""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _fmt(value: Optional[float], digits: int = 6) -> str:
    if value is None:
        return "-"
    if math.isinf(value):
        return "∞"
    return f"{value:.{digits}f}"


def format_interval(interval: Interval) -> str:
    if interval.empty:
        return "I = ∅"
    return f"I = [{_fmt(interval.lower)}, {_fmt(interval.upper)}]"


def emit(args: argparse.Namespace, payload: Any, rows: List[Dict[str, Any]], columns: Sequence[str], text: str) -> None:
    """按 --json / --csv / 默认表格输出，--output 时同时写文件"""
    if args.json:
        out = dumps(payload)
    elif args.csv:
        out = rows_to_csv(rows, columns)
    else:
        out = text
    print(out)
    if args.output:
        path = Path(args.output)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(out, encoding="utf-8")


def load_settings(args: argparse.Namespace) -> Config:
    path = args.config_file
    if path == DEFAULT_SETTINGS and not Path(path).exists():
        config = Config.default()
    else:
        config = Config(path)
    if args.log_level:
        config.logging.level = args.log_level.upper()
    if args.seed is not None:
        config.probes.seed = args.seed
    if args.threads is not None:
        config.performance.threads = max(1, args.threads)
    config.validate()
    return config


def load_problem(args: argparse.Namespace, config: Config) -> LoadedProblem:
    if not args.config:
        raise UsageError("该子命令需要 --config <系数 JSON 文件>")
    return load_coefficients(
        args.config,
        max_nodes=config.grid.max_nodes,
        min_nodes_per_axis=config.grid.min_nodes_per_axis,
    )


def build_context(problem: LoadedProblem, config: Config) -> FormContext:
    return FormContext.from_coefficients(problem.coefficients, numerics=config.numerics)


def resolve_constants(
    problem: LoadedProblem,
    ctx: FormContext,
    config: Config,
    declared_only: bool = False,
) -> StructuralConstants:
    if declared_only:
        return StructuralConstants.declared(**problem.declared)
    return ConstantsExtractor(config).extract(ctx, problem.declared)


def _mode(args: argparse.Namespace, problem: Optional[LoadedProblem] = None) -> GrowthMode:
    if getattr(args, "mode", None):
        return GrowthMode.parse(args.mode)
    return GrowthMode.parse(problem.mode if problem is not None else "closed")


def interval_text(rep: Any) -> str:
    lines = [format_interval(rep.interval)]
    lines.append(f"{'p':>10} {'ε_p':>12} {'ω̂_p':>12} {'B̂_p':>12} {'in I':>6} {'μ_p':>10} {'ω_p':>10}")
    for row in rep.rows:
        lines.append(
            f"{_fmt(row.p, 4):>10} {row.eps:>12.6f} {_fmt(row.omega_hat):>12} {row.B_hat:>12.6f} "
            f"{str(row.in_I):>6} {_fmt(row.mu, 4):>10} {_fmt(row.omega, 4):>10}"
        )
    if rep.extended is not None:
        lines.append(f"外推端点 (bracketed): p_min={_fmt(rep.extended[0])}, p_max={_fmt(rep.extended[1])}")
    lines.extend(f"注: {note}" for note in rep.notes)
    return "\n".join(lines)


INTERVAL_COLUMNS = ["p", "eps", "omega_hat", "B_hat", "in_I", "mu", "omega"]


def cmd_interval(args: argparse.Namespace, config: Config) -> int:
    values = {name: getattr(args, name) for name in CONSTANT_NAMES if getattr(args, name, None) is not None}
    constants = StructuralConstants.declared(**values)
    rep = report(constants, args.p or DEFAULT_P_GRID, _mode(args), args.N)
    emit(args, rep.to_dict(), [row.__dict__ for row in rep.rows], INTERVAL_COLUMNS, interval_text(rep))
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace, config: Config) -> int:
    problem = load_problem(args, config)
    ctx = build_context(problem, config)
    constants = resolve_constants(problem, ctx, config)
    rep = report(constants, args.p or DEFAULT_P_GRID, _mode(args, problem), args.N)
    consts = "\n".join(
        f"  {name:<10} = {getattr(constants, name):.6g} ({constants.provenance.get(name, 'declared')})"
        for name in CONSTANT_NAMES
    )
    emit(
        args,
        rep.to_dict(),
        [row.__dict__ for row in rep.rows],
        INTERVAL_COLUMNS,
        f"结构常数:\n{consts}\n{interval_text(rep)}",
    )
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace, config: Config) -> int:
    problem = load_problem(args, config)
    ctx = build_context(problem, config)
    mode = _mode(args, problem)
    auditor = SemigroupAuditor(config)
    p_list = args.p or [2.0]
    t_list = args.t or [0.1]

    if args.audit == "weighted":
        constants = resolve_constants(problem, ctx, config, args.declared_only)
        wrep = auditor.weighted_growth_audit(ctx, p_list[0], args.xi or [1.0, 2.0], t_list, constants, mode)
        text = f"μ = {wrep.mu:.6f}, ω = {wrep.omega:.6f}, 上界检查: {wrep.ceiling_ok}"
        emit(args, wrep.to_dict(), wrep.rows, ["xi", "t", "norm", "rate", "fitted"], text)
        return EXIT_OK if wrep.ceiling_ok is not False else EXIT_BREACH

    if args.audit == "smoothing":
        r = math.inf if args.r is None else args.r
        srep = auditor.smoothing_audit(ctx, p_list[0], t_list, r)
        text = f"‖S(t)‖_{{p→r}} ≈ {srep.constant:.6g}·t^(-{srep.exponent:.4f}), 通过: {srep.passed}"
        emit(args, srep.to_dict(), srep.rows, ["t", "norm", "fitted"], text)
        return EXIT_OK if srep.passed else EXIT_BREACH

    constants = resolve_constants(problem, ctx, config, args.declared_only)
    trep = auditor.quasi_contractivity_audit(ctx, constants, p_list, t_list, mode)
    lines = [f"{'p':>8} {'t':>8} {'measured':>14} {'bound':>14} {'margin':>12}  status"]
    for row in trep.rows:
        lines.append(
            f"{row.p:>8.4g} {row.t:>8.4g} {row.measured:>14.8f} {_fmt(row.bound, 8):>14} "
            f"{_fmt(row.margin, 6):>12}  {row.status}"
        )
    rows = [row.__dict__ for row in trep.rows]
    emit(args, trep.to_dict(), rows, ["p", "t", "measured", "bound", "margin", "method", "status"], "\n".join(lines))
    return EXIT_OK if trep.passed else EXIT_BREACH


def run_verify_suite(
    ctx: FormContext,
    constants: StructuralConstants,
    p_list: Sequence[float],
    mode: GrowthMode,
    config: Config,
    tol: float,
) -> List[Dict[str, Any]]:
    """形式层面的恒等式/不等式检查，每项给出最坏的相对值"""
    settings = config.probes
    probes = probe_family(ctx.grid, settings.n_modes, min(settings.n_random, 20), settings.seed)
    probes = [ctx.mesh.apply_bc(v) for v in probes]
    scale = [form_h0(ctx, v) + l2_norm_sq(ctx, v) for v in probes]
    interval = interval_I(constants)
    results: List[Dict[str, Any]] = []

    def record(name: str, p: float, value: Optional[float], passed: Optional[bool], note: str = "") -> None:
        status = "SKIPPED" if passed is None else ("PASS" if passed else "FAIL")
        results.append({"check": name, "p": p, "value": value, "status": status, "note": note})

    for p in p_list:
        worst = min(check_accretivity_identity(ctx, v, p, config.numerics.floor).residual / s for v, s in zip(probes, scale))
        record("accretivity", p, worst, worst >= -tol)

        if interval.contains(p):
            try:
                margin = min(tau_lower_bound_check(constants, ctx, v, p, 0.0, mode).margin / s for v, s in zip(probes, scale))
                record("tau_lower_bound", p, margin, margin >= -tol)
            except ModeError as e:
                record("tau_lower_bound", p, None, None, str(e))
        else:
            record("tau_lower_bound", p, None, None, "p ∉ I")

        gap = max(abs(a - b) / s for (a, b), s in zip((adjoint_duality_gap(ctx, v, p) for v in probes), scale))
        record("adjoint_duality", p, gap, gap <= 1e-10)

        uhat = min(t_plus_Uhat_check(ctx, v, p) / s for v, s in zip(probes, scale))
        record("t_plus_Uhat", p, uhat, uhat >= -tol)

        try:
            bracket = omega_tilde_bracket(ctx, constants, p, probes, mode)
            record("omega_tilde_bracket", p, bracket.lower, bracket.consistent, f"upper={bracket.upper:.6g}")
        except SemigroupLabError as e:
            record("omega_tilde_bracket", p, None, None, str(e))
    return results


def cmd_verify(args: argparse.Namespace, config: Config) -> int:
    problem = load_problem(args, config)
    ctx = build_context(problem, config)
    constants = resolve_constants(problem, ctx, config, args.declared_only)
    results = run_verify_suite(ctx, constants, args.p or [1.5, 2.0, 3.0], _mode(args, problem), config, args.tol)
    lines = [f"{r['check']:<22} p={r['p']:<8g} {_fmt(r['value'], 10):>16}  {r['status']} {r['note']}" for r in results]
    emit(args, {"checks": results}, results, ["check", "p", "value", "status", "note"], "\n".join(lines))
    return EXIT_BREACH if any(r["status"] == "FAIL" for r in results) else EXIT_OK


def cmd_example(args: argparse.Namespace, config: Config) -> int:
    name = args.name
    if name == "hardy":
        th = hardy(args.beta, args.N)
        text = "\n".join(
            f"{key} = {getattr(th, key):.12f}" for key in ("p_minus", "p_plus", "p_max", "p_min")
        )
        emit(args, th.to_dict(), [th.to_dict()], list(th.to_dict()), text)
        return EXIT_OK

    if name == "neumann":
        lams = args.lam or [1.0, 2.0, 5.0, 10.0]
        nrep = neumann_counterexample(lams, n=args.n or 2049)
        lines = [f"p = {nrep.p:.10f}, 极限 = {nrep.limit:.10f}, I = {nrep.interval}"]
        lines += [
            f"λ={r.lam:<6g} closed={r.closed_form:.10f} quad={r.quadrature:.10f} "
            f"discrete={r.discrete:.10f} ‖u‖_p={r.norm_p:.6g}"
            for r in nrep.rows
        ]
        rows = [r.__dict__ for r in nrep.rows]
        emit(args, nrep.to_dict(), rows, ["lam", "closed_form", "quadrature", "discrete", "norm_p"], "\n".join(lines))
        return EXIT_OK if nrep.passed else EXIT_BREACH

    if name == "tau-sweep":
        srep = neumann_tau_sweep(
            args.p or [2.0, 4.0, 6.0],
            n_probes=args.n_probes,
            n=args.n or 129,
            seed=config.probes.seed,
            mode=_mode(args),
        )
        rows = [r.__dict__ for r in srep.rows]
        lines = [f"p={r.p:<6g} ε={r.eps:.6f} min margin={r.min_margin:.3e}" for r in srep.rows]
        lines.append("PASS" if srep.passed else "BREACH")
        emit(args, srep.to_dict(), rows, ["p", "eps", "min_margin", "worst_probe"], "\n".join(lines))
        return EXIT_OK if srep.passed else EXIT_BREACH

    if name == "divergence-free":
        drep = divergence_free_invariance(args.c or [0.0, 1.0, 5.0], n=args.n or 33, seed=config.probes.seed)
        lines = [
            f"c={r.c:<6g} dirichlet={r.dirichlet_deviation:.3e} {r.status}  neumann={r.neumann_deviation:.3e} {r.neumann_status}"
            for r in drep.rows
        ]
        rows = [r.__dict__ for r in drep.rows]
        emit(args, drep.to_dict(), rows, ["c", "dirichlet_deviation", "neumann_deviation", "status", "neumann_status"], "\n".join(lines))
        return EXIT_OK if drep.passed else EXIT_BREACH

    if name == "drift-synthesis":
        beta_prime, B_prime = drift_synthesis_demo(args.alpha_a, args.beta_hat, args.B_hat)
        payload = {"beta_prime": beta_prime, "B_prime": B_prime}
        emit(args, payload, [payload], ["beta_prime", "B_prime"], f"β′ = {beta_prime:.12g}, B′ = {B_prime:.12g}")
        return EXIT_OK

    hrep = hardy_surrogate_run(args.beta, args.m or [10.0, 100.0, 1000.0, 10000.0], n=args.n or 33, config=config)
    tr = hrep.truncation
    rows = [{"m": m, "gap": g} for m, g in zip(tr.m_values[1:], tr.gaps)]
    text = "\n".join(f"m={row['m']:<8g} gap={row['gap']:.3e}" for row in rows) + f"\n({hrep.label}) 单调: {tr.monotone}"
    emit(args, hrep.to_dict(), rows, ["m", "gap"], text)
    return EXIT_OK


def build_parser() -> CliParser:
    parser = CliParser(
        prog="semigroup-lab",
        description="semigroup-lab - 复系数椭圆算子在 L^p 上的拟压缩性分析",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
示例用法:
  semigroup-lab interval --alpha-s 1 --B-prime 1
  semigroup-lab analyze --config problem.json --p 2 4 6
  semigroup-lab simulate --config problem.json --p 4 --t 0.5 --csv
  semigroup-lab verify --config problem.json
  semigroup-lab example hardy --beta 0.75 --N 5
        """,
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, help="系数配置 JSON 文件")
    common.add_argument("--config-file", type=str, default=DEFAULT_SETTINGS, help="运行参数 YAML 文件")
    common.add_argument("--log-level", type=str, help="日志级别")
    common.add_argument("--seed", type=int, help="随机种子 (默认取配置文件，内置 42)")
    common.add_argument("--threads", type=int, help="扫描线程数")
    common.add_argument("--mode", type=str, help="增长界模式: closed / coercive")
    common.add_argument("--p", type=float, nargs="+", help="指数 p 列表")
    common.add_argument("--output", type=str, help="同时写入的输出文件")
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="JSON 输出")
    fmt.add_argument("--csv", action="store_true", help="CSV 输出")

    sub = parser.add_subparsers(dest="command", required=True, parser_class=CliParser)

    p_interval = sub.add_parser("interval", parents=[common], help="由声明常数计算区间 I")
    for name in CONSTANT_NAMES:
        p_interval.add_argument(f"--{name.replace('_', '-')}", dest=name, type=float)
    p_interval.add_argument("--N", type=int, help="维数 (≥ 3 时给出外推端点)")

    p_analyze = sub.add_parser("analyze", parents=[common], help="提取常数并计算区间")
    p_analyze.add_argument("--N", type=int)

    p_sim = sub.add_parser("simulate", parents=[common], help="半群审计")
    p_sim.add_argument("--t", type=float, nargs="+", help="时刻列表")
    p_sim.add_argument("--audit", choices=["quasi", "weighted", "smoothing"], default="quasi")
    p_sim.add_argument("--xi", type=float, nargs="+", help="加权审计的 |ξ| 列表")
    p_sim.add_argument("--r", type=float, help="平滑审计的目标指数 (默认 ∞)")
    p_sim.add_argument("--declared-only", action="store_true", help="只用声明的常数，不做测量")

    p_verify = sub.add_parser("verify", parents=[common], help="形式恒等式与不等式检查")
    p_verify.add_argument("--tol", type=float, default=1e-3, help="相对容差")
    p_verify.add_argument("--declared-only", action="store_true")

    p_example = sub.add_parser("example", parents=[common], help="复现算例")
    p_example.add_argument(
        "name",
        choices=["hardy", "neumann", "tau-sweep", "divergence-free", "drift-synthesis", "hardy-surrogate"],
    )
    p_example.add_argument("--beta", type=float, default=0.75)
    p_example.add_argument("--N", type=int, default=5)
    p_example.add_argument("--lam", type=float, nargs="+")
    p_example.add_argument("--n", type=int)
    p_example.add_argument("--n-probes", dest="n_probes", type=int, default=500)
    p_example.add_argument("--c", type=float, nargs="+")
    p_example.add_argument("--m", type=float, nargs="+")
    p_example.add_argument("--alpha-a", dest="alpha_a", type=float, default=0.0)
    p_example.add_argument("--beta-hat", dest="beta_hat", type=float, default=0.0)
    p_example.add_argument("--B-hat", dest="B_hat", type=float, default=0.0)
    return parser


COMMANDS = {
    "interval": cmd_interval,
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "example": cmd_example,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    """命令行入口，返回退出码"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"用法错误: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        # --help
        return int(e.code or 0)

    try:
        config = load_settings(args)
        logger = setup_logger(config.logging)
    except ConfigError as e:
        print(f"配置错误: {e}", file=sys.stderr)
        return EXIT_USAGE

    try:
        logger.info("=" * 60)
        logger.info(f"semigroup-lab {args.command}")
        if args.config:
            logger.info(f"系数文件: {args.config}")
        logger.info("=" * 60)
        code = COMMANDS[args.command](args, config)
        logger.info(f"程序执行完成 (退出码 {code})")
        return code
    except KeyboardInterrupt:
        logger.info("程序被用户中断")
        return 130
    except UsageError as e:
        logger.error(f"用法错误: {e}")
        return EXIT_USAGE
    except SemigroupLabError as e:
        logger.error(f"程序执行出错: {e}")
        return EXIT_USAGE
    except np.linalg.LinAlgError as e:
        logger.error(f"线性代数求解失败: {e}")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

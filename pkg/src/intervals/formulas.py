"""ε_p, δ_p, B̂_p, ω̂_p 与区间 I 的闭式计算

全部以 s = 1/p 参数化，p = inf 对应 s = 0。
"""

import math
from typing import Iterable, List, Optional, Tuple, Union

from loguru import logger

from .models import Exponent, GrowthMode, Interval, IntervalReport, IntervalRow
from ..constants.models import C_p, StructuralConstants
from ..utils.exceptions import BadParameter, ModeError, OutsideInterval

EPS_CAP = 0.999
ModeLike = Union[str, GrowthMode]


def _s(p: float) -> float:
    return Exponent.of(p).s


def conjugate(p: float) -> float:
    """对偶指数 p′"""
    return Exponent.of(p).dual.p


def delta_p(c: StructuralConstants, p: float) -> float:
    """δ_p = α_s|1-2/p| + β′/2"""
    return c.alpha_s * abs(1.0 - 2.0 * _s(p)) + 0.5 * c.beta_prime


def eps_of_s(c: StructuralConstants, s: float) -> float:
    d = c.alpha_s * abs(1.0 - 2.0 * s) + 0.5 * c.beta_prime
    return 4.0 * s * (1.0 - s) - 2.0 * s * c.beta1 - 2.0 * (1.0 - s) * c.beta2 - d * d - c.gamma


def eps_p(c: StructuralConstants, p: float) -> float:
    """ε_p = 4/(pp′) - (2/p)β1 - (2/p′)β2 - δ_p² - γ"""
    return eps_of_s(c, _s(p))


def branch_coefficients(c: StructuralConstants, upper: bool) -> Tuple[float, float, float]:
    """s ↦ ε 在 s ≤ ½ (upper=False) 或 s ≥ ½ (upper=True) 上的二次式系数"""
    a_s, b = c.alpha_s, 0.5 * c.beta_prime
    quad = -(4.0 + 4.0 * a_s * a_s)
    if upper:
        lin = 4.0 - 2.0 * c.beta1 + 2.0 * c.beta2 - 4.0 * a_s * (b - a_s)
        const = -2.0 * c.beta2 - (b - a_s) ** 2 - c.gamma
    else:
        lin = 4.0 - 2.0 * c.beta1 + 2.0 * c.beta2 + 4.0 * a_s * (a_s + b)
        const = -2.0 * c.beta2 - (a_s + b) ** 2 - c.gamma
    return quad, lin, const


def _roots(a: float, b: float, c: float) -> Optional[Tuple[float, float]]:
    """a < 0 的二次式的实根 (升序)，无实根返回 None"""
    disc = b * b - 4.0 * a * c
    if disc < 0:
        return None
    q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
    r1 = q / a
    r2 = c / q if q != 0 else r1
    roots = []
    for r in (r1, r2):
        deriv = 2.0 * a * r + b
        if deriv != 0:
            r -= (a * r * r + b * r + c) / deriv
        roots.append(r)
    return min(roots), max(roots)


def _branch_piece(c: StructuralConstants, upper: bool) -> Optional[Tuple[float, float]]:
    lo, hi = (0.5, 1.0) if upper else (0.0, 0.5)
    roots = _roots(*branch_coefficients(c, upper))
    if roots is None:
        return None
    left, right = max(roots[0], lo), min(roots[1], hi)
    return (left, right) if left <= right else None


def interval_I(c: StructuralConstants) -> Interval:
    """I = {p ∈ [1, ∞) : ε_p ≥ 0}

    s ↦ ε 在 [0, 1] 上是两段凹二次式的最小值，{ε ≥ 0} 是 s 的一个区间。
    """
    pieces = [piece for piece in (_branch_piece(c, False), _branch_piece(c, True)) if piece is not None]
    if not pieces:
        return Interval.empty_interval()
    s_lo = min(piece[0] for piece in pieces)
    s_hi = max(piece[1] for piece in pieces)
    if s_hi <= 0:
        return Interval.empty_interval()
    lower = 1.0 / s_hi
    upper = math.inf if s_lo <= 0 else 1.0 / s_lo
    return Interval(lower, upper)


def B_hat_p(c: StructuralConstants, p: float) -> float:
    """B̂_p = B′/4 + (α_s B′/2β′)|1-2/p| (β′ > 0)，否则 B′/4"""
    if c.beta_prime > 0:
        return 0.25 * c.B_prime + c.alpha_s * c.B_prime / (2.0 * c.beta_prime) * abs(1.0 - 2.0 * _s(p))
    return 0.25 * c.B_prime


def is_degenerate(c: StructuralConstants, p: Optional[float] = None) -> bool:
    """β′ = 0 且 α_s·B′ > 0 (给定 p 时还要求 p ≠ 2)"""
    if not (c.beta_prime == 0 and c.alpha_s * c.B_prime > 0):
        return False
    return p is None or abs(1.0 - 2.0 * _s(p)) > 0


def _offsets(c: StructuralConstants, p: float) -> float:
    s = _s(p)
    return 2.0 * s * c.B1 + 2.0 * (1.0 - s) * c.B2 + c.Gamma


def omega_hat(c: StructuralConstants, p: float, mode: ModeLike = GrowthMode.CLOSED) -> float:
    """ω̂_p = (2/p)B1 + (2/p′)B2 + Γ + B̂_p

    Raises:
        ModeError: closed 模式下 β′ = 0 且 α_s·B′ > 0 (边界处的反例见 neumann 算例)
    """
    if GrowthMode.parse(mode) is GrowthMode.CLOSED and is_degenerate(c, p):
        raise ModeError(
            "β′ = 0 且 α_s·B′ > 0: closed 模式的增长界不适用 (参见 `example neumann`); "
            "请改用 coercive 模式"
        )
    return _offsets(c, p) + B_hat_p(c, p)


def omega_split(c: StructuralConstants, p: float) -> float:
    """β′ = 0、α_s·B′ > 0 时内点 p 的增长界

    (2/p)B1 + (2/p′)B2 + Γ + (B′/4)(1 + α_s²(1-2/p)²/ε_p)
    """
    e = eps_p(c, p)
    if not e > 0 or math.isinf(p):
        raise OutsideInterval(p, e)
    g = 1.0 - 2.0 * _s(p)
    return _offsets(c, p) + 0.25 * c.B_prime * (1.0 + c.alpha_s ** 2 * g * g / e)


def growth_rate(c: StructuralConstants, p: float, mode: ModeLike = GrowthMode.CLOSED) -> float:
    """ε = 0 时适用的增长率: closed 模式为 ω̂_p，coercive 模式在退化情形下为 omega_split"""
    mode = GrowthMode.parse(mode)
    if mode is GrowthMode.COERCIVE and is_degenerate(c, p):
        return omega_split(c, p)
    return omega_hat(c, p, mode)


def eps_max(c: StructuralConstants, p: float) -> float:
    """满足 ε + ε/(1-ε)·δ_p² ≤ ε_p 的最大 ε，上限 0.999"""
    e = eps_p(c, p)
    d2 = delta_p(c, p) ** 2
    s = 1.0 + d2 + e
    root = 0.5 * (s - math.sqrt(max(s * s - 4.0 * e, 0.0)))
    return min(root, EPS_CAP)


def mu_omega_for(
    c: StructuralConstants,
    p: float,
    eps_choice: Optional[float] = None,
    mode: ModeLike = GrowthMode.CLOSED,
) -> Tuple[float, float]:
    """(μ_p, ω_p) = (ε, ω̂_p + ε/(1-ε)·B̂_p)

    Raises:
        OutsideInterval: p 不在 I 的内部
        ModeError: β′ = 0、α_s·B′ > 0 且 p ≠ 2
    """
    e = eps_p(c, p)
    if not e > 0 or math.isinf(p):
        raise OutsideInterval(p, e)
    if is_degenerate(c, p):
        raise ModeError("β′ = 0 且 α_s·B′ > 0 时只有 ε = 0 的增长界可用 (omega_split)")
    if eps_choice is None:
        eps = eps_max(c, p)
    else:
        eps = float(eps_choice)
        d2 = delta_p(c, p) ** 2
        if not 0 < eps < 1 or eps + eps / (1.0 - eps) * d2 > e * (1.0 + 1e-12):
            raise BadParameter("eps_choice", eps, f"需要 0 < ε < 1 且 ε + ε/(1-ε)δ² ≤ ε_p = {e:.6g}")
    omega = omega_hat(c, p, mode) + eps / (1.0 - eps) * B_hat_p(c, p)
    return eps, omega


def tradeoff_curve(
    c: StructuralConstants,
    p: float,
    n: int = 50,
    mode: ModeLike = GrowthMode.CLOSED,
) -> List[Tuple[float, float]]:
    """ε ∈ (0, ε_max] 上的 (ε, ω) 取舍曲线"""
    top = eps_max(c, p)
    return [mu_omega_for(c, p, top * k / n, mode) for k in range(1, n + 1)]


def dissipativity_condition(alpha_s: float, p: float) -> bool:
    """α_s|p-2| ≤ 2√(p-1)"""
    if not p >= 1:
        return False
    if math.isinf(p):
        return alpha_s == 0
    return alpha_s * abs(p - 2.0) <= 2.0 * math.sqrt(p - 1.0)


def extended_endpoints(J: Tuple[float, float], N: int) -> Tuple[float, float]:
    """p_max = N/(N-2)·p₊，p_min = (N/(N-2)·(p₋)′)′"""
    if N < 3:
        raise BadParameter("N", N, "端点外推要求 N ≥ 3; N ≤ 2 时请用平滑审计")
    p_minus, p_plus = J
    factor = N / (N - 2.0)
    p_max = math.inf if math.isinf(p_plus) else factor * p_plus
    dual_minus = conjugate(p_minus)
    p_min = 1.0 if math.isinf(dual_minus) else conjugate(factor * dual_minus)
    return p_min, p_max


def weighted_ceiling(c: StructuralConstants, p: float, mu: float, omega: float, K: float) -> float:
    """加权半群的增长率上界 ω_p + μ_p + K(C_p/μ_p + 1)"""
    if not mu > 0:
        raise BadParameter("mu", mu, "μ_p 必须为正")
    return omega + mu + K * (C_p(c, p) / mu + 1.0)


def report(
    c: StructuralConstants,
    p_grid: Iterable[float],
    mode: ModeLike = GrowthMode.CLOSED,
    N: Optional[int] = None,
) -> IntervalReport:
    """在给定 p 网格上汇总 ε_p、ω̂_p 与 (μ_p, ω_p)"""
    mode = GrowthMode.parse(mode)
    interval = interval_I(c)
    rows = []
    notes = ["∞ ∉ I"]
    if is_degenerate(c):
        notes.append("β′ = 0 且 α_s·B′ > 0: 闭式增长界在 p ≠ 2 处不可用，参见 neumann 算例")
    for p in p_grid:
        try:
            omega = growth_rate(c, p, mode)
        except (ModeError, OutsideInterval):
            omega = None
        row = IntervalRow(p=p, eps=eps_p(c, p), omega_hat=omega, B_hat=B_hat_p(c, p), in_I=interval.contains(p))
        if interval.interior(p) and not is_degenerate(c, p):
            try:
                row.mu, row.omega = mu_omega_for(c, p, mode=mode)
            except ModeError:
                pass
        rows.append(row)

    extended = None
    if N is not None and not interval.empty:
        extended = extended_endpoints((interval.lower, interval.upper), N)
    interior = not interval.empty and interval.lower < interval.upper
    logger.debug(f"区间报告: I = {interval.to_dict()}, {len(rows)} 行")
    return IntervalReport(
        constants=c,
        interval=interval,
        interior_nonempty=interior,
        mode=mode.value,
        rows=rows,
        extended=extended,
        notes=notes,
    )

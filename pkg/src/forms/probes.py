"""探针函数族: 与边界条件相容的模态 + 带种子的随机光滑函数"""

from typing import List

import numpy as np

from ..fields.models import BoundaryCondition, Grid


def _axis_modes(grid: Grid, axis: int, count: int) -> List[np.ndarray]:
    """单方向的基函数，在节点坐标上取值"""
    a, b = grid.extent[axis]
    x = grid.coordinates()[:, axis]
    t = (x - a) / (b - a)
    if grid.bc is BoundaryCondition.DIRICHLET:
        return [np.sin((k + 1) * np.pi * t) for k in range(count)]
    return [np.cos(k * np.pi * t) for k in range(count)]


def mode_functions(grid: Grid, n_modes: int) -> List[np.ndarray]:
    """张量积模态，二维时取 k + l < n_modes 的组合"""
    xs = _axis_modes(grid, 0, n_modes)
    if grid.dim == 1:
        return xs
    ys = _axis_modes(grid, 1, n_modes)
    return [xs[k] * ys[l] for k in range(n_modes) for l in range(n_modes - k)]


def _bubble(grid: Grid) -> np.ndarray:
    """Dirichlet 时内部为正、边界为零的包络; Neumann 时恒为 1"""
    if grid.bc is BoundaryCondition.NEUMANN:
        return np.ones(grid.n_nodes)
    coords = grid.coordinates()
    out = np.ones(grid.n_nodes)
    for axis, (a, b) in enumerate(grid.extent):
        out = out * np.sin(np.pi * (coords[:, axis] - a) / (b - a))
    return out


def random_smooth(grid: Grid, count: int, seed: int = 42, n_terms: int = 6) -> List[np.ndarray]:
    """复系数随机模态组合，系数按 (1+k)^-2 衰减"""
    rng = np.random.default_rng(seed)
    modes = mode_functions(grid, n_terms)
    decay = np.array([1.0 / (1.0 + k) ** 2 for k in range(len(modes))])
    basis = np.stack(modes, axis=1)
    probes = []
    for _ in range(count):
        c = (rng.standard_normal(len(modes)) + 1j * rng.standard_normal(len(modes))) * decay
        probes.append(basis @ c)
    return probes


def positive_probes(grid: Grid, count: int, seed: int = 42, n_terms: int = 4) -> List[np.ndarray]:
    """非负实探针 bubble·exp(g)，g 为随机实模态组合"""
    rng = np.random.default_rng(seed + 1)
    bubble = _bubble(grid)
    coords = grid.coordinates()
    probes = [bubble.copy()]
    for _ in range(count):
        g = np.zeros(grid.n_nodes)
        for axis, (a, b) in enumerate(grid.extent):
            t = (coords[:, axis] - a) / (b - a)
            for k in range(1, n_terms + 1):
                g += rng.standard_normal() / k * np.cos(k * np.pi * t)
        probes.append(bubble * np.exp(g))
    return probes


def probe_family(
    grid: Grid,
    n_modes: int = 6,
    n_random: int = 100,
    seed: int = 42,
    positive: bool = False,
) -> List[np.ndarray]:
    """形式界测量与审计共用的探针族

    Args:
        grid: 网格
        n_modes: 每个方向的模态数
        n_random: 随机光滑函数个数
        seed: 随机种子
        positive: 只返回非负实探针 (漂移常数的测量需要 u ≥ 0)
    """
    if positive:
        return positive_probes(grid, n_random, seed)
    return mode_functions(grid, n_modes) + random_smooth(grid, n_random, seed)

"""网格、系数场、分解与加载测试"""

import json

import numpy as np
import pytest

from src.fields.decomposition import decompose, validate_ellipticity
from src.fields.loader import load_coefficients
from src.fields.models import CoefficientSet, Grid, MatrixField, ScalarField, VectorField
from src.utils.exceptions import ConfigError, GridError, InvalidField, NotElliptic


class TestGrid:
    """网格测试"""

    def test_spacing_and_nodes(self):
        """测试步长、节点数与坐标顺序"""
        grid = Grid.box((0.0, 1.0), (0.0, 2.0), (5, 3))
        assert grid.spacing == (0.25, 1.0)
        assert grid.n_nodes == 15
        coords = grid.coordinates()
        # 节点下标 i·ny + j
        assert np.allclose(coords[1], [0.0, 1.0])
        assert np.allclose(coords[3], [0.25, 0.0])

    def test_boundary_mask(self):
        """测试边界节点"""
        grid = Grid.box((0.0, 1.0), (0.0, 1.0), 4)
        assert int(np.sum(grid.boundary_mask())) == 12
        assert int(np.sum(Grid.line(0.0, 1.0, 5).boundary_mask())) == 2

    def test_invalid_grids(self):
        """测试非法网格参数"""
        with pytest.raises(GridError):
            Grid.line(0.0, 1.0, 2)
        with pytest.raises(GridError):
            Grid.line(1.0, 0.0, 5)
        with pytest.raises(GridError):
            Grid(extent=((0.0, 1.0),), n=(100,), max_nodes=50)
        with pytest.raises(GridError):
            Grid.line(0.0, 1.0, 5, "robin")


class TestFields:
    """系数场测试"""

    def setup_method(self):
        self.grid = Grid.box((0.0, 1.0), (0.0, 1.0), 5)

    def test_constant_broadcast(self):
        """测试常数广播到全部节点"""
        A = MatrixField.constant(self.grid, 2.0)
        assert A.values.shape == (25, 2, 2)
        assert np.allclose(A.values[7], 2.0 * np.eye(2))
        b = VectorField.constant(self.grid, [1.0, 1j])
        assert b.values.shape == (25, 2)

    def test_non_finite_rejected(self):
        """测试非有限值"""
        values = np.zeros(25, dtype=complex)
        values[3] = np.inf
        with pytest.raises(InvalidField):
            ScalarField(values, self.grid)

    def test_shape_mismatch(self):
        """测试形状不匹配"""
        with pytest.raises(InvalidField):
            ScalarField(np.zeros(24), self.grid)

    def test_values_are_immutable(self):
        """测试系数数组只读"""
        Q = ScalarField.zeros(self.grid)
        with pytest.raises(ValueError):
            Q.values[0] = 1.0

    def test_adjoint_coefficients(self):
        """测试形式伴随的系数"""
        cs = CoefficientSet.build(self.grid, A=[[1.0, 1j], [0.0, 1.0]], b1=[1j, 0.0], b2=[0.0, 2.0], Q=1 + 1j)
        adj = cs.adjoint()
        assert np.allclose(adj.A.values[0], [[1.0, 0.0], [-1j, 1.0]])
        assert np.allclose(adj.b1.values[0], [0.0, -2.0])
        assert np.allclose(adj.b2.values[0], [1j, 0.0])
        assert np.allclose(adj.Q.values, 1 - 1j)


class TestDecomposition:
    """分解与椭圆性测试"""

    def test_one_dimensional(self):
        """测试一维 1+i: 反对称部分为零"""
        grid = Grid.line(0.0, 1.0, 5)
        dec = decompose(MatrixField.constant(grid, 1 + 1j))
        assert np.allclose(dec.A0s, 1.0)
        assert np.allclose(dec.A1s, 1.0)
        assert np.allclose(dec.A0a, 0.0)
        assert np.allclose(dec.A1a, 0.0)

    def test_hermitian_example(self):
        """测试 [[1, i], [-i, 1]]"""
        grid = Grid.box((0.0, 1.0), (0.0, 1.0), 3)
        dec = decompose(MatrixField.constant(grid, [[1.0, 1j], [-1j, 1.0]]))
        assert np.allclose(dec.A0s, np.eye(2))
        assert np.allclose(dec.A0a, 0.0)
        assert np.allclose(dec.A1s, 0.0)
        assert np.allclose(dec.A1a, [[0.0, 1.0], [-1.0, 0.0]])

    def test_reassemble_random(self):
        """测试随机复矩阵的重构"""
        grid = Grid.box((0.0, 1.0), (0.0, 1.0), 4)
        rng = np.random.default_rng(0)
        values = rng.standard_normal((16, 2, 2)) + 1j * rng.standard_normal((16, 2, 2))
        A = MatrixField(values, grid)
        dec = decompose(A)
        assert np.allclose(dec.reassemble().values, values, atol=1e-14)
        again = decompose(dec.reassemble())
        assert np.allclose(again.A0s, dec.A0s, rtol=0.0, atol=1e-15)
        assert np.allclose(again.A1a, dec.A1a, rtol=0.0, atol=1e-15)

    def test_ellipticity_constants(self):
        """测试 (c1, c2)"""
        grid = Grid.box((0.0, 1.0), (0.0, 1.0), 3)
        assert validate_ellipticity(CoefficientSet.build(grid)) == pytest.approx((1.0, 1.0))
        cs = CoefficientSet.build(grid, A=np.diag([1.0, 4.0]))
        assert validate_ellipticity(cs) == pytest.approx((1.0, 4.0))
        cs = CoefficientSet.build(grid, A=3.0)
        assert validate_ellipticity(cs) == pytest.approx((3.0, 3.0))

    def test_not_elliptic(self):
        """测试某节点特征值为负"""
        grid = Grid.box((0.0, 1.0), (0.0, 1.0), 3)
        values = np.broadcast_to(np.eye(2, dtype=complex), (9, 2, 2)).copy()
        values[4] = np.diag([1.0, -0.1])
        with pytest.raises(NotElliptic) as exc:
            validate_ellipticity(CoefficientSet.build(grid, A=values))
        assert exc.value.node == 4


class TestLoader:
    """JSON 加载测试"""

    def test_dsl_document(self):
        """测试 DSL 字符串形式的系数"""
        problem = load_coefficients({
            "grid": {"extent": [[0, 1], [0, 1]], "n": [5, 5]},
            "bc": "Neumann",
            "A": [["1 + 0.5i", "0"], ["0", "1 + x"]],
            "b1": ["0.2i*x", "0"],
            "Q": "x*y",
            "constants": {"alpha_s": 0.5},
            "mode": "coercive",
        })
        cs = problem.coefficients
        assert cs.grid.bc.value == "neumann"
        coords = cs.grid.coordinates()
        assert np.allclose(cs.A.values[:, 1, 1], 1 + coords[:, 0])
        assert np.allclose(cs.A.values[:, 0, 0], 1 + 0.5j)
        assert np.allclose(cs.b1.values[:, 0], 0.2j * coords[:, 0])
        assert np.allclose(cs.b2.values, 0.0)
        assert np.allclose(cs.Q.values, coords[:, 0] * coords[:, 1])
        assert problem.declared == {"alpha_s": 0.5}
        assert problem.mode == "coercive"

    def test_pair_arrays(self, tmp_path):
        """测试 [re, im] 节点数组与文件读取"""
        doc = {
            "grid": {"extent": [[0, 1]], "n": [4]},
            "A": 1.0,
            "Q": [[1.0, 0.5], [2.0, 0.0], [3.0, -1.0], [4.0, 0.0]],
        }
        path = tmp_path / "problem.json"
        path.write_text(json.dumps(doc), encoding="utf-8")
        problem = load_coefficients(path)
        assert np.allclose(problem.coefficients.Q.values, [1 + 0.5j, 2, 3 - 1j, 4])
        assert problem.source == str(path)

    def test_errors(self, tmp_path):
        """测试文件缺失、格式错误与节点数不足"""
        with pytest.raises(ConfigError):
            load_coefficients(tmp_path / "missing.json")
        with pytest.raises(ConfigError):
            load_coefficients({"grid": {"extent": [[0, 1, 2]], "n": [5]}})
        with pytest.raises(ConfigError):
            load_coefficients({"grid": {"extent": [[0, 1]], "n": [5]}}, min_nodes_per_axis=9)

    def test_singular_coefficient_rejected(self):
        """测试未正则化的奇异系数被拒绝"""
        with pytest.raises(InvalidField):
            load_coefficients({"grid": {"extent": [[-1, 1]], "n": [5]}, "Q": "1/r2"})

    def test_mode_aliases(self):
        """测试增长界模式的别名被规范化，未知模式被拒绝"""
        doc = {"grid": {"extent": [[0, 1]], "n": [5]}}
        assert load_coefficients({**doc, "mode": "thm1.3"}).mode == "closed"
        assert load_coefficients({**doc, "mode": "THM1.5"}).mode == "coercive"
        assert load_coefficients({**doc, "mode": "declared"}).mode == "coercive"
        with pytest.raises(ConfigError):
            load_coefficients({**doc, "mode": "fast"})

"""
测试核心数据类型: Grid, FieldState, CoefficientSet, 预设系统
"""
import numpy as np
import pytest

from kdv_mkdv_lab.engine.coefficient_validator import CoefficientValidator, validate_coefficients
from kdv_mkdv_lab.engine.core import (
    CoefficientSet,
    FieldState,
    Grid,
    build_grid,
    preset_system,
)
from kdv_mkdv_lab.engine.errors import InstabilityError, ParameterError


class TestGrid:
    """测试网格构造"""

    def test_build_grid_point_count(self):
        """测试节点个数与坐标"""
        grid = build_grid(-1.0, 1.0, 0.5)
        assert grid.point_count == 5
        np.testing.assert_array_equal(grid.nodes, [-1.0, -0.5, 0.0, 0.5, 1.0])

    def test_zero_spacing_rejected(self):
        """测试 h = 0 被拒绝"""
        with pytest.raises(ParameterError, match="spacing"):
            build_grid(0.0, 1.0, 0.0)

    def test_domain_narrower_than_stencil(self):
        """测试区域窄于五点模板"""
        with pytest.raises(ParameterError, match="stencil"):
            build_grid(0.0, 1.0, 0.5)

    def test_from_points_round_trip(self):
        """测试 from_points 重建网格"""
        grid = build_grid(-20.0, 20.0, 0.25)
        rebuilt = Grid.from_points(grid.x_min, grid.h, grid.point_count)
        assert rebuilt == grid
        assert grid.index_of(0.0) == 80


class TestFieldState:
    """测试场状态"""

    def test_values_are_read_only(self):
        """测试值数组只读"""
        state = FieldState(0.0, np.ones((2, 5)))
        with pytest.raises(ValueError):
            state.values[0, 0] = 2.0

    def test_non_finite_rejected(self):
        """测试非有限值抛出 InstabilityError"""
        values = np.zeros((1, 5))
        values[0, 3] = np.nan
        with pytest.raises(InstabilityError) as exc_info:
            FieldState(0.5, values)
        assert exc_info.value.failure_time == 0.5

    def test_copy_is_equal_and_independent(self):
        """测试副本相等且独立"""
        source = np.arange(10.0).reshape(2, 5)
        state = FieldState(1.0, source)
        source[0, 0] = 99.0
        assert state.values[0, 0] == 0.0
        assert state.copy() == state

    def test_component_is_one_based(self):
        """测试分量下标从 1 开始"""
        state = FieldState(0.0, [[1.0] * 5, [2.0] * 5])
        assert state.component(2)[0] == 2.0

    def test_with_values_shape_check(self):
        """测试形状不匹配"""
        state = FieldState(0.0, np.zeros((1, 5)))
        with pytest.raises(ParameterError):
            state.with_values(1.0, np.zeros((1, 6)))


class TestCoefficientSet:
    """测试系数集合"""

    def test_records_round_trip(self):
        """测试记录往返"""
        g = [{"n": 1, "l": 1, "m": 1, "k": 1, "value": -1.5}, {"n": 2, "l": 4, "m": 1, "k": 2, "value": 0.75}]
        d = [{"n": 1, "value": -0.25}]
        coeffs = CoefficientSet.from_records(2, g, d)
        g_back, d_back = coeffs.to_records()
        assert CoefficientSet.from_records(2, g_back, d_back) == coeffs
        assert coeffs.term_block(4)[1, 0, 1] == 0.75

    def test_out_of_range_index(self):
        """测试下标越界"""
        with pytest.raises(ParameterError, match="out of range"):
            CoefficientSet.from_records(1, [{"n": 1, "l": 6, "m": 1, "k": 1, "value": 1.0}])

    def test_kdv_mkdv_preset_shape(self):
        """测试三分量预设"""
        preset = preset_system("kdv-mkdv-3")
        coeffs = preset.coefficients
        assert coeffs.n_components == 3
        assert len(list(coeffs.nonzero_terms())) == 13
        np.testing.assert_array_equal(coeffs.d, [0.5, -0.25, 0.5])
        assert preset.component_labels == ("f", "u", "v")

    def test_kdv_scalar_preset(self):
        """测试标量 KdV 预设"""
        coeffs = preset_system("kdv-scalar").coefficients
        assert coeffs.g[0, 0, 0, 0] == -1.5
        assert coeffs.d[0] == -0.25

    def test_unknown_preset(self):
        """测试未知预设"""
        with pytest.raises(ParameterError, match="unknown preset"):
            preset_system("kdv-vector")


class TestCoefficientValidator:
    """测试系数验证器"""

    def test_valid_record(self):
        """测试有效记录"""
        ok, error = CoefficientValidator.validate_record(3, {"n": 3, "l": 5, "m": 1, "k": 2, "value": 1.0})
        assert ok is True
        assert error is None

    def test_missing_key(self):
        """测试缺少字段"""
        ok, error = CoefficientValidator.validate_record(3, {"n": 1, "value": 1.0}, "g")
        assert ok is False
        assert "missing" in error

    def test_non_integer_index(self):
        """测试非整数下标"""
        ok, error = CoefficientValidator.validate_record(2, {"n": 1.5, "value": 1.0}, "d")
        assert ok is False
        assert "not an integer" in error

    def test_records_report_indices(self):
        """测试批量验证返回位置"""
        errors = CoefficientValidator.validate_records(
            1,
            [{"n": 1, "l": 1, "m": 1, "k": 1, "value": 1.0}],
            [{"n": 2, "value": 1.0}],
        )
        assert [index for index, _ in errors] == [1]

    def test_diagnostics_summary(self):
        """测试诊断摘要"""
        diagnostics = validate_coefficients(preset_system("kdv-mkdv-3").coefficients)
        assert diagnostics.valid
        assert diagnostics.nonzero_g == 13
        assert diagnostics.nonzero_d == 3
        assert diagnostics.summary() == "valid, 13 nonzero g entries, 3 nonzero d"

    def test_zero_set(self):
        """测试全零系数"""
        assert validate_coefficients(CoefficientSet.zeros(2)).summary() == "valid, 0 nonzero terms"

    def test_non_finite_entry(self):
        """测试非有限系数"""
        g = np.zeros((1, 5, 1, 1))
        g[0, 2, 0, 0] = np.inf
        diagnostics = validate_coefficients(CoefficientSet(1, g, np.zeros(1)))
        assert not diagnostics.valid
        assert "g[n=1, l=3, m=1, k=1]" in diagnostics.issues[0]

"""
测试验证工具: 范数、误差、PDE 残差、收敛阶
"""
import math

import numpy as np
import pytest

from kdv_mkdv_lab.engine.closed_forms import make_family, sample_on_grid
from kdv_mkdv_lab.engine.core import FieldState, build_grid
from kdv_mkdv_lab.engine.errors import ParameterError, PoleError
from kdv_mkdv_lab.engine.harness import (
    ConvergenceRow,
    ConvergenceTable,
    conservation_drift,
    continuous_rhs,
    convergence_study,
    error_report,
    l2_norm,
    observed_order,
    pde_residual,
    percentage_error,
    point_lattice,
    run_level,
)
from kdv_mkdv_lab.engine.scheme import StepperConfig, integrate


class TestNorms:
    """测试范数与误差"""

    def test_l2_norm_all_components(self):
        """测试 L2 范数对所有分量求和"""
        values = np.array([[3.0, 0.0], [0.0, 4.0]])
        assert l2_norm(values, 0.25) == pytest.approx(2.5)

    def test_l2_norm_rejects_bad_h(self):
        """测试 h <= 0"""
        with pytest.raises(ParameterError):
            l2_norm([1.0, 2.0], 0.0)

    def test_percentage_error_normalised_by_global_max(self):
        """测试百分比误差以全局最大值归一化"""
        exact = FieldState(0.0, [[0.0, 2.0, 4.0, 2.0, 0.0]])
        numeric = FieldState(0.0, [[0.0, 2.2, 4.0, 2.0, 0.4]])
        profile = percentage_error(numeric, exact)
        np.testing.assert_allclose(profile.per_node[0], [0.0, 5.0, 0.0, 0.0, 10.0])
        assert profile.max == pytest.approx(10.0)

    def test_l2_norm_is_a_norm(self):
        """测试 L2 范数的非负性、齐次性与三角不等式"""
        rng = np.random.default_rng(7)
        for _ in range(20):
            left = rng.normal(size=(3, 40))
            right = rng.normal(size=(3, 40))
            s = rng.uniform(-5.0, 5.0)
            assert l2_norm(left, 0.1) >= 0.0
            assert l2_norm(s * left, 0.1) == pytest.approx(abs(s) * l2_norm(left, 0.1), rel=1e-12)
            assert l2_norm(left + right, 0.1) <= l2_norm(left, 0.1) + l2_norm(right, 0.1) + 1e-12

    @pytest.mark.parametrize("scale", [1e-3, 3.7, -2.0])
    def test_percentage_error_scale_invariant(self, scale):
        """测试同时缩放数值解与精确解时百分比误差不变"""
        exact = FieldState(0.0, [[0.0, 2.0, 4.0, 2.0, 0.0], [1.0, -3.0, 0.5, 0.0, 2.0]])
        numeric = FieldState(0.0, [[0.1, 2.2, 3.9, 2.0, 0.4], [1.2, -2.5, 0.5, 0.1, 2.0]])
        base = percentage_error(numeric, exact)
        scaled = percentage_error(
            FieldState(0.0, scale * numeric.values), FieldState(0.0, scale * exact.values)
        )
        np.testing.assert_allclose(scaled.per_node, base.per_node, rtol=1e-12, atol=1e-12)

    def test_percentage_error_zero_component(self):
        """测试精确解恒为零时报错"""
        zero = FieldState(0.0, np.zeros((1, 5)))
        with pytest.raises(ParameterError, match="identically zero"):
            percentage_error(zero, zero)

    def test_error_report_interior(self):
        """测试误差只在内部节点计算"""
        grid = build_grid(0.0, 4.0, 0.25)
        exact = FieldState(0.0, np.ones((1, grid.point_count)))
        values = np.ones((1, grid.point_count))
        values[0, 0] = 5.0
        values[0, 8] = 1.5
        report = error_report(FieldState(0.0, values), exact, grid, interior_margin=2)
        assert report.linf == pytest.approx(0.5)
        assert report.percentage_max == pytest.approx(50.0)
        assert report.l2 == pytest.approx(math.sqrt(0.25 * 0.25))

    def test_continuous_rhs_scalar(self, kdv_scalar):
        """测试 u_t = 3/2 u u_x + 1/4 u_xxx"""
        rates = continuous_rhs(kdv_scalar, [2.0], [3.0], [0.0], [4.0])
        assert rates[0] == pytest.approx(10.0)


class TestPdeResidual:
    """测试闭式解的 PDE 残差"""

    def test_r_family(self, kdv_mkdv_3, r_family):
        """测试 r 族解残差 <= 1e-6 且步长减半时缩小 12-20 倍"""
        points = point_lattice((-2.0, 2.0), (0.0, 0.2), 5, 5)
        coarse = pde_residual(r_family, kdv_mkdv_3, points, fd_step=1e-3)
        fine = pde_residual(r_family, kdv_mkdv_3, points, fd_step=5e-4)
        assert coarse <= 1e-6
        assert 12.0 <= coarse / fine <= 20.0

    def test_two_component(self):
        """测试两分量解满足两分量系统"""
        family = make_family("two-component", {"a": 1.0, "r": 0.5})
        points = point_lattice((-2.0, 2.0), (0.0, 0.2), 5, 5)
        coarse = pde_residual(family, None, points, fd_step=1e-3)
        fine = pde_residual(family, None, points, fd_step=5e-4)
        assert coarse <= 1e-6
        assert 12.0 <= coarse / fine <= 20.0

    def test_soliton_against_scalar_kdv(self, kdv_scalar, soliton_family):
        """测试 u11 满足标量 KdV"""
        points = point_lattice((-1.0, 1.0), (0.0, 0.1), 3, 3)
        assert pde_residual(soliton_family, kdv_scalar, points) <= 1e-6

    def test_wrong_system_is_detected(self, kdv_mkdv_3):
        """测试错误的解析解给出大残差"""
        family = make_family("r-family", {"a": 1.0, "r": 0.5}, components=["u", "f", "v"])
        points = point_lattice((-1.0, 1.0), (0.0, 0.1), 3, 3)
        assert pde_residual(family, kdv_mkdv_3, points) > 1e-2

    def test_component_count_mismatch(self, kdv_scalar, r_family):
        """测试分量个数不匹配"""
        with pytest.raises(ParameterError):
            pde_residual(r_family, kdv_scalar, [(0.0, 0.0)])

    def test_pole_in_stencil(self, kdv_mkdv_3):
        """测试残差模板内的极点"""
        family = make_family("r-family", {"a": 1.0, "r": 1.0})
        with pytest.raises(PoleError):
            pde_residual(family, kdv_mkdv_3, [(0.0, 0.0)])


class TestConvergenceTable:
    """测试收敛表"""

    def test_observed_order(self):
        """测试观测阶"""
        assert observed_order(4.0, 1.0) == pytest.approx(2.0)
        assert math.isnan(observed_order(0.0, 1.0))

    def test_orders_filled(self):
        """测试逐行填充观测阶"""
        rows = [
            ConvergenceRow(h=0.4, tau=1e-5, error_l2=1.6e-2),
            ConvergenceRow(h=0.2, tau=1e-5, error_l2=4e-3),
            ConvergenceRow(h=0.1, tau=1e-5, error_l2=1e-3),
        ]
        table = ConvergenceTable(rows)
        assert table.orders == pytest.approx([2.0, 2.0])
        assert table.to_records()[0]["observed_order"] is None

    def test_failed_row_breaks_order(self):
        """测试失败层级不参与阶的计算"""
        rows = [
            ConvergenceRow(h=0.4, tau=1e-5, error_l2=1.6e-2),
            ConvergenceRow(h=0.2, tau=1e-5, status="failed: instability: blow-up"),
            ConvergenceRow(h=0.1, tau=1e-5, error_l2=1e-3),
        ]
        assert ConvergenceTable(rows).orders == []

    def test_rows_must_decrease(self):
        """测试参数必须严格递减"""
        rows = [ConvergenceRow(h=0.1, tau=1e-5), ConvergenceRow(h=0.2, tau=1e-5)]
        with pytest.raises(ParameterError):
            ConvergenceTable(rows)

    def test_point_lattice(self):
        points = point_lattice((-2.0, 2.0), (0.0, 0.2), 5, 5)
        assert len(points) == 25
        assert (-2.0, 0.0) in points and (2.0, 0.2) in points


class TestConvergenceStudies:
    """测试空间收敛研究与守恒诊断"""

    def test_spatial_second_order(self, kdv_mkdv_3, r_family):
        """测试 h = 0.4, 0.2, 0.1 给出约二阶收敛"""
        cfg = StepperConfig(tau=1e-5, a_max=1000.0)
        table = convergence_study(kdv_mkdv_3, r_family, (-20.0, 20.0), [0.1, 0.4, 0.2], 0.05, cfg)
        assert [row.h for row in table.rows] == [0.4, 0.2, 0.1]
        assert all(row.ok for row in table.rows)
        assert all(1.7 <= order <= 2.3 for order in table.orders)
        assert table.rows[-1].percentage_max <= 2.0

    def test_run_level_failure_becomes_row(self, kdv_mkdv_3, r_family):
        """测试层级失败记为失败行"""
        row, final = run_level(kdv_mkdv_3, r_family, (-20.0, 20.0), 0.25, 0.05, StepperConfig(tau=0.1))
        assert final is None
        assert row.status.startswith("failed: instability")

    def test_too_few_levels(self, kdv_mkdv_3, r_family):
        with pytest.raises(ParameterError, match="at least 3"):
            convergence_study(kdv_mkdv_3, r_family, (-20.0, 20.0), [0.4, 0.2], 0.05, StepperConfig())

    def test_mass_conserved_and_l2_drift_shrinks(self, kdv_scalar, soliton_family):
        """测试质量守恒且 L2 漂移随 h 单调减小"""
        drifts = []
        for h in (0.4, 0.2, 0.1):
            grid = build_grid(-20.0, 20.0, h)
            initial = sample_on_grid(soliton_family, grid, 0.0)
            drift = conservation_drift(integrate(initial, kdv_scalar, grid, 0.1))
            assert drift.max_mass <= 1e-10
            drifts.append(drift.max_l2)
        assert drifts[0] > drifts[1] > drifts[2]

    def test_drift_needs_two_snapshots(self, kdv_scalar, soliton_family, soliton_grid):
        initial = sample_on_grid(soliton_family, soliton_grid, 0.0)
        trajectory = integrate(initial, kdv_scalar, soliton_grid, 0.01, snapshots=[0.01])
        with pytest.raises(ParameterError):
            conservation_drift(trajectory)

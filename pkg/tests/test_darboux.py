"""
测试 Darboux 变换、Lax 矩阵与相容性残差
"""
import numpy as np
import pytest

from kdv_mkdv_lab.engine.closed_forms import (
    ClosedFormParams,
    seed_jets,
    three_component_fields,
    two_component_fields,
)
from kdv_mkdv_lab.engine.darboux import (
    MatrixPotentials,
    SpectralSolutionPair,
    automorphism_pair,
    compatibility_residual,
    compound_dt_zero_seed,
    compound_sampler,
    dt1_transform,
    dt2_transform,
    lax_time_matrices,
    scaled_sampler,
    spectral_residual,
    two_component_sampler,
    zero_sampler,
)
from kdv_mkdv_lab.engine.errors import ParameterError, PoleError
from kdv_mkdv_lab.engine.jets import Jet


def seed_pair_jets(p, x, t, order=4):
    phi1, phi2 = seed_jets(p, x, t, order=order)
    return SpectralSolutionPair(phi1, phi2, p.lam)


class TestElementaryTransforms:
    """测试单步 Darboux 变换"""

    def test_dt1_on_zero_seed_gives_two_component_fields(self):
        """测试第一步变换给出两分量解"""
        p = ClosedFormParams(a=0.9, c1=0.4, c2=0.6, d1=0.3, d2=0.8)
        x, t = np.linspace(-1.5, 1.5, 7), 0.15
        result = dt1_transform(MatrixPotentials.zero(like=np.zeros(7)), seed_pair_jets(p, x, t))
        f21, u11, u21 = two_component_fields(p, x, t)
        pots = result.potentials
        np.testing.assert_allclose(pots.f21.value, f21, atol=1e-12)
        np.testing.assert_allclose(pots.u11.value, u11, atol=1e-12)
        np.testing.assert_allclose(pots.u21.value, u21, atol=1e-12)
        np.testing.assert_allclose(pots.f12.value, 0.0, atol=1e-15)

    def test_dt1_carries_target_solution(self):
        """测试变换后的目标解满足新谱问题"""
        p = ClosedFormParams(a=1.0, c1=0.5, c2=0.7, d1=0.2, d2=0.9)
        q = ClosedFormParams(a=1.3, c1=0.8, c2=0.1, d1=0.6, d2=0.4)
        seed = MatrixPotentials.zero()
        result = dt1_transform(seed, seed_pair_jets(p, 0.3, 0.1), seed_pair_jets(q, 0.3, 0.1))
        assert spectral_residual(result.potentials, result.target) < 1e-9

    def test_dt2_carries_target_solution(self):
        """测试第二步变换的协变性"""
        p = ClosedFormParams(a=1.0, c1=0.5, c2=0.7, d1=0.2, d2=0.9)
        q = ClosedFormParams(a=0.7, c1=0.3, c2=0.3, d1=0.9, d2=0.2)
        seed = MatrixPotentials.zero()
        result = dt2_transform(seed, seed_pair_jets(p, -0.4, 0.2), seed_pair_jets(q, -0.4, 0.2))
        assert spectral_residual(result.potentials, result.target) < 1e-9

    def test_dt1_pole(self):
        """测试 phi1 = 0 时抛出 PoleError"""
        pair = SpectralSolutionPair(Jet((0.0, 1.0, 0.0, 0.0)), Jet((1.0, 0.0, 0.0, 0.0)), 1.0)
        with pytest.raises(PoleError):
            dt1_transform(MatrixPotentials.zero(), pair)

    def test_dt2_pole(self):
        """测试 phi2 = 0 时抛出 PoleError"""
        pair = SpectralSolutionPair(Jet((1.0, 0.0, 0.0, 0.0)), Jet((0.0, 1.0, 0.0, 0.0)), 1.0)
        with pytest.raises(PoleError):
            dt2_transform(MatrixPotentials.zero(), pair)


class TestCompoundTransform:
    """测试复合变换与约化"""

    @pytest.mark.parametrize("a, r", [(0.5, 0.25), (1.0, 0.5), (2.0, 0.9)])
    def test_matches_three_component_fields(self, a, r):
        """测试复合变换等于三分量解析解"""
        p = ClosedFormParams.from_ratio(a, r)
        x, t = np.meshgrid(np.linspace(-2, 2, 20), np.linspace(0, 0.5, 20))
        f, u, v = compound_dt_zero_seed(p, x, t).reduced_fields()
        exact = three_component_fields(p, x, t)
        for numeric, reference in ((f, exact.f), (u, exact.u), (v, exact.v)):
            scale = max(1.0, float(np.max(np.abs(reference))))
            assert float(np.max(np.abs(numeric - reference))) / scale < 1e-10

    def test_reduction_is_exact(self):
        """测试约化对称性逐位成立"""
        pots = compound_dt_zero_seed(ClosedFormParams.from_ratio(1.0, 0.5), 0.3, 0.1)
        assert pots.reduced
        assert pots.is_reduction_symmetric()

    def test_raw_output_is_symmetric_to_rounding(self):
        """测试未强制约化时的对称性"""
        pots = compound_dt_zero_seed(
            ClosedFormParams.from_ratio(1.0, 0.5), 0.3, 0.1, enforce_reduction=False
        )
        assert not pots.reduced
        assert pots.is_reduction_symmetric(tolerance=1e-9)

    def test_automorphism_needs_reduced_potentials(self):
        """测试非约化势拒绝自同构配对"""
        p = ClosedFormParams(a=1.0)
        pair = seed_pair_jets(p, 0.0, 0.0)
        unreduced = MatrixPotentials(0.0, 1.0, 0.0, 0.0, 0.0, 0.0)
        with pytest.raises(ParameterError):
            automorphism_pair(pair, unreduced)
        swapped = automorphism_pair(pair, MatrixPotentials.zero())
        assert swapped.lam == -pair.lam
        assert swapped.phi1 is pair.phi2


class TestLaxMatrices:
    """测试时间部分矩阵"""

    def test_zero_potentials(self):
        """测试零势给出零矩阵"""
        lax = lax_time_matrices(MatrixPotentials.zero())
        assert all(entry == 0 for entry in lax.B.flat)
        assert all(entry == 0 for entry in lax.C.flat)

    def test_b_matrix_from_explicit_derivatives(self):
        """测试 B = 3/2 diag U + 3/2 F_x + 3/4 F^2"""
        pots = MatrixPotentials(2.0, 3.0, 1.0, 5.0, 7.0, -1.0)
        pots_x = MatrixPotentials(0.5, -0.5, 0.0, 0.0, 0.0, 0.0)
        B = lax_time_matrices(pots, pots_x).B
        assert B[0, 0] == pytest.approx(1.5 * 1.0 + 0.75 * 6.0)
        assert B[1, 1] == pytest.approx(1.5 * -1.0 + 0.75 * 6.0)
        assert B[0, 1] == pytest.approx(0.75)
        assert B[1, 0] == pytest.approx(-0.75)

    def test_missing_derivatives(self):
        """测试缺少导数"""
        with pytest.raises(ParameterError):
            lax_time_matrices(MatrixPotentials(1.0, 1.0, 1.0, 1.0, 1.0, 1.0))


class TestCompatibilityResidual:
    """测试零曲率方程残差"""

    def test_zero_seed(self):
        """测试零势残差为零"""
        assert compatibility_residual(zero_sampler, 0.5, 0.1) == 0.0

    def test_compound_fourth_order(self):
        """测试四阶差分残差 <= 1e-6"""
        sampler = compound_sampler(ClosedFormParams.from_ratio(1.0, 0.5))
        assert compatibility_residual(sampler, 0.5, 0.1, fd_step=1e-3, order=4) <= 1e-6

    def test_compound_second_order_shrinkage(self):
        """测试二阶差分在步长减半时约缩小 4 倍"""
        sampler = compound_sampler(ClosedFormParams.from_ratio(1.0, 0.5))
        coarse = compatibility_residual(sampler, 0.5, 0.1, fd_step=1e-3, order=2)
        fine = compatibility_residual(sampler, 0.5, 0.1, fd_step=5e-4, order=2)
        assert coarse <= 1e-3
        assert 3.5 <= coarse / fine <= 4.5

    def test_two_component_family(self):
        """测试两分量势满足相容性条件"""
        sampler = two_component_sampler(ClosedFormParams.from_ratio(1.0, 0.5))
        assert compatibility_residual(sampler, 0.2, 0.05, fd_step=1e-3, order=4) <= 1e-6

    def test_perturbed_potential_fails(self):
        """测试扰动后的势不满足相容性条件"""
        sampler = scaled_sampler(compound_sampler(ClosedFormParams.from_ratio(1.0, 0.5)), "u11", 1.1)
        for step in (1e-3, 5e-4):
            assert compatibility_residual(sampler, 0.5, 0.1, fd_step=step, order=2) > 1e-2

    def test_pole_inside_stencil(self):
        """测试模板内的极点"""
        sampler = compound_sampler(ClosedFormParams.from_ratio(1.0, 1.0))
        with pytest.raises(PoleError) as exc_info:
            compatibility_residual(sampler, 0.0, 0.0, fd_step=1e-3)
        assert exc_info.value.location == (0.0, 0.0)

    @pytest.mark.parametrize("kwargs", [{"fd_step": 0.0}, {"order": 3}])
    def test_invalid_arguments(self, kwargs):
        with pytest.raises(ParameterError):
            compatibility_residual(zero_sampler, 0.0, 0.0, **kwargs)

    def test_unknown_entry(self):
        with pytest.raises(ParameterError):
            scaled_sampler(zero_sampler, "u33", 2.0)

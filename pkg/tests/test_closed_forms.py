"""
测试闭式解、奇点与网格采样
"""

import math

import mpmath
import numpy as np
import pytest

from kdv_mkdv_lab.engine.closed_forms import (
    ClosedFormParams,
    complex_case_field,
    denominator_zeros,
    equal_constants_fields,
    make_family,
    phase_variables,
    r_family_denominator,
    r_family_fields,
    sample_on_grid,
    seed_jets,
    seed_pair,
    singular_points,
    three_component_fields,
    two_component_fields,
    zeta_formula_field,
)
from kdv_mkdv_lab.engine.core import build_grid
from kdv_mkdv_lab.engine.errors import NonRealSolutionError, ParameterError, PoleError
from kdv_mkdv_lab.engine.precision import extended_precision


def relative_gap(left, right) -> float:
    left = np.asarray(left, dtype=complex)
    right = np.asarray(right, dtype=complex)
    return float(np.max(np.abs(left - right)) / max(1.0, float(np.max(np.abs(right)))))


class TestSpotValues:
    """测试原点处的手算值"""

    def test_a1_r_half(self):
        """测试 a=1, r=0.5 时 u(0,0) = 10/3, v(0,0) = -8/3"""
        triple = r_family_fields(1.0, 0.5, 0.0, 0.0)
        assert abs(triple.f) < 1e-15
        assert triple.u == pytest.approx(10 / 3, abs=1e-10)
        assert triple.v == pytest.approx(-8 / 3, abs=1e-10)

    def test_a2_r_half(self):
        """测试 a=2, r=0.5 时 u(0,0) = 40/3"""
        assert r_family_fields(2.0, 0.5, 0.0, 0.0).u == pytest.approx(40 / 3, abs=1e-10)

    def test_mpmath_backend_agrees(self):
        """测试高精度后端给出相同的值"""
        with extended_precision(40) as backend:
            u = r_family_fields(1, 0.5, 0, 0, backend=backend).u
            assert abs(u - mpmath.mpf(10) / 3) < mpmath.mpf(10) ** -30


class TestFamilyEquivalence:
    """测试一般三分量解退化为 r 族"""

    @pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
    @pytest.mark.parametrize("r", [0.25, 0.5, 0.9])
    def test_three_component_equals_r_family(self, a, r):
        """测试 20x20 采样点相对差小于 1e-10"""
        x, t = np.meshgrid(np.linspace(-2, 2, 20), np.linspace(0, 0.5, 20))
        general = three_component_fields(ClosedFormParams.from_ratio(a, r), x, t)
        special = r_family_fields(a, r, x, t)
        for name in ("f", "u", "v"):
            assert relative_gap(getattr(general, name), getattr(special, name)) < 1e-10

    def test_equal_constants_form(self):
        """测试常数全为 1/2 时 (eta1, eta2) 形式与一般形式一致"""
        x, t = np.meshgrid(np.linspace(0.3, 1.7, 8), np.linspace(0.05, 0.2, 4))
        general = three_component_fields(ClosedFormParams(a=1.0), x, t)
        special = equal_constants_fields(1.0, x, t)
        for name in ("f", "u", "v"):
            assert relative_gap(getattr(general, name), getattr(special, name)) < 1e-10

    def test_r_one_matches_equal_constants(self):
        """测试 r = 1 即等常数情形"""
        x, t = np.meshgrid(np.linspace(0.3, 1.7, 8), np.linspace(0.05, 0.2, 4))
        special = equal_constants_fields(1.5, x, t)
        family = r_family_fields(1.5, 1.0, x, t)
        for name in ("f", "u", "v"):
            assert relative_gap(getattr(family, name), getattr(special, name)) < 1e-10


class TestTwoComponent:
    def test_u11_is_translated_sech_squared(self):
        """测试 c1 = c2 时 u11 = 2a^2 sech^2(a(x + a^2 t))"""
        x = np.linspace(-5, 5, 41)
        _, u11, _ = two_component_fields(ClosedFormParams.from_ratio(1.0, 0.5), x, 0.3)
        expected = 2.0 / np.cosh(x + 0.3) ** 2
        np.testing.assert_allclose(u11.real, expected, atol=1e-13)

    def test_f21_is_twice_phi_ratio(self):
        """测试零种子上 f21 = 2 phi2 / phi1"""
        p = ClosedFormParams(a=0.8, c1=0.3, c2=0.7, d1=0.4, d2=1.1)
        phi1, phi2 = seed_pair(p, 0.4, 0.2)
        f21, _, _ = two_component_fields(p, 0.4, 0.2)
        assert abs(f21 - 2 * phi2 / phi1) < 1e-13

    def test_seed_jets_derivatives(self):
        """测试 phi1'' = lambda phi1, phi2'' = -lambda phi2"""
        p = ClosedFormParams(a=1.3)
        phi1, phi2 = seed_jets(p, 0.2, 0.1, order=2)
        assert abs(phi1.derivative(2) - p.lam * phi1.value) < 1e-12
        assert abs(phi2.derivative(2) + p.lam * phi2.value) < 1e-12


class TestComplexCase:
    """测试复谱参数 lambda = -2i m^2"""

    @pytest.mark.parametrize("x, t", [(0.3, 0.1), (-0.7, 0.25), (1.1, -0.2)])
    def test_equal_constants_are_real(self, x, t):
        """测试常数全为 1/2 时一般点处 f 为实数"""
        constants = {"c1": 0.5, "c2": 0.5, "d1": 0.5, "d2": 0.5}
        f = complex_case_field(1.0, constants, x, t)
        assert abs(f.imag) <= 1e-10

    def test_unequal_constants_are_complex(self):
        """测试 c = 1, d = 2 时 f 为复数"""
        constants = {"c1": 1.0, "c2": 1.0, "d1": 2.0, "d2": 2.0}
        f = complex_case_field(1.0, constants, 0.3, 0.1)
        assert abs(f.imag) > 1e-3

    def test_branch_flip_changes_sign(self):
        """测试等常数时 a -> -a 使 f 变号"""
        constants = {"c1": 0.5, "c2": 0.5, "d1": 0.5, "d2": 0.5}
        f = complex_case_field(1.0, constants, 0.3, 0.1)
        flipped = complex_case_field(1.0, constants, 0.3, 0.1, flip_branch=True)
        assert abs(f + flipped) < 1e-10

    def test_origin_is_a_pole(self):
        """测试等常数分母在原点为零"""
        constants = {"c1": 0.5, "c2": 0.5, "d1": 0.5, "d2": 0.5}
        with pytest.raises(PoleError):
            complex_case_field(1.0, constants, 0.0, 0.0)
        with pytest.raises(PoleError):
            zeta_formula_field(1.0, 0.0, 0.0)

    def test_zeta_form_is_finite_off_the_pole(self):
        f = zeta_formula_field(1.0, np.array([0.3, -0.7]), np.array([0.1, 0.25]))
        assert np.all(np.isfinite(f))


class TestSingularPoints:
    """测试 r 族的极点位置"""

    def test_r_one_lattice(self):
        """测试 a=2, r=1 时的 (0, 0) 与 (pi/4, pi/16)"""
        points = singular_points(2.0, 1.0, (-1.0, 1.0), (-0.1, 0.3))
        for x, t in [(0.0, 0.0), (math.pi / 4, math.pi / 16)]:
            assert any(abs(p.x - x) < 1e-8 and abs(p.t - t) < 1e-8 for p in points)

    def test_r_one_true_zeros(self):
        """测试每个报告的零点处分母为零"""
        zeros = denominator_zeros(2.0, 1.0, (-2.0, 2.0), (-0.5, 0.5))
        assert zeros
        assert all(abs(p.denominator) < 1e-12 for p in zeros)
        assert all(p.kind == "zero" for p in zeros)

    def test_small_r_has_none(self):
        """测试 |r| < 1 时解无奇点"""
        assert singular_points(2.0, 0.5, (-10.0, 10.0), (0.0, 1.0)) == []

    def test_r_two_root(self):
        """测试 a=1, r=2, t=0: cosh^2 x = 4 cos^2 x 在 x = 0.82 附近"""
        points = singular_points(1.0, 2.0, (0.0, 2.0), (0.0, 0.0), t_samples=1)
        assert len(points) == 1
        assert points[0].x == pytest.approx(0.82, abs=0.01)
        assert abs(points[0].denominator) < 1e-10

    def test_infinite_window_rejected(self):
        with pytest.raises(ParameterError):
            singular_points(1.0, 2.0, (-math.inf, 0.0), (0.0, 1.0))


class TestSolutionFamily:
    """测试命名解族与网格采样"""

    def test_components_selection(self):
        """测试 components 选择并排序分量"""
        family = make_family("r-family", {"a": 1, "r": 0.5}, components=["u", "f"])
        state = sample_on_grid(family, build_grid(-2.0, 2.0, 0.5), 0.0)
        assert state.n_components == 2
        assert state.values[0, 4] == pytest.approx(10 / 3)
        assert state.values[1, 4] == pytest.approx(0.0, abs=1e-14)

    def test_pole_on_grid(self):
        """测试节点落在极点上时抛出带位置的 PoleError"""
        family = make_family("r-family", {"a": 1, "r": 1})
        with pytest.raises(PoleError) as exc_info:
            sample_on_grid(family, build_grid(-2.0, 2.0, 0.5), 0.0)
        assert exc_info.value.location == pytest.approx((0.0, 0.0))

    def test_non_real_sample(self):
        """测试拒绝复值分量"""
        family = make_family("complex-case", {"m": 1, "c1": 1, "c2": 1, "d1": 2, "d2": 2})
        with pytest.raises(NonRealSolutionError):
            sample_on_grid(family, build_grid(0.3, 1.3, 0.25), 0.1)

    def test_zero_family(self):
        family = make_family("zero", {"n_components": 3})
        state = sample_on_grid(family, build_grid(0.0, 1.0, 0.25), 0.0)
        assert state.values.shape == (3, 5)
        assert not state.values.any()

    def test_string_parameters(self):
        """测试复常数可用字符串给出"""
        family = make_family("three-component", {"a": 1, "c1": "0.5", "c2": 0.5, "d1": "0.5+0j", "d2": 0.5})
        assert family.closed_form_params().d1 == 0.5

    @pytest.mark.parametrize(
        "name, params, components, message",
        [
            ("soliton", {}, None, "unknown solution family"),
            ("r-family", {"a": 1}, None, "missing"),
            ("r-family", {"a": 1, "r": 0.5, "m": 1}, None, "unknown parameters"),
            ("r-family", {"a": 0, "r": 0.5}, None, "nonzero"),
            ("r-family", {"a": 1, "r": 0.5}, ["w"], "components"),
        ],
    )
    def test_invalid_family(self, name, params, components, message):
        with pytest.raises(ParameterError, match=message):
            make_family(name, params, components)


class TestInvariants:
    """测试闭式解的整体性质"""

    def test_decay_at_fifteen(self):
        """测试 a=1, r=0.5, t=0 时 |x| = 15 处各分量不超过最大值的 1e-6"""
        xs = np.linspace(-15.0, 15.0, 3001)
        profile = r_family_fields(1.0, 0.5, xs, 0.0)
        edges = r_family_fields(1.0, 0.5, np.array([-15.0, 15.0]), 0.0)
        for name in ("f", "u", "v"):
            peak = float(np.max(np.abs(profile.as_dict()[name])))
            assert float(np.max(np.abs(edges.as_dict()[name]))) <= 1e-6 * peak

    @pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
    @pytest.mark.parametrize("r", [0.0, 0.5, -0.7, 0.9])
    def test_denominator_bounded_below(self, a, r):
        """测试 |r| < 1 时分母不小于 1 - r²"""
        x, t = np.meshgrid(np.linspace(-6.0, 6.0, 121), np.linspace(-2.0, 2.0, 41))
        den = np.real(r_family_denominator(a, r, x, t))
        assert float(np.min(den)) >= (1 - r ** 2) - 1e-12

    @pytest.mark.parametrize("a", [0.5, 1.0, 1.7])
    def test_phase_sum(self, a):
        """测试 eta1 + eta2 = 2a³t"""
        x = np.linspace(-3.0, 3.0, 13)
        t = 0.37
        phases = phase_variables(a, x, t)
        np.testing.assert_allclose(phases.eta1 + phases.eta2, 2 * a ** 3 * t, rtol=0, atol=1e-13)

    @pytest.mark.parametrize(
        "params",
        [
            ClosedFormParams.from_ratio(1.0, 0.5),
            ClosedFormParams(a=1.3, c1=0.7, c2=0.4, d1=0.3, d2=0.3),
        ],
    )
    def test_real_parameters_give_real_fields(self, params):
        """测试实参数时三分量解的虚部不超过 1e-12 (相对)"""
        x, t = np.meshgrid(np.linspace(-5.0, 5.0, 41), np.linspace(-0.5, 0.5, 11))
        triple = three_component_fields(params, x, t)
        assert triple.max_imag_ratio() <= 1e-12
        assert triple.is_real()

    def test_complex_constants_are_not_real(self):
        """测试复常数时 is_real 为假"""
        params = ClosedFormParams(a=1.0, c1=0.5, c2=0.5, d1=0.2 + 0.2j, d2=0.2)
        triple = three_component_fields(params, np.linspace(-1.0, 1.0, 11), 0.1)
        assert triple.max_imag_ratio() > 1e-6
        assert not triple.is_real()

    def test_sampled_peak(self, r_family):
        """测试 [-20, 20], h = 0.25 上采样的 u 最大值为 10/3"""
        grid = build_grid(-20.0, 20.0, 0.25)
        state = sample_on_grid(r_family, grid, 0.0)
        u = state.values[1]
        assert float(np.max(u)) == pytest.approx(10 / 3, abs=1e-9)
        assert int(np.argmax(u)) == grid.index_of(0.0)

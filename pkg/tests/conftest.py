"""
Pytest configuration and shared fixtures
"""
import pytest

from kdv_mkdv_lab.engine.closed_forms import make_family
from kdv_mkdv_lab.engine.core import build_grid, preset_system


@pytest.fixture
def output_dir(tmp_path):
    """提供临时输出目录"""
    path = tmp_path / "out"
    path.mkdir()
    return path


@pytest.fixture
def kdv_scalar():
    """标量 KdV 预设系数"""
    return preset_system("kdv-scalar").coefficients


@pytest.fixture
def kdv_mkdv_3():
    """三分量 KdV-MKdV 预设系数"""
    return preset_system("kdv-mkdv-3").coefficients


@pytest.fixture
def soliton_grid():
    """[-20, 20], h = 0.25"""
    return build_grid(-20.0, 20.0, 0.25)


@pytest.fixture
def r_family():
    """r 族解 (a=1, r=0.5)"""
    return make_family("r-family", {"a": 1.0, "r": 0.5})


@pytest.fixture
def soliton_family():
    """两分量解的 u11 分量 (a=1, c1=c2): 2sech² 孤立子"""
    return make_family("two-component", {"a": 1.0, "r": 0.5}, components=["u11"])

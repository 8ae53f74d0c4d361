"""
Тесты для кривых символа (`src.pseudospec.services.symbol`).
"""

import math

import numpy as np
import pytest

from src.pseudospec.services.model import ModelParams
from src.pseudospec.services.resolvent import Region
from src.pseudospec.services.symbol import (
    AmbiguousWindingError,
    conjecture_region,
    find_theta0,
    operator_spectrum_contains,
    region_coverage,
    size_reduction_radius,
    symbol_curve,
    symbol_value,
    varpi,
    winding_number,
)


def test_symbol_value() -> None:
    """f(z) = z^{t+1}(1 + b z)."""
    assert symbol_value(1, (0,), 1j) == pytest.approx(-1)
    assert symbol_value(0, (2,), 1.0) == pytest.approx(3)


def test_varpi_and_reduced_radius() -> None:
    assert varpi(12, 2) == 12
    assert math.isclose(size_reduction_radius(12, 2, 1e-12), 0.1, rel_tol=1e-12)
    with pytest.raises(ValueError):
        size_reduction_radius(12, 0, 1e-3)
    with pytest.raises(ValueError):
        size_reduction_radius(12, 2, 2.0)


def test_reduced_radius_large_model() -> None:
    """n = 200, t = 3, ε = 1e−10: ϖ = 200, r = 10^{−1/20} ≈ 0.891."""
    assert varpi(200, 3) == 200
    assert math.isclose(size_reduction_radius(200, 3, 1e-10), 10 ** (-1 / 20), rel_tol=1e-12)


@pytest.mark.parametrize("t", range(7))
def test_winding_of_plain_power(t: int) -> None:
    curve = symbol_curve(t, (), 1.0, samples=1024)

    assert winding_number(curve, 0) == t + 1


def test_find_theta0_plain_power() -> None:
    """Для f(z) = z² первое пересечение вещественной оси — θ = π/2."""
    assert abs(find_theta0(1, (0,), 1.0) - math.pi / 2) < 1e-9


def test_find_theta0_in_first_interval() -> None:
    """f(z) = z(1 + b z), b = e^{−0.3i}: Im f < 0 при θ = 0, ноль около θ ≈ 0.1."""
    b = complex(np.exp(-0.3j))
    theta0 = find_theta0(0, (b,), 1.0, samples=16)

    assert 0 < theta0 < 2 * math.pi / 16
    assert abs(theta0 - 0.1) < 1e-10
    assert abs(np.imag(symbol_value(0, (b,), np.exp(1j * theta0)))) < 1e-10


def test_find_theta0_complex_coefficient() -> None:
    """b = e^{0.3i}: Im f = 2 sin(1.5θ + 0.15) cos((θ + 0.3)/2), первый ноль (π − 0.15)/1.5."""
    b = complex(np.exp(0.3j))
    theta0 = find_theta0(0, (b,), 1.0, samples=16)

    assert abs(theta0 - (math.pi - 0.15) / 1.5) < 1e-10


def test_find_theta0_with_coefficient() -> None:
    theta0 = find_theta0(1, (0.5,), 1.0)

    assert 0 < theta0 < math.pi
    assert abs(np.imag(symbol_value(1, (0.5,), np.exp(1j * theta0)))) < 1e-10


def test_symbol_curve_is_closed() -> None:
    curve = symbol_curve(2, (1,), 0.5, samples=256)
    arc = curve.inner_arc()

    assert curve.points[0] == curve.points[-1]
    assert arc[0] == arc[-1]
    assert curve.theta0 is not None


def test_symbol_curve_validation() -> None:
    with pytest.raises(ValueError):
        symbol_curve(1, (0,), 1.5)
    with pytest.raises(ValueError):
        symbol_curve(1, (0,), 1.0, samples=8)


def test_winding_number() -> None:
    circle = symbol_curve(0, (), 1.0, samples=512)
    square = symbol_curve(1, (), 1.0, samples=512)

    assert winding_number(circle, 0) == 1
    assert winding_number(circle, 2.0) == 0
    assert winding_number(square, 0.1j) == 2
    with pytest.raises(AmbiguousWindingError):
        winding_number(circle, 1.0)


def test_operator_spectrum_contains() -> None:
    assert operator_spectrum_contains(1, (0,), 0.5)
    assert operator_spectrum_contains(1, (0,), -1.0)
    assert not operator_spectrum_contains(1, (0,), 2.0)


def test_conjecture_region_mask() -> None:
    """n = 12, t = 2, ε = 1e−12: r = 0.1, кривая — окружность радиуса 10⁻³."""
    params = ModelParams(n=12, t=2, b_coeffs=(0,), delta=0.01)
    region = Region(-0.002, 0.002, -0.002, 0.002)

    conjecture = conjecture_region(params, 1e-12, region, (41, 41), samples=1024)

    assert math.isclose(conjecture.radius, 0.1, rel_tol=1e-12)
    assert math.isclose(conjecture.theta0, math.pi / 3, rel_tol=1e-9)
    assert conjecture.mask[20, 20]
    assert not conjecture.mask[0, 0]
    assert region_coverage(conjecture, np.array([0.0, 5e-4 + 2e-4j])) == 1.0
    assert region_coverage(conjecture, np.array([0.0019 + 0.0019j, 1.0])) == 0.0

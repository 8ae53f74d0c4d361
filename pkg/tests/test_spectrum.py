"""
Тесты для ненулевого спектра (`src.pseudospec.services.spectrum`).
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from src.pseudospec.services.arithmetic import EXACT, exact_complex
from src.pseudospec.services.model import ModelParams, build_matrix
from src.pseudospec.services.spectrum import (
    CircularLimitError,
    DegeneratePolynomialError,
    UnsupportedCoefficientsError,
    aberth_roots,
    catalan,
    char_poly,
    char_poly_moments,
    circular_limit,
    eigenpairs,
    nonzero_eigenvalues,
    outlier_expansion,
    p_gap,
    p_gap_prediction,
    scaled_char_poly,
)


def _exact(n: int, t: int, b: Fraction, delta: Fraction) -> ModelParams:
    return ModelParams(n=n, t=t, b_coeffs=(exact_complex(b),), delta=exact_complex(delta))


def test_char_poly_b0_small_case() -> None:
    """n = 4, t = 1, b = 0: z² − 4δz − 2δ."""
    poly = char_poly(ModelParams(n=4, t=1, b_coeffs=(0,), delta=0.1))

    assert poly.provenance == "b0"
    assert np.allclose(poly.as_complex(), [-0.2, -0.4, 1.0])


@pytest.mark.parametrize(
    "n, t, b",
    [
        (4, 1, Fraction(2)),
        (5, 1, Fraction(1, 3)),
        (9, 3, Fraction(-1, 2)),
        (12, 2, Fraction(1)),
        (13, 4, Fraction(3, 2)),
    ],
)
def test_closed_form_matches_moments_exactly(n: int, t: int, b: Fraction) -> None:
    """Замкнутая формула совпадает с многочленом из моментов ⟨N^k𝟙, 𝟙⟩."""
    params = _exact(n, t, b, Fraction(1, 10))

    closed = char_poly(params, EXACT).coefficients
    moments = char_poly_moments(params, EXACT).coefficients

    assert closed == moments


def test_char_poly_rejects_zero_delta() -> None:
    with pytest.raises(DegeneratePolynomialError, match="delta must be non-zero"):
        char_poly(ModelParams(n=6, t=1, b_coeffs=(1,), delta=0))


def test_char_poly_rejects_general_h() -> None:
    with pytest.raises(UnsupportedCoefficientsError):
        char_poly(ModelParams(n=6, t=1, b_coeffs=(1, 0.5), delta=0.1))


def test_aberth_roots_cubic() -> None:
    """(z − 1)(z − 2)(z + 3) = z³ − 7z + 6."""
    roots, residuals, _ = aberth_roots(np.array([6, -7, 0, 1], dtype=complex), initial_radius=4.0)

    assert np.allclose(sorted(roots.real), [-3, 1, 2], atol=1e-10)
    assert np.allclose(roots.imag, 0, atol=1e-10)
    assert residuals.max() <= 1e-12


def test_nonzero_eigenvalues_match_dense_solver() -> None:
    params = ModelParams(n=12, t=2, b_coeffs=(1,), delta=0.5)
    report = nonzero_eigenvalues(params)
    dense = np.linalg.eigvals(build_matrix(params))

    assert len(report.eigenvalues) == 4
    moduli = [abs(z) for z in report.eigenvalues]
    assert moduli == sorted(moduli, reverse=True)
    for lam in report.eigenvalues:
        assert np.min(np.abs(dense - lam)) < 1e-6 * max(1.0, abs(lam))


def test_small_case_roots_are_exact() -> None:
    """n = 4, t = 1, b = 0, δ = 1/4: z² − z − 1/2, корни (1 ± √3)/2."""
    report = nonzero_eigenvalues(ModelParams(n=4, t=1, b_coeffs=(0,), delta=0.25))

    assert abs(report.eigenvalues[0] - (1 + math.sqrt(3)) / 2) < 1e-12
    assert abs(report.eigenvalues[1] - (1 - math.sqrt(3)) / 2) < 1e-12


@pytest.mark.parametrize("n, t, b", [(100, 3, 1.0), (60, 5, 0.5 + 0.5j), (200, 1, 0.0)])
def test_roots_sum_to_trace(n: int, t: int, b: complex) -> None:
    """Σ λ_j = tr M = nδ."""
    report = nonzero_eigenvalues(ModelParams(n=n, t=t, b_coeffs=(b,), delta=0.01))

    assert abs(sum(report.eigenvalues) - n * 0.01) <= 1e-8 * n * 0.01


def test_outlier_expansion_approaches_largest_root() -> None:
    params = ModelParams(n=40, t=1, b_coeffs=(0,), delta=1.0)
    report = nonzero_eigenvalues(params)

    assert abs(outlier_expansion(params, 3) - report.outlier) < 1e-6
    assert abs(outlier_expansion(params, 0) - (41.0)) < 1e-12


def test_outlier_expansion_requires_large_n_delta() -> None:
    with pytest.raises(ValueError, match=r"\|nδ\| > 1"):
        outlier_expansion(ModelParams(n=10, t=1, b_coeffs=(0,), delta=0.01), 1)


def test_catalan_numbers() -> None:
    assert [catalan(k) for k in range(6)] == [1, 1, 2, 5, 14, 42]


def test_circular_limit_points() -> None:
    """n = 13, t = 6: p1 = p2 = 1, единственная предельная точка −(1+b)."""
    limit = circular_limit(ModelParams(n=13, t=6, b_coeffs=(0,), delta=0.5))

    assert limit.preconditions_hold
    assert len(limit.points) == 1
    assert abs(limit.points[0] + 1) < 1e-12


def test_circular_limit_strict_and_lenient() -> None:
    params = ModelParams(n=12, t=2, b_coeffs=(0,), delta=0.5)

    with pytest.raises(CircularLimitError) as exc_info:
        circular_limit(params)
    assert any("p1" in item for item in exc_info.value.failed)

    lenient = circular_limit(params, strict=False)
    assert not lenient.preconditions_hold
    assert len(lenient.points) == 3


def test_eigenpairs_are_biorthonormal() -> None:
    params = ModelParams(n=10, t=1, b_coeffs=(0.5,), delta=0.2)
    report = nonzero_eigenvalues(params)
    matrix = build_matrix(params)

    for pair in eigenpairs(params, report):
        scale = abs(pair.eigenvalue) * np.linalg.norm(pair.right)
        assert np.linalg.norm(matrix @ pair.right - pair.eigenvalue * pair.right) < 1e-8 * scale
        assert abs(pair.left @ pair.right - 1) < 1e-10
        assert pair.condition_number >= 1 - 1e-12


def test_p_gap_prediction_rule() -> None:
    assert p_gap_prediction(13, 3) == 1
    assert p_gap_prediction(13, 4) == 0
    assert p_gap_prediction(13, 1) is None
    for n in range(4, 60):
        for t in range(n - 1):
            predicted = p_gap_prediction(n, t)
            if predicted is not None:
                assert predicted == p_gap(n, t)


@pytest.mark.parametrize("n, t, b", [(12, 2, 1.0), (13, 4, 1.5), (9, 1, -0.5 + 0.3j)])
def test_scaled_char_poly_is_rescaled_original(n: int, t: int, b: complex) -> None:
    """p(z/(1+b)) = P(z)/(1+b)^{p1+1}."""
    params = ModelParams(n=n, t=t, b_coeffs=(b,), delta=0.1)
    original = char_poly(params)
    scaled = scaled_char_poly(params)

    assert scaled.scale == 1 + b
    for z in (0.3 + 0.1j, -1.2, 2.0 + 2.0j):
        expected = original.evaluate(z) / (1 + b) ** (original.degree)
        assert abs(scaled.evaluate(z) - expected) <= 1e-12 * max(1.0, abs(expected))


def test_scaled_char_poly_b0_is_original() -> None:
    params = ModelParams(n=10, t=2, b_coeffs=(0.0,), delta=0.1)

    assert scaled_char_poly(params).provenance == "b0"


@pytest.mark.parametrize("t", [1, 2, 3])
def test_roots_sum_to_trace_large_n(t: int) -> None:
    """n = 500, b = 1: без масштабирования коэффициенты доходят до 2^{p1}."""
    n, delta = 500, 0.01
    report = nonzero_eigenvalues(ModelParams(n=n, t=t, b_coeffs=(1.0,), delta=delta))

    assert len(report.eigenvalues) == (n - 1) // (t + 1) + 1
    assert abs(sum(report.eigenvalues) - n * delta) <= 1e-8 * n * delta
    assert max(report.residuals) <= 1e-10


@pytest.mark.parametrize("n", [50, 100, 300, 500])
@pytest.mark.parametrize("b", [0.0, 1.0, 0.5 + 0.5j])
def test_root_residuals_are_small(n: int, b: complex) -> None:
    report = nonzero_eigenvalues(ModelParams(n=n, t=2, b_coeffs=(b,), delta=0.01))

    assert max(report.residuals) <= 1e-10

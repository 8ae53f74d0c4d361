"""
Тесты для резольвенты и псевдоспектров (`src.pseudospec.services.resolvent`).
"""

import math

import numpy as np
import pytest

from src.pseudospec.services.jordan import build_jordan_basis
from src.pseudospec.services.model import ModelParams, build_matrix
from src.pseudospec.services.resolvent import (
    NearSingularResolventError,
    Region,
    check_enclosure,
    default_region,
    enclosure_disks,
    grid_axes,
    pseudospectrum_grid,
    resolvent_bound,
    resolvent_direct,
    resolvent_jordan,
    resolvent_norm_direct,
    sigma_min,
    zero_component,
)
from src.pseudospec.services.spectrum import eigenpairs, nonzero_eigenvalues


@pytest.fixture
def small_model() -> ModelParams:
    return ModelParams(n=8, t=2, b_coeffs=(0.5,), delta=0.05)


def test_sigma_min_small_matrix_uses_svd() -> None:
    matrix = np.diag([3.0, 0.5, 2.0]).astype(complex)

    assert math.isclose(sigma_min(matrix), 0.5, rel_tol=1e-12)


def test_sigma_min_large_matrix_inverse_iteration() -> None:
    """При n > 200 σ_min считается обратными итерациями."""
    diagonal = np.concatenate([[0.25], np.linspace(1.0, 3.0, 209)])
    matrix = np.diag(diagonal).astype(complex)

    assert math.isclose(sigma_min(matrix), 0.25, rel_tol=1e-6)


@pytest.mark.parametrize("z", [3.0 + 2.0j, -0.4 + 0.9j, 0.15 - 0.1j])
def test_jordan_expansion_matches_direct_resolvent(small_model: ModelParams, z: complex) -> None:
    basis = build_jordan_basis(small_model)
    spectrum = nonzero_eigenvalues(small_model)
    matrix = build_matrix(small_model)

    expanded = resolvent_jordan(small_model, basis, spectrum, z)
    direct = resolvent_direct(matrix, z)

    assert np.linalg.norm(expanded - direct) <= 1e-8 * np.linalg.norm(direct)


def test_resolvent_bound_dominates_norm(small_model: ModelParams) -> None:
    basis = build_jordan_basis(small_model)
    spectrum = nonzero_eigenvalues(small_model)
    pairs = eigenpairs(small_model, spectrum)
    matrix = build_matrix(small_model)

    for z in (0.3 + 0.2j, -0.5j, 2.0):
        assert resolvent_bound(basis, pairs, z) >= resolvent_norm_direct(matrix, z) * (1 - 1e-10)


def test_resolvent_jordan_near_zero_raises(small_model: ModelParams) -> None:
    basis = build_jordan_basis(small_model)
    spectrum = nonzero_eigenvalues(small_model)

    with pytest.raises(NearSingularResolventError):
        resolvent_jordan(small_model, basis, spectrum, 1e-14)


def test_resolvent_growth_near_zero_follows_index() -> None:
    """‖(zI − M)⁻¹‖ растёт как |z|^{−k₀}; при n = 12, t = 2 k₀ = 4."""
    matrix = build_matrix(ModelParams(n=12, t=2, b_coeffs=(0,), delta=0.01))
    direction = np.exp(1j * math.pi / 7)

    near = resolvent_norm_direct(matrix, 1e-3 * direction)
    far = resolvent_norm_direct(matrix, 1e-2 * direction)
    slope = math.log10(near / far)

    assert abs(slope - 4) < 0.1


def test_default_region_and_axes() -> None:
    region = default_region(ModelParams(n=6, t=1, b_coeffs=(1,), delta=0.1))
    xs, ys = grid_axes(region, (5, 3))

    assert (region.xmin, region.xmax) == (-3.0, 3.0)
    assert xs.tolist() == [-3.0, -1.5, 0.0, 1.5, 3.0]
    assert ys.tolist() == [-3.0, 0.0, 3.0]
    with pytest.raises(ValueError):
        grid_axes(region, (1, 5))
    with pytest.raises(ValueError):
        Region(1.0, 0.0, -1.0, 1.0)


@pytest.mark.asyncio
async def test_pseudospectrum_grid_values(small_model: ModelParams) -> None:
    matrix = build_matrix(small_model)
    region = Region(-1.0, 1.0, -0.5, 0.5)

    grid = await pseudospectrum_grid(matrix, region, (5, 3), workers=2)

    assert grid.values.shape == (3, 5)
    iy, ix = 2, 1
    z = grid.xs[ix] + 1j * grid.ys[iy]
    expected = np.linalg.svd(z * np.eye(8) - matrix, compute_uv=False)[-1]
    assert math.isclose(grid.values[iy, ix], expected, rel_tol=1e-10)


@pytest.mark.asyncio
@pytest.mark.parametrize("epsilon", [1e-8, 1e-10])
@pytest.mark.parametrize("b", [0.0, 1.0])
@pytest.mark.parametrize("n", [50, 100])
@pytest.mark.parametrize("t", [1, 2, 5])
async def test_zero_component_lies_in_enclosure_disk(
    t: int, n: int, b: float, epsilon: float
) -> None:
    """Компонента σ_ε, содержащая ноль, лежит в диске (εtκ₀)^{(t+1)/(n+t+1)} + ячейка."""
    params = ModelParams(n=n, t=t, b_coeffs=(b,), delta=0.01)
    basis = build_jordan_basis(params)
    spectrum = nonzero_eigenvalues(params)
    resolution = (41, 41) if n <= 50 else (31, 31)
    grid = await pseudospectrum_grid(build_matrix(params), default_region(params), resolution)

    disks = enclosure_disks(params, basis, spectrum, epsilon)
    check = check_enclosure(grid, disks)

    assert zero_component(grid, epsilon).any()
    assert check.component_size >= 1
    assert check.ok, check


def test_enclosure_disks_validate_epsilon(small_model: ModelParams) -> None:
    basis = build_jordan_basis(small_model)
    spectrum = nonzero_eigenvalues(small_model)

    with pytest.raises(ValueError):
        enclosure_disks(small_model, basis, spectrum, 1.0)


@pytest.mark.parametrize("n, t", [(12, 1), (16, 2), (20, 3)])
def test_jordan_expansion_random_points(n: int, t: int) -> None:
    """100 случайных z на расстоянии ≥ 0.05 от спектра: разложение совпадает с обращением."""
    params = ModelParams(n=n, t=t, b_coeffs=(0.5,), delta=0.05)
    basis = build_jordan_basis(params)
    spectrum = nonzero_eigenvalues(params)
    pairs = eigenpairs(params, spectrum)
    matrix = build_matrix(params)
    spectrum_points = np.array([0.0, *spectrum.eigenvalues])
    rng = np.random.default_rng(2024)

    checked = 0
    while checked < 100:
        z = complex(rng.uniform(-2.5, 2.5), rng.uniform(-2.5, 2.5))
        if np.min(np.abs(spectrum_points - z)) < 0.05:
            continue
        expanded = resolvent_jordan(params, basis, spectrum, z, pairs)
        direct = resolvent_direct(matrix, z)
        assert np.linalg.norm(expanded - direct) <= 1e-6 * np.linalg.norm(direct), z
        checked += 1

"""
Тесты для ансамблей возмущений (`src.pseudospec.services.ensemble`).
"""

import math

import numpy as np
import pytest

from src.pseudospec.services import ensemble as ensemble_module
from src.pseudospec.services.cache import CacheSettings, InMemorySampleCache
from src.pseudospec.services.ensemble import (
    EigensolverError,
    FitError,
    RadiusPoint,
    boundary_radius_ratio,
    filter_outer,
    fit_radius_law,
    mean_radius,
    run_ensemble,
    sample_gaussian,
    sweep_mean_radius,
)
from src.pseudospec.services.model import ModelParams
from src.pseudospec.services.resolvent import default_region
from src.pseudospec.services.spectrum import nonzero_eigenvalues
from src.pseudospec.services.symbol import conjecture_region, region_coverage


@pytest.fixture
def params() -> ModelParams:
    return ModelParams(n=12, t=2, b_coeffs=(1,), delta=0.5)


def test_sample_gaussian_is_reproducible() -> None:
    first = sample_gaussian(6, (42, 1))
    again = sample_gaussian(6, (42, 1))
    other = sample_gaussian(6, (42, 2))

    assert first.shape == (6, 6)
    assert np.array_equal(first, again)
    assert not np.array_equal(first, other)


@pytest.mark.asyncio
async def test_run_ensemble_does_not_depend_on_workers(params: ModelParams) -> None:
    serial = await run_ensemble(params, 1e-10, samples=4, master_seed=7, workers=1)
    parallel = await run_ensemble(params, 1e-10, samples=4, master_seed=7, workers=3)

    assert serial.eigenvalues.size == 4 * 12
    assert np.array_equal(serial.sample_index, parallel.sample_index)
    assert np.allclose(serial.eigenvalues, parallel.eigenvalues, rtol=0, atol=1e-12)


@pytest.mark.asyncio
async def test_run_ensemble_reads_cached_samples(params: ModelParams, monkeypatch) -> None:
    """Повторный прогон берёт выборки из кэша и не вызывает решатель."""
    cache = InMemorySampleCache(CacheSettings(ttl_seconds=60))
    first = await run_ensemble(params, 1e-10, samples=3, master_seed=1, cache=cache)

    def failing_solver(matrix: np.ndarray) -> np.ndarray:
        raise AssertionError("решатель не должен вызываться")

    monkeypatch.setattr(ensemble_module, "dense_eigensolve", failing_solver)
    second = await run_ensemble(params, 1e-10, samples=3, master_seed=1, cache=cache)

    assert np.array_equal(first.eigenvalues, second.eigenvalues)


@pytest.mark.asyncio
async def test_run_ensemble_records_failures(params: ModelParams, monkeypatch) -> None:
    def broken_solver(matrix: np.ndarray) -> np.ndarray:
        raise EigensolverError("QR не сошёлся")

    monkeypatch.setattr(ensemble_module, "dense_eigensolve", broken_solver)

    cloud = await run_ensemble(params, 1e-10, samples=2, master_seed=3)

    assert [index for index, _ in cloud.failures] == [1, 2]
    assert cloud.eigenvalues.size == 0


@pytest.mark.asyncio
async def test_filter_outer_marks_one_value_per_eigenvalue(params: ModelParams) -> None:
    spectrum = nonzero_eigenvalues(params)
    cloud = await run_ensemble(params, 1e-10, samples=3, master_seed=11)

    filtered = filter_outer(cloud, spectrum)

    assert int(filtered.filtered.sum()) == 3 * len(spectrum.eigenvalues)
    for lam in spectrum.eigenvalues:
        assert np.min(np.abs(filtered.outer() - lam)) < 1e-6
    assert filtered.remaining().size == 3 * (12 - len(spectrum.eigenvalues))
    assert mean_radius(cloud, spectrum) > 0


def test_fit_radius_law_recovers_coefficients() -> None:
    c1, c2 = -20.0, 0.1
    points = [
        RadiusPoint(t=t, n=n, mean_radius=math.exp(c1 * (t + 1) / (n + t + 1) + c2))
        for t, n in [(2, 40), (3, 60), (5, 80), (8, 120)]
    ]

    fit = fit_radius_law(points)

    assert math.isclose(fit.c1, c1, rel_tol=1e-9)
    assert math.isclose(fit.c2, c2, rel_tol=1e-9)
    assert fit.residual < 1e-9
    assert fit.points == 4


@pytest.mark.parametrize(
    "points, message",
    [
        ([(1, 10, 0.5), (2, 10, 0.4)], "хотя бы 3"),
        ([(1, 10, 0.5), (2, 10, 0.0), (3, 10, 0.3)], "положительными"),
        ([(1, 10, 0.5), (1, 10, 0.4), (1, 10, 0.3)], "одинаковое"),
    ],
)
def test_fit_radius_law_errors(points: list, message: str) -> None:
    with pytest.raises(FitError, match=message):
        fit_radius_law(points)


@pytest.mark.asyncio
async def test_mean_radius_law_slope() -> None:
    """log R̄ ≈ c1·(t+1)/(n+t+1) + c2 с c1 ≈ log δ̃."""
    pairs = [(t, n) for t in (8, 10, 12) for n in (120, 180, 240)]

    points = await sweep_mean_radius(
        pairs, b_coeffs=(0,), delta=1e-2, tilde_delta=1e-10, samples=4, master_seed=0
    )
    fit = fit_radius_law(points)

    assert -30 <= fit.c1 <= -17
    assert -0.3 <= fit.c2 <= 0.3


def test_boundary_radius_ratio_is_positive() -> None:
    ratio = boundary_radius_ratio(0.5, n=12, t=2, b_coeffs=(1,), epsilon=1e-10)

    assert ratio > 0


@pytest.mark.asyncio
async def test_cloud_follows_reduced_symbol_region() -> None:
    """
    n = 200, t = 3, b = 1, δ̃ = 10⁻¹⁰: внешние значения почти не сдвигаются,
    остальные ложатся в область уменьшенной кривой, а область не зависит от δ.
    """
    params = ModelParams(n=200, t=3, b_coeffs=(1.0,), delta=1e-2)
    spectrum = nonzero_eigenvalues(params)
    cloud = await run_ensemble(params, 1e-10, samples=4, master_seed=5, workers=2)
    cloud = filter_outer(cloud, spectrum)

    targets = np.array(spectrum.eigenvalues)
    outer = cloud.outer()
    displacement = np.abs(outer[:, None] - targets[None, :]) / np.abs(targets)[None, :]
    assert displacement.min(axis=1).max() < 1e-4

    region = default_region(params)
    conjecture = conjecture_region(params, 1e-10, region, (201, 201), samples=2048)
    assert region_coverage(conjecture, cloud.remaining()) >= 0.95

    smaller_delta = ModelParams(n=200, t=3, b_coeffs=(1.0,), delta=1e-3)
    again = conjecture_region(smaller_delta, 1e-10, region, (201, 201), samples=2048)
    assert np.array_equal(conjecture.mask, again.mask)
    assert again.radius == conjecture.radius

"""
Ансамбли гауссовых возмущений M + δ̃Z и статистика среднего радиуса.

Выборка i строится из собственного потока Philox, порождённого
SeedSequence([master_seed, i]), поэтому результат не зависит от порядка
и числа параллельных задач.
"""

from __future__ import annotations

import asyncio
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Sequence

import numpy as np
import scipy.linalg

from src.pseudospec.services.arithmetic import FLOAT
from src.pseudospec.services.cache import SampleCache, ensemble_key
from src.pseudospec.services.model import ModelParams, build_matrix
from src.pseudospec.services.spectrum import SpectrumReport, nonzero_eigenvalues
from src.pseudospec.services.symbol import size_reduction_radius, symbol_curve

logger = logging.getLogger("pseudospec")

DEFAULT_MATCH_TOL = 1e-2


class EigensolverError(Exception):
    """Плотный решатель не сошёлся."""


class FitError(ValueError):
    """Линейная подгонка невозможна."""


@dataclass(frozen=True)
class EnsembleCloud:
    """
    Собственные значения возмущённых копий.

    eigenvalues и sample_index — плоские массивы одной длины; filtered
    отмечает значения, приписанные невозмущённому ненулевому спектру.
    """

    params: ModelParams
    tilde_delta: complex
    seed: int
    samples: int
    eigenvalues: np.ndarray
    sample_index: np.ndarray
    filtered: np.ndarray
    failures: tuple[tuple[int, str], ...] = field(default_factory=tuple)

    def remaining(self) -> np.ndarray:
        return self.eigenvalues[~self.filtered]

    def outer(self) -> np.ndarray:
        return self.eigenvalues[self.filtered]


@dataclass(frozen=True)
class RadiusPoint:
    t: int
    n: int
    mean_radius: float


@dataclass(frozen=True)
class RadiusFit:
    """log R̄ = c1·(t+1)/(n+t+1) + c2."""

    c1: float
    c2: float
    residual: float
    points: int


def sample_gaussian(n: int, stream_seed: Sequence[int] | int) -> np.ndarray:
    """n×n матрица с независимыми X + iY, X, Y ~ N(0, 1)."""
    entropy = list(stream_seed) if isinstance(stream_seed, Sequence) else [stream_seed]
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))
    real = rng.standard_normal((n, n))
    imag = rng.standard_normal((n, n))
    return real + 1j * imag


def dense_eigensolve(matrix: np.ndarray) -> np.ndarray:
    """Все собственные значения (LAPACK: балансировка, Хессенберг, QR со сдвигами)."""
    try:
        return scipy.linalg.eigvals(np.asarray(matrix, dtype=complex))
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigensolverError(f"QR-итерации не сошлись: {exc}") from exc


async def run_ensemble(
    params: ModelParams,
    tilde_delta: complex,
    samples: int,
    master_seed: int,
    workers: int = 4,
    cache: SampleCache | None = None,
) -> EnsembleCloud:
    """Собственные значения M + δ̃Z_i, i = 1..samples; сбои выборок записываются."""
    if samples < 1:
        raise ValueError(f"Нужна хотя бы одна выборка, получено samples={samples}")
    base = np.asarray(build_matrix(params), dtype=complex)
    scale = FLOAT.to_complex(tilde_delta)
    key = ensemble_key(params, scale, master_seed)
    semaphore = asyncio.Semaphore(max(1, workers))

    def solve(index: int) -> np.ndarray:
        perturbation = sample_gaussian(params.n, (master_seed, index))
        return dense_eigensolve(base + scale * perturbation)

    async def run_one(index: int) -> tuple[int, np.ndarray | None, str | None]:
        if cache is not None:
            cached = await cache.get(key, index)
            if cached is not None:
                return index, cached, None
        async with semaphore:
            try:
                values = await asyncio.to_thread(solve, index)
            except EigensolverError as exc:
                logger.warning("Выборка %d пропущена: %s", index, exc)
                return index, None, str(exc)
        if cache is not None:
            await cache.set(key, index, values)
        return index, values, None

    results = await asyncio.gather(*(run_one(i) for i in range(1, samples + 1)))
    results.sort(key=lambda item: item[0])

    values_list: list[np.ndarray] = []
    index_list: list[np.ndarray] = []
    failures: list[tuple[int, str]] = []
    for index, values, error in results:
        if values is None:
            failures.append((index, error or ""))
            continue
        values_list.append(values)
        index_list.append(np.full(values.size, index, dtype=int))

    eigenvalues = np.concatenate(values_list) if values_list else np.zeros(0, dtype=complex)
    sample_index = np.concatenate(index_list) if index_list else np.zeros(0, dtype=int)
    logger.info(
        "Ансамбль: n=%d, t=%d, выборок %d, сбоев %d", params.n, params.t, samples, len(failures)
    )
    return EnsembleCloud(
        params=params,
        tilde_delta=scale,
        seed=master_seed,
        samples=samples,
        eigenvalues=eigenvalues,
        sample_index=sample_index,
        filtered=np.zeros(eigenvalues.size, dtype=bool),
        failures=tuple(failures),
    )


def filter_outer(
    cloud: EnsembleCloud, spectrum: SpectrumReport, match_tol: float = DEFAULT_MATCH_TOL
) -> EnsembleCloud:
    """
    В каждой выборке помечает p1+1 значений, приписанных λ_j: ближайшее
    свободное в пределах match_tol·|λ_j|, иначе свободное наибольшего модуля.
    """
    targets = np.array(spectrum.eigenvalues, dtype=complex)
    filtered = np.zeros(cloud.eigenvalues.size, dtype=bool)
    ambiguous = 0
    fallbacks = 0
    for index in np.unique(cloud.sample_index):
        positions = np.flatnonzero(cloud.sample_index == index)
        values = cloud.eigenvalues[positions]
        claimed = np.zeros(values.size, dtype=bool)
        for lam in targets:
            distance = np.abs(values - lam)
            nearest = int(np.argmin(distance))
            if claimed[nearest]:
                ambiguous += 1
            distance = np.where(claimed, np.inf, distance)
            pick = int(np.argmin(distance))
            if distance[pick] > match_tol * abs(lam):
                fallbacks += 1
                moduli = np.where(claimed, -np.inf, np.abs(values))
                pick = int(np.argmax(moduli))
            claimed[pick] = True
        filtered[positions[claimed]] = True
    if ambiguous:
        logger.warning("Неоднозначных сопоставлений внешних значений: %d", ambiguous)
    if fallbacks:
        logger.info("Сопоставлений по наибольшему модулю: %d", fallbacks)
    return replace(cloud, filtered=filtered)


def mean_radius(
    cloud: EnsembleCloud, spectrum: SpectrumReport, match_tol: float = DEFAULT_MATCH_TOL
) -> float:
    """R̄: средний модуль значений, оставшихся после фильтра внешнего спектра."""
    remaining = filter_outer(cloud, spectrum, match_tol).remaining()
    if remaining.size == 0:
        return 0.0
    return float(np.abs(remaining).mean())


def fit_radius_law(points: Sequence[RadiusPoint | tuple[int, int, float]]) -> RadiusFit:
    """Наименьшие квадраты для log R̄ = c1·x + c2, x = (t+1)/(n+t+1)."""
    rows = [p if isinstance(p, RadiusPoint) else RadiusPoint(*p) for p in points]
    if len(rows) < 3:
        raise FitError(f"Для подгонки нужно хотя бы 3 точки, получено {len(rows)}")
    if any(p.mean_radius <= 0 for p in rows):
        raise FitError("Все значения R̄ должны быть положительными")
    x = np.array([(p.t + 1) / (p.n + p.t + 1) for p in rows])
    y = np.log([p.mean_radius for p in rows])
    if np.ptp(x) == 0:
        raise FitError("Все точки имеют одинаковое x = (t+1)/(n+t+1)")
    design = np.column_stack([x, np.ones_like(x)])
    (c1, c2), *_ = np.linalg.lstsq(design, y, rcond=None)
    residual = float(np.sqrt(np.mean((design @ np.array([c1, c2]) - y) ** 2)))
    return RadiusFit(c1=float(c1), c2=float(c2), residual=residual, points=len(rows))


async def sweep_mean_radius(
    pairs: Sequence[tuple[int, int]],
    b_coeffs: Sequence[Any],
    delta: Any,
    tilde_delta: complex,
    samples: int,
    master_seed: int,
    match_tol: float = DEFAULT_MATCH_TOL,
    workers: int = 4,
    cache: SampleCache | None = None,
) -> list[RadiusPoint]:
    """R̄(t, n) для каждой пары (t, n) по очереди."""
    out = []
    for t, n in pairs:
        params = ModelParams(n=n, t=t, b_coeffs=tuple(b_coeffs), delta=delta)
        spectrum = nonzero_eigenvalues(params)
        cloud = await run_ensemble(params, tilde_delta, samples, master_seed, workers, cache)
        radius = mean_radius(cloud, spectrum, match_tol)
        logger.info("R̄(t=%d, n=%d) = %.6f", t, n, radius)
        out.append(RadiusPoint(t=t, n=n, mean_radius=radius))
    return out


def boundary_radius_ratio(
    radius: float, n: int, t: int, b_coeffs: Sequence[Any], epsilon: float
) -> float:
    """R̄ к среднему модулю внутренних дуг кривой с уменьшенным радиусом."""
    r = size_reduction_radius(n, t, epsilon)
    curve = symbol_curve(t, b_coeffs, r)
    boundary = float(np.abs(curve.inner_arc()).mean())
    if boundary == 0 or math.isnan(boundary):
        raise FitError("Радиус граничной кривой равен нулю")
    return radius / boundary

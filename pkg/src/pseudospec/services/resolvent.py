"""
Резольвента (zI − M)⁻¹, её норма и ε-псевдоспектры на сетке.

Псевдоспектр хранится как поле σ_min(zI − M): один расчёт обслуживает
любое ε, принадлежность σ_ε — это просто σ_min < ε.
"""

from __future__ import annotations

import asyncio
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.ndimage

from src.pseudospec.services.arithmetic import FLOAT, to_complex_array
from src.pseudospec.services.jordan import JordanBasis, condition_numbers
from src.pseudospec.services.model import ModelParams
from src.pseudospec.services.spectrum import EigenPair, SpectrumReport, eigenpairs

logger = logging.getLogger("pseudospec")

SVD_MAX_N = 200
UNDERFLOW = 1e-300
NEAR_SINGULAR = 1e-12


class NearSingularResolventError(Exception):
    """z слишком близко к собственному значению для жорданова разложения."""


@dataclass(frozen=True)
class Region:
    """Прямоугольник [xmin, xmax] × [ymin, ymax] в комплексной плоскости."""

    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def __post_init__(self) -> None:
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise ValueError(f"Пустая область: {self}")

    def contains(self, z: complex) -> bool:
        return self.xmin <= z.real <= self.xmax and self.ymin <= z.imag <= self.ymax


@dataclass(frozen=True)
class PseudoGrid:
    """values[iy, ix] = σ_min(zI − M) в узле z = xs[ix] + i·ys[iy]."""

    region: Region
    resolution: tuple[int, int]
    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray

    def membership(self, epsilon: float) -> np.ndarray:
        return self.values < epsilon

    def nodes(self) -> np.ndarray:
        return self.xs[None, :] + 1j * self.ys[:, None]

    @property
    def cell_diagonal(self) -> float:
        dx = self.xs[1] - self.xs[0]
        dy = self.ys[1] - self.ys[0]
        return float(np.hypot(dx, dy))


@dataclass(frozen=True)
class EnclosureDisks:
    """Нулевой диск радиуса (εC₀)^{(t+1)/(n+t+1)} и диски радиуса εκ_j вокруг λ_j."""

    epsilon: float
    c0: float
    exponent: float
    zero_radius: float
    eigen_centers: tuple[complex, ...]
    eigen_radii: tuple[float, ...]


@dataclass(frozen=True)
class EnclosureCheck:
    ok: bool
    component_size: int
    max_modulus: float
    allowed_radius: float


def sigma_min(shifted: np.ndarray, tol: float = 1e-8, max_iter: int = 500, restarts: int = 3) -> float:
    """
    Наименьшее сингулярное число: полный SVD при n ≤ 200, иначе обратные
    итерации на (A†A)⁻¹ через одно LU-разложение A.
    """
    n = shifted.shape[0]
    if n <= SVD_MAX_N:
        return float(scipy.linalg.svdvals(shifted)[-1])

    lu, piv = scipy.linalg.lu_factor(shifted, check_finite=False)
    if np.min(np.abs(np.diag(lu))) == 0.0:
        return 0.0
    best = np.inf
    for attempt in range(restarts):
        rng = np.random.default_rng(attempt)
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        x /= np.linalg.norm(x)
        estimate = 0.0
        for _ in range(max_iter):
            y = scipy.linalg.lu_solve((lu, piv), x, trans=2, check_finite=False)
            w = scipy.linalg.lu_solve((lu, piv), y, check_finite=False)
            growth = float(np.linalg.norm(w))
            if not np.isfinite(growth) or growth == 0.0:
                return 0.0
            x = w / growth
            if abs(growth - estimate) <= tol * growth:
                estimate = growth
                break
            estimate = growth
        else:
            logger.warning("Обратные итерации не сошлись, попытка %d", attempt + 1)
            best = min(best, 1.0 / np.sqrt(estimate))
            continue
        return float(1.0 / np.sqrt(estimate))
    return float(best)


def resolvent_norm_direct(matrix: np.ndarray, z: complex) -> float:
    """‖(zI − M)⁻¹‖₂ = 1/σ_min(zI − M); σ_min < 1e-300 даёт +∞."""
    shifted = z * np.eye(matrix.shape[0]) - matrix
    sigma = sigma_min(shifted)
    if sigma < UNDERFLOW:
        return float("inf")
    return 1.0 / sigma


def resolvent_direct(matrix: np.ndarray, z: complex) -> np.ndarray:
    size = matrix.shape[0]
    return scipy.linalg.solve(z * np.eye(size) - matrix, np.eye(size, dtype=complex))


def _pairs(params: ModelParams, spectrum: SpectrumReport, pairs: Sequence[EigenPair] | None) -> Sequence[EigenPair]:
    return eigenpairs(params, spectrum) if pairs is None else pairs


def _chains(basis: JordanBasis) -> list[tuple[list[np.ndarray], list[np.ndarray]]]:
    out = []
    for right, left in zip(basis.right_chains, basis.left_chains):
        out.append(
            (
                [to_complex_array(v) for v in right],
                [to_complex_array(w) for w in left],
            )
        )
    return out


def _check_distance(z: complex, basis: JordanBasis, pairs: Sequence[EigenPair]) -> None:
    if basis.block_sizes and abs(z) < NEAR_SINGULAR:
        raise NearSingularResolventError(f"|z| = {abs(z):.3e} слишком мал для разложения")
    for pair in pairs:
        if abs(z - pair.eigenvalue) < NEAR_SINGULAR:
            raise NearSingularResolventError(
                f"z слишком близко к λ = {pair.eigenvalue:.6g}"
            )


def resolvent_jordan(
    params: ModelParams,
    basis: JordanBasis,
    spectrum: SpectrumReport,
    z: complex,
    pairs: Sequence[EigenPair] | None = None,
) -> np.ndarray:
    """
    Σ_ℓ Σ_{m=1}^{d} z^{−m} Σ_{i=1}^{d−m+1} v^(ℓ,i) w^(ℓ,i+m−1)
    + Σ_j v_j w_j / (z − λ_j).
    """
    pairs = _pairs(params, spectrum, pairs)
    _check_distance(z, basis, pairs)
    n = params.n
    out = np.zeros((n, n), dtype=complex)
    for right, left in _chains(basis):
        size = len(right)
        for m in range(1, size + 1):
            block = np.zeros((n, n), dtype=complex)
            for i in range(size - m + 1):
                block += np.outer(right[i], left[i + m - 1])
            out += block / z**m
    for pair in pairs:
        out += np.outer(pair.right, pair.left) / (z - pair.eigenvalue)
    return out


def resolvent_bound(
    basis: JordanBasis, pairs: Sequence[EigenPair], z: complex
) -> float:
    """Оценка сверху ‖(zI − M)⁻¹‖ по неравенству треугольника для разложения."""
    _check_distance(z, basis, pairs)
    bound = 0.0
    for right, left in _chains(basis):
        size = len(right)
        for m in range(1, size + 1):
            weight = sum(
                np.linalg.norm(right[i]) * np.linalg.norm(left[i + m - 1])
                for i in range(size - m + 1)
            )
            bound += weight / abs(z) ** m
    for pair in pairs:
        bound += pair.condition_number / abs(z - pair.eigenvalue)
    return float(bound)


def default_region(params: ModelParams) -> Region:
    """Квадрат [−1.5(1+|b|), 1.5(1+|b|)]²."""
    half = 1.5 * (1.0 + abs(FLOAT.to_complex(params.b)))
    return Region(-half, half, -half, half)


def grid_axes(region: Region, resolution: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    nx, ny = resolution
    if nx < 2 or ny < 2:
        raise ValueError(f"Разрешение сетки должно быть не меньше 2×2, получено {nx}×{ny}")
    return np.linspace(region.xmin, region.xmax, nx), np.linspace(region.ymin, region.ymax, ny)


async def pseudospectrum_grid(
    matrix: np.ndarray,
    region: Region,
    resolution: tuple[int, int],
    workers: int = 4,
) -> PseudoGrid:
    """σ_min(zI − M) во всех узлах; строки сетки считаются параллельно в потоках."""
    xs, ys = grid_axes(region, resolution)
    matrix = np.asarray(matrix, dtype=complex)
    identity = np.eye(matrix.shape[0])
    semaphore = asyncio.Semaphore(max(1, workers))

    def row_values(y: float) -> np.ndarray:
        return np.array([sigma_min((x + 1j * y) * identity - matrix) for x in xs])

    async def run_row(y: float) -> np.ndarray:
        async with semaphore:
            return await asyncio.to_thread(row_values, y)

    rows = await asyncio.gather(*(run_row(y) for y in ys))
    logger.info("Сетка σ_min %d×%d посчитана (n=%d)", len(xs), len(ys), matrix.shape[0])
    return PseudoGrid(
        region=region,
        resolution=(len(xs), len(ys)),
        xs=xs,
        ys=ys,
        values=np.vstack(rows),
    )


def enclosure_disks(
    params: ModelParams,
    basis: JordanBasis,
    spectrum: SpectrumReport,
    epsilon: float,
    pairs: Sequence[EigenPair] | None = None,
) -> EnclosureDisks:
    """Диски включения: C₀ = t·κ₀(t), C_j = κ_j = ‖v_j‖‖w_j‖."""
    if not 0 < epsilon < 1:
        raise ValueError(f"ε должно лежать в (0, 1), получено {epsilon}")
    pairs = _pairs(params, spectrum, pairs)
    n, t = params.n, params.t
    _, kappa0 = condition_numbers(basis)
    c0 = t * kappa0
    exponent = (t + 1) / (n + t + 1)
    return EnclosureDisks(
        epsilon=epsilon,
        c0=c0,
        exponent=exponent,
        zero_radius=float((epsilon * c0) ** exponent),
        eigen_centers=tuple(p.eigenvalue for p in pairs),
        eigen_radii=tuple(epsilon * p.condition_number for p in pairs),
    )


def zero_component(grid: PseudoGrid, epsilon: float) -> np.ndarray:
    """Связная компонента σ_ε (по узлам сетки), содержащая ближайший к нулю узел."""
    mask = grid.membership(epsilon)
    labels, _ = scipy.ndimage.label(mask)
    iy = int(np.argmin(np.abs(grid.ys)))
    ix = int(np.argmin(np.abs(grid.xs)))
    label = labels[iy, ix]
    if label == 0:
        return np.zeros_like(mask)
    return labels == label


def check_enclosure(grid: PseudoGrid, disks: EnclosureDisks) -> EnclosureCheck:
    """Лежит ли нулевая компонента σ_ε в нулевом диске, раздутом на диагональ ячейки."""
    component = zero_component(grid, disks.epsilon)
    moduli = np.abs(grid.nodes()[component])
    max_modulus = float(moduli.max()) if moduli.size else 0.0
    allowed = disks.zero_radius + grid.cell_diagonal
    ok = max_modulus <= allowed
    if not ok:
        logger.warning(
            "Нулевая компонента выходит за диск: %.4f > %.4f", max_modulus, allowed
        )
    return EnclosureCheck(
        ok=ok,
        component_size=int(component.sum()),
        max_modulus=max_modulus,
        allowed_radius=allowed,
    )

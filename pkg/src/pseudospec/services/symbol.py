"""
Символ f(z) = z^{t+1}(1 + h(z)) и его кривые.

Кривая f(r e^{iθ}) с уменьшенным радиусом r = ε^{1/ϖ}, её внутренние дуги
(θ ∈ [θ₀, 2π − θ₀]) и индексы точек относительно замкнутой ломаной.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np
import scipy.ndimage

from src.pseudospec.services.arithmetic import FLOAT
from src.pseudospec.services.model import ModelParams, multiplicities
from src.pseudospec.services.resolvent import Region, grid_axes

logger = logging.getLogger("pseudospec")

DEFAULT_SAMPLES = 4096
THETA_TOL = 1e-12


class AmbiguousWindingError(ValueError):
    """Точка лежит на кривой: индекс не определён."""


class ThetaZeroNotFoundError(Exception):
    """Кривая не пересекает вещественную ось при θ ∈ (0, 2π)."""


@dataclass(frozen=True)
class SymbolCurve:
    """Точки f(r e^{iθ}) на равномерной сетке θ; первая точка совпадает с последней."""

    t: int
    b_coeffs: tuple[complex, ...]
    radius: float
    thetas: np.ndarray
    points: np.ndarray
    theta0: float | None

    def inner_arc(self) -> np.ndarray:
        """Замкнутая ломаная из внутренних дуг (θ ∈ [θ₀, 2π − θ₀])."""
        if self.theta0 is None:
            raise ThetaZeroNotFoundError(
                f"θ₀ не найден для t={self.t}, b={list(self.b_coeffs)}, r={self.radius:.6g}"
            )
        lo, hi = self.theta0, 2 * math.pi - self.theta0
        inside = (self.thetas > lo) & (self.thetas < hi)
        head = symbol_value(self.t, self.b_coeffs, self.radius * np.exp(1j * lo))
        tail = symbol_value(self.t, self.b_coeffs, self.radius * np.exp(1j * hi))
        arc = np.concatenate([[head], self.points[inside], [tail], [head]])
        return arc


def _coeffs(b_coeffs: Sequence[Any]) -> tuple[complex, ...]:
    return tuple(FLOAT.to_complex(c) for c in b_coeffs)


def symbol_value(t: int, b_coeffs: Sequence[Any], z: complex | np.ndarray) -> complex | np.ndarray:
    """f(z) = z^{t+1}(1 + Σ b_j z^j)."""
    z = np.asarray(z, dtype=complex)
    h = np.zeros_like(z)
    for j, coeff in enumerate(_coeffs(b_coeffs), start=1):
        h = h + coeff * z**j
    value = z ** (t + 1) * (1 + h)
    return value if value.ndim else complex(value)


def varpi(n: int, t: int) -> int:
    """ϖ = (t+1)·k₀(t)."""
    return (t + 1) * multiplicities(n, t).k0


def size_reduction_radius(n: int, t: int, epsilon: float) -> float:
    """r = ε^{1/ϖ}."""
    if not 0 < epsilon <= 1:
        raise ValueError(f"ε должно лежать в (0, 1], получено {epsilon}")
    w = varpi(n, t)
    if w == 0:
        raise ValueError("ϖ = 0 при t = 0: уменьшение радиуса не определено")
    return float(epsilon ** (1.0 / w))


def find_theta0(
    t: int,
    b_coeffs: Sequence[Any],
    r: float,
    samples: int = DEFAULT_SAMPLES,
    tol: float = THETA_TOL,
) -> float:
    """Наименьшее θ ∈ (0, 2π) с Im f(r e^{iθ}) = 0: смена знака на сетке + бисекция."""
    def imag_part(theta: float) -> float:
        return float(np.imag(symbol_value(t, b_coeffs, r * np.exp(1j * theta))))

    thetas = np.linspace(0.0, 2 * math.pi, samples + 1)
    values = np.imag(symbol_value(t, b_coeffs, r * np.exp(1j * thetas)))
    values[-1] = values[0]
    for k in range(samples):
        # θ = 0 и θ = 2π в интервал не входят
        if k + 1 < samples and values[k + 1] == 0.0:
            return float(thetas[k + 1])
        if values[k] == 0.0 or values[k + 1] == 0.0:
            continue
        if np.sign(values[k]) == np.sign(values[k + 1]):
            continue
        lo, hi = float(thetas[k]), float(thetas[k + 1])
        f_lo = imag_part(lo)
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            f_mid = imag_part(mid)
            if f_mid == 0.0:
                return mid
            if np.sign(f_mid) == np.sign(f_lo):
                lo, f_lo = mid, f_mid
            else:
                hi = mid
        return 0.5 * (lo + hi)
    raise ThetaZeroNotFoundError(
        f"Im f(r e^(iθ)) не меняет знак на (0, 2π) при t={t}, r={r:.6g}"
    )


def symbol_curve(
    t: int, b_coeffs: Sequence[Any], r: float = 1.0, samples: int = DEFAULT_SAMPLES
) -> SymbolCurve:
    if r <= 0 or r > 1:
        raise ValueError(f"Радиус должен лежать в (0, 1], получено r={r}")
    if samples < 16:
        raise ValueError(f"Нужно не меньше 16 точек кривой, получено {samples}")
    coeffs = _coeffs(b_coeffs)
    thetas = np.linspace(0.0, 2 * math.pi, samples + 1)
    points = symbol_value(t, coeffs, r * np.exp(1j * thetas))
    points[-1] = points[0]
    try:
        theta0: float | None = find_theta0(t, coeffs, r, samples)
    except ThetaZeroNotFoundError:
        theta0 = None
    return SymbolCurve(t=t, b_coeffs=coeffs, radius=r, thetas=thetas, points=points, theta0=theta0)


def _segment_distance(points: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Расстояние от каждой точки z до замкнутой ломаной points."""
    a = points[:-1][None, :]
    d = (points[1:] - points[:-1])[None, :]
    zz = z[:, None]
    length2 = np.abs(d) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.real((zz - a) * np.conj(d)) / length2
    s = np.where(length2 > 0, np.clip(s, 0.0, 1.0), 0.0)
    return np.abs(zz - (a + s * d)).min(axis=1)


def _winding(points: np.ndarray, z: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = (points[1:][None, :] - z[:, None]) / (points[:-1][None, :] - z[:, None])
    total = np.angle(ratios).sum(axis=1)
    return np.rint(total / (2 * math.pi)).astype(int)


def winding_number(curve: SymbolCurve | np.ndarray, z: complex, margin: float = 1e-9) -> int:
    """Индекс точки z относительно замкнутой ломаной (сумма приращений аргумента)."""
    points = curve.points if isinstance(curve, SymbolCurve) else np.asarray(curve, dtype=complex)
    z_arr = np.array([complex(z)])
    scale = max(1.0, float(np.abs(points).max()))
    if _segment_distance(points, z_arr)[0] <= margin * scale:
        raise AmbiguousWindingError(f"Точка {z} лежит на кривой (в пределах {margin * scale:.1e})")
    return int(_winding(points, z_arr)[0])


@dataclass(frozen=True)
class ConjectureRegion:
    """Узлы сетки на кривой f̃_ε или с ненулевым индексом относительно неё."""

    region: Region
    xs: np.ndarray
    ys: np.ndarray
    mask: np.ndarray
    radius: float
    theta0: float
    arc: np.ndarray

    def inflated(self, cells: int = 1) -> np.ndarray:
        if cells <= 0:
            return self.mask
        return scipy.ndimage.binary_dilation(self.mask, iterations=cells)


def _region_mask(points: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    half_cell = 0.5 * float(np.hypot(xs[1] - xs[0], ys[1] - ys[0]))
    mask = np.zeros((ys.size, xs.size), dtype=bool)
    for iy, y in enumerate(ys):
        row = xs + 1j * y
        near = _segment_distance(points, row) <= half_cell
        mask[iy] = near | (_winding(points, row) != 0)
    return mask


def conjecture_region(
    params: ModelParams,
    epsilon: float,
    region: Region,
    resolution: tuple[int, int],
    samples: int = DEFAULT_SAMPLES,
) -> ConjectureRegion:
    """
    f̃_ε ∪ {z : w(f̃_ε, z) ≠ 0} на сетке. От δ не зависит: используется только
    t, h и ϖ(n, t).
    """
    if not 0 < epsilon < 1:
        raise ValueError(f"ε должно лежать в (0, 1), получено {epsilon}")
    r = size_reduction_radius(params.n, params.t, epsilon)
    curve = symbol_curve(params.t, params.b_coeffs, r, samples)
    arc = curve.inner_arc()
    xs, ys = grid_axes(region, resolution)
    mask = _region_mask(arc, xs, ys)
    logger.info(
        "Область f̃_ε: r=%.6f, θ₀=%.6f, узлов внутри %d из %d",
        r,
        curve.theta0,
        int(mask.sum()),
        mask.size,
    )
    return ConjectureRegion(
        region=region, xs=xs, ys=ys, mask=mask, radius=r, theta0=float(curve.theta0), arc=arc
    )


def operator_spectrum_contains(
    t: int, b_coeffs: Sequence[Any], z: complex, samples: int = DEFAULT_SAMPLES, tol: float = 1e-6
) -> bool:
    """Спектр тёплицева оператора: f(𝕋) и точки с ненулевым индексом."""
    curve = symbol_curve(t, b_coeffs, 1.0, samples)
    z_arr = np.array([complex(z)])
    if _segment_distance(curve.points, z_arr)[0] <= tol:
        return True
    return bool(_winding(curve.points, z_arr)[0] != 0)


def region_coverage(region: ConjectureRegion, points: np.ndarray, inflate: int = 1) -> float:
    """Доля точек, попавших в область, раздутую на inflate ячеек (ближайший узел)."""
    points = np.asarray(points, dtype=complex)
    if points.size == 0:
        return 1.0
    mask = region.inflated(inflate)
    dx = region.xs[1] - region.xs[0]
    dy = region.ys[1] - region.ys[0]
    ix = np.rint((points.real - region.xs[0]) / dx).astype(int)
    iy = np.rint((points.imag - region.ys[0]) / dy).astype(int)
    inside_grid = (ix >= 0) & (ix < region.xs.size) & (iy >= 0) & (iy < region.ys.size)
    hits = np.zeros(points.size, dtype=bool)
    hits[inside_grid] = mask[iy[inside_grid], ix[inside_grid]]
    return float(hits.mean())

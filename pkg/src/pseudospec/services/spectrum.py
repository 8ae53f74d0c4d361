"""
Ненулевой спектр модели.

Характеристический многочлен ненулевых собственных значений в замкнутом виде
(общий случай h(s) = b s и упрощённый при b = 0), его корни методом
Аберта–Эрлиха, асимптотики (выброс с числами Каталана, круговой предел)
и би-ортонормированные собственные векторы.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import scipy.linalg
import scipy.special

from src.pseudospec.services.arithmetic import FLOAT, Arithmetic
from src.pseudospec.services.model import (
    ModelParams,
    Multiplicities,
    multiplicities,
    nilpotent_part,
    ones_krylov,
)

logger = logging.getLogger("pseudospec")

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 500
DELTA_ZERO_MESSAGE = "delta must be non-zero for the closed-form polynomial"

_c = FLOAT.to_complex


class DegeneratePolynomialError(ValueError):
    """Исключение при δ = 0: многочлен вырождается в z^{p1+1}."""


class UnsupportedCoefficientsError(ValueError):
    """Исключение, когда h(s) не имеет вида b₁ s."""


class RootFindingError(Exception):
    """Итерации Аберта–Эрлиха не сошлись."""

    def __init__(self, message: str, best: np.ndarray, residuals: np.ndarray) -> None:
        super().__init__(message)
        self.best = best
        self.residuals = residuals


class CircularLimitError(ValueError):
    """Условия кругового предела не выполнены."""

    def __init__(self, message: str, failed: list[str]) -> None:
        super().__init__(message)
        self.failed = failed


class EigenvectorError(Exception):
    """Собственный вектор не может быть надёжно вычислен."""


@dataclass(frozen=True)
class CharPolynomial:
    """
    Коэффициенты c₀..c_{p1+1} многочлена Σ c_k u^k (по возрастанию степени).

    scale — множитель замены z = scale·u; корни по z получаются умножением
    корней по u на scale. При scale = 1 переменные совпадают.
    """

    coefficients: tuple[Any, ...]
    provenance: str
    monic: bool = True
    scale: complex = 1.0

    def __post_init__(self) -> None:
        if not self.coefficients or not self.coefficients[-1]:
            raise DegeneratePolynomialError("Старший коэффициент многочлена равен нулю")

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def as_complex(self) -> np.ndarray:
        return np.array([FLOAT.to_complex(c) for c in self.coefficients], dtype=complex)

    def evaluate(self, z: complex | np.ndarray) -> complex | np.ndarray:
        """p(z/scale), то есть P(z)/scale^{p1+1} для исходного многочлена P."""
        # numpy.polyval ждёт коэффициенты от старшего к младшему
        return np.polyval(self.as_complex()[::-1], np.asarray(z) / self.scale)


@dataclass(frozen=True)
class SpectrumReport:
    """Кратности нуля и ненулевые собственные значения с невязками."""

    params: ModelParams
    multiplicities: Multiplicities
    polynomial: CharPolynomial
    eigenvalues: tuple[complex, ...]
    residuals: tuple[float, ...]
    iterations: int = 0

    @property
    def outlier(self) -> complex:
        """λ₁ — корень наибольшего модуля."""
        return self.eigenvalues[0]


@dataclass(frozen=True)
class EigenPair:
    """Ненулевое собственное значение с правым вектором v и левой строкой w (w v = 1)."""

    eigenvalue: complex
    right: np.ndarray
    left: np.ndarray

    @property
    def condition_number(self) -> float:
        return float(np.linalg.norm(self.right) * np.linalg.norm(self.left))


@dataclass(frozen=True)
class CircularLimit:
    points: tuple[complex, ...]
    failed_conditions: tuple[str, ...] = field(default_factory=tuple)

    @property
    def preconditions_hold(self) -> bool:
        return not self.failed_conditions


def _check_supported(params: ModelParams) -> None:
    if not params.delta:
        raise DegeneratePolynomialError(
            f"{DELTA_ZERO_MESSAGE} (при δ = 0 все собственные значения нулевые)"
        )
    if not params.has_single_b():
        raise UnsupportedCoefficientsError(
            "Замкнутая формула известна только для h(s) = b₁ s; "
            "для общего h используйте плотный решатель"
        )


def char_poly(params: ModelParams, arithmetic: Arithmetic = FLOAT) -> CharPolynomial:
    """
    Многочлен степени p1+1, корни которого — ненулевые собственные значения.

    Записан после умножения на (1+b)^{p1+1}, поэтому деления на 1+b нет:
    c_k = −δ[n(1+b)^j − j((t+1)(1+b)+b)(1+b)^{j−1} + поправка_j], j = p1−k,
    где поправка действует только при p1 ≥ p2+1 и p1 ≥ (n+1)/(t+2).
    """
    _check_supported(params)
    n, t = params.n, params.t
    mult = multiplicities(n, t)
    p1, p2 = mult.p1, mult.p2
    delta = arithmetic.scalar(params.delta)
    b = arithmetic.scalar(params.b)

    if not b:
        # z^{p1+1} − nδ Σ_k {1 − (p1−k)(t+1)/n} z^k
        coeffs = [-delta * (n - (p1 - k) * (t + 1)) for k in range(p1 + 1)]
        coeffs.append(arithmetic.scalar(1))
        return CharPolynomial(tuple(coeffs), provenance="b0")

    one_plus_b = arithmetic.scalar(1) + b
    slope = (t + 1) * one_plus_b + b
    indicator = p1 >= p2 + 1 and p1 * (t + 2) >= n + 1

    coeffs = []
    for k in range(p1 + 1):
        j = p1 - k
        weight = n * one_plus_b**j
        if j > 0:
            weight = weight - j * slope * one_plus_b ** (j - 1)
        if indicator and k <= p1 - p2 - 1:
            weight = weight + _boundary_correction(n, t, j, b, arithmetic)
        coeffs.append(-delta * weight)
    coeffs.append(arithmetic.scalar(1))
    return CharPolynomial(tuple(coeffs), provenance="general")


def _boundary_correction(n: int, t: int, j: int, b: Any, arithmetic: Arithmetic) -> Any:
    """Σ_{q=n−(t+1)j+1}^{j} b^q C(j, q) [q − (n − (t+1)j)]."""
    acc = arithmetic.scalar(0)
    base = n - (t + 1) * j
    for q in range(base + 1, j + 1):
        acc = acc + math.comb(j, q) * (q - base) * b**q
    return acc


def _scaled_boundary_correction(n: int, t: int, j: int, b: complex) -> complex:
    """
    Поправка, делённая на (1+b)^{j+1}: Σ_q C(j,q)(q − base) β^q (1−β)^{j−q} / (1+b),
    β = b/(1+b). Веса считаются в логарифмах, без (1+b)^j.
    """
    base = n - (t + 1) * j
    qs = np.arange(base + 1, j + 1)
    if qs.size == 0:
        return 0j
    beta = complex(b) / (1 + complex(b))
    log_weights = (
        scipy.special.gammaln(j + 1)
        - scipy.special.gammaln(qs + 1)
        - scipy.special.gammaln(j - qs + 1)
        + qs * np.log(beta)
        + (j - qs) * np.log(1 - beta)
    )
    return complex(np.sum((qs - base) * np.exp(log_weights))) / (1 + complex(b))


def scaled_char_poly(params: ModelParams) -> CharPolynomial:
    """
    Тот же многочлен в переменной u = z/(1+b), с плавающей арифметикой.

    Коэффициенты c_k = −δ[n/(1+b) − j((t+1)(1+b)+b)/(1+b)² + поправка_j/(1+b)^{j+1}]
    имеют порядок nδ/(1+b) при всех j, тогда как у исходного они растут как (1+b)^j.
    При b = 0 или |1+b| ≈ 0 возвращается исходный многочлен.
    """
    _check_supported(params)
    b = _c(params.b)
    one_plus_b = 1 + b
    if b == 0 or abs(one_plus_b) < 1e-8:
        return char_poly(params)

    n, t = params.n, params.t
    mult = multiplicities(n, t)
    p1, p2 = mult.p1, mult.p2
    delta = _c(params.delta)
    slope = (t + 1) * one_plus_b + b
    indicator = p1 >= p2 + 1 and p1 * (t + 2) >= n + 1

    coeffs = []
    for k in range(p1 + 1):
        j = p1 - k
        weight = n / one_plus_b - j * slope / one_plus_b**2
        if indicator and k <= p1 - p2 - 1:
            weight += _scaled_boundary_correction(n, t, j, b)
        coeffs.append(-delta * weight)
    coeffs.append(1 + 0j)
    return CharPolynomial(tuple(coeffs), provenance="general-scaled", scale=one_plus_b)


def char_poly_moments(params: ModelParams, arithmetic: Arithmetic = FLOAT) -> CharPolynomial:
    """
    Тот же многочлен из моментов: z^{p1+1} − δ Σ_k ⟨N^k𝟙, 𝟙⟩ z^{p1−k}.

    Годится для любого h и служит независимой проверкой замкнутой формулы.
    """
    if not params.delta:
        raise DegeneratePolynomialError(DELTA_ZERO_MESSAGE)
    delta = arithmetic.scalar(params.delta)
    krylov = ones_krylov(params, arithmetic)
    p1 = len(krylov) - 1
    moments = [_sum(vec, arithmetic) for vec in krylov]
    coeffs = [-delta * moments[p1 - k] for k in range(p1 + 1)]
    coeffs.append(arithmetic.scalar(1))
    return CharPolynomial(tuple(coeffs), provenance="moments")


def _sum(vec: np.ndarray, arithmetic: Arithmetic) -> Any:
    acc = arithmetic.scalar(0)
    for value in vec:
        acc = acc + value
    return acc


def aberth_roots(
    coefficients: np.ndarray,
    initial_radius: float,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> tuple[np.ndarray, np.ndarray, int]:
    """
    Все корни многочлена одновременной итерацией Аберта–Эрлиха.

    coefficients — по возрастанию степени. Критерий остановки — относительная
    невязка |p(z)| / Σ|c_k||z|^k ≤ tol для каждого корня.
    """
    coeffs = np.asarray(coefficients, dtype=complex)
    degree = coeffs.size - 1
    angles = 2 * np.pi * np.arange(degree) / degree + 0.4 / degree
    z = initial_radius * np.exp(1j * angles)

    ratio, res = _newton_ratio(coeffs, z)
    iteration = 0
    for iteration in range(1, max_iter + 1):
        active = res > tol
        if not active.any():
            break
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, np.inf)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            repulsion = np.sum(1.0 / diff, axis=1)
            step = ratio / (1.0 - ratio * repulsion)
        step = np.where(np.isfinite(step), step, 0.0)
        z = np.where(active, z - step, z)
        ratio, res = _newton_ratio(coeffs, z)
    else:
        if (res > tol).any():
            raise RootFindingError(
                f"Метод Аберта–Эрлиха не сошёлся за {max_iter} итераций "
                f"(max невязка {res.max():.3e})",
                best=z,
                residuals=res,
            )
    return z, res, iteration


def _newton_ratio(coeffs: np.ndarray, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Отношение p/p' и относительная невязка |p(z)| / Σ|c_k||z|^k.

    При |z| > 1 считается через перевёрнутый многочлен от w = 1/z, чтобы
    z^d не переполнялось.
    """
    degree = coeffs.size - 1
    high_first = coeffs[::-1]
    low_first = coeffs
    abs_high = np.abs(high_first)
    abs_low = np.abs(low_first)
    outside = np.abs(z) > 1.0
    ratio = np.empty_like(z)
    res = np.empty(z.size)

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        inner = z[~outside]
        p = np.polyval(high_first, inner)
        dp = np.polyval(np.polyder(high_first), inner)
        scale = np.polyval(abs_high, np.abs(inner))
        ratio[~outside] = p / dp
        res[~outside] = np.abs(p) / np.where(scale > 0, scale, 1.0)

        w = 1.0 / z[outside]
        # p(z) = z^d q(w), q(w) = Σ c_k w^{d−k}
        q = np.polyval(low_first, w)
        dq = np.polyval(np.polyder(low_first), w)
        scale = np.polyval(abs_low, np.abs(w))
        ratio[outside] = q / (w * (degree * q - w * dq))
        res[outside] = np.abs(q) / np.where(scale > 0, scale, 1.0)

    res = np.where(np.isfinite(res), res, np.inf)
    return ratio, res


def _sort_roots(roots: np.ndarray, residuals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = sorted(range(roots.size), key=lambda i: (-abs(roots[i]), cmath.phase(roots[i])))
    return roots[order], residuals[order]


def nonzero_eigenvalues(
    params: ModelParams, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER
) -> SpectrumReport:
    """
    p1+1 ненулевых собственных значений, по убыванию модуля, затем по аргументу.

    Корни ищутся у масштабированного многочлена (u = z/(1+b)) и затем
    умножаются на 1+b; невязки относятся к масштабированному многочлену.
    """
    poly = scaled_char_poly(params)
    mult = multiplicities(params.n, params.t)
    coeffs = poly.as_complex()
    radius = max(1.0, float(np.abs(coeffs[:-1]).max()) ** (1.0 / (mult.p1 + 1)))
    if poly.degree == 1:
        roots = np.array([-coeffs[0] / coeffs[1]])
        res = np.zeros(1)
        iterations = 0
    else:
        roots, res, iterations = aberth_roots(coeffs, radius, tol=tol, max_iter=max_iter)
    roots = roots * poly.scale
    roots, res = _sort_roots(roots, res)
    logger.info(
        "Найдено %d ненулевых собственных значений за %d итераций (max невязка %.2e)",
        roots.size,
        iterations,
        float(res.max()) if res.size else 0.0,
    )
    return SpectrumReport(
        params=params,
        multiplicities=mult,
        polynomial=poly,
        eigenvalues=tuple(complex(z) for z in roots),
        residuals=tuple(float(r) for r in res),
        iterations=iterations,
    )


def catalan(k: int) -> int:
    return math.comb(2 * k, k) // (k + 1)


def outlier_expansion(params: ModelParams, order: int) -> complex:
    """
    Усечённый ряд для выброса:
    nδ + 1 + b − (1+b) Σ_{k<order} C_k ((t+1)/n + b/((1+b)n))^{k+1} ((1+b)/(nδ))^k.
    """
    n, t = params.n, params.t
    p1 = (n - 1) // (t + 1)
    n_delta = n * _c(params.delta)
    if abs(n_delta) <= 1:
        raise ValueError(f"Разложение выброса требует |nδ| > 1, получено {abs(n_delta):.3g}")
    if not 0 <= order <= max(p1 - 1, 0):
        raise ValueError(f"Порядок разложения должен лежать в [0, {max(p1 - 1, 0)}]")
    b = _c(params.b)
    one_plus_b = 1 + b
    rate = (t + 1) / n + b / (one_plus_b * n)
    value = n_delta + one_plus_b
    for k in range(order):
        value -= one_plus_b * catalan(k) * rate ** (k + 1) * (one_plus_b / n_delta) ** k
    return value


def circular_limit(params: ModelParams, strict: bool = True) -> CircularLimit:
    """
    Предельные точки (1+b)e^{2πiℓ/(p1+1)}, ℓ = 1..p1 (точка z = 1+b исключена).

    При strict=True невыполненные условия (h = b s, p1 = p2,
    δ > 4{(1+b)(t+1)+b}/n²) дают CircularLimitError, иначе перечисляются
    в failed_conditions.
    """
    n, t = params.n, params.t
    mult = multiplicities(n, t)
    failed: list[str] = []
    if not params.has_single_b():
        failed.append("h(s) должно иметь вид b s")
    if mult.p1 != mult.p2:
        failed.append(f"p1 = {mult.p1} ≠ p2 = {mult.p2}")
    b = _c(params.b)
    threshold = 4 * abs((1 + b) * (t + 1) + b) / n**2
    if abs(_c(params.delta)) <= threshold:
        failed.append(f"δ = {params.delta} не превосходит порог {threshold:.3g}")
    if failed and strict:
        raise CircularLimitError("Условия кругового предела не выполнены: " + "; ".join(failed), failed)
    points = tuple(
        (1 + b) * cmath.exp(2j * math.pi * ell / (mult.p1 + 1)) for ell in range(1, mult.p1 + 1)
    )
    return CircularLimit(points=points, failed_conditions=tuple(failed))


def nonzero_eigenvector(
    params: ModelParams, eigenvalue: complex, min_modulus: float = 1e-12
) -> EigenPair:
    """
    Правый вектор v = (λI − N)^{-1}𝟙 и левая строка w ∝ 𝟙ᵀ(λI − N)^{-1}, w v = 1.

    Решение треугольное: N строго верхнетреугольная, на диагонали стоит λ.
    """
    lam = complex(eigenvalue)
    nil = nilpotent_part(params)
    scale = max(1.0, float(np.linalg.norm(nil)) + abs(params.n * _c(params.delta)))
    if abs(lam) < min_modulus * scale:
        raise EigenvectorError(f"|λ| = {abs(lam):.3e} слишком близко к нулю")

    shifted = lam * np.eye(params.n) - nil
    ones = np.ones(params.n, dtype=complex)
    right = scipy.linalg.solve_triangular(shifted, ones, lower=False)
    left = scipy.linalg.solve_triangular(shifted, ones, lower=False, trans="T")
    right = right / np.linalg.norm(right)
    pairing = left @ right
    if abs(pairing) < np.finfo(float).tiny:
        raise EigenvectorError("Левый и правый векторы ортогональны")
    return EigenPair(eigenvalue=lam, right=right, left=left / pairing)


def eigenpairs(params: ModelParams, report: SpectrumReport) -> list[EigenPair]:
    return [nonzero_eigenvector(params, lam) for lam in report.eigenvalues]


def eigenvalue_condition_numbers(pairs: list[EigenPair]) -> list[float]:
    """κ_j = ‖v_j‖‖w_j‖."""
    return [pair.condition_number for pair in pairs]


def p_gap(n: int, t: int) -> int:
    """p1 − p2."""
    return (n - 1) // (t + 1) - (n - 1) // (t + 2)


def p_gap_prediction(n: int, t: int) -> int | None:
    """
    Предсказание p1 − p2 по правилу интервала: для t+1 ∈ [⌈√(n−1)⌉, n−1]
    разность равна 1, если t+1 ∈ {⌊(n−1)/k⌋}, и 0 иначе. Вне интервала — None.
    """
    m = n - 1
    s = t + 1
    lower = math.isqrt(m - 1) + 1 if m >= 1 else 0
    if not lower <= s <= m:
        return None
    floors = {m // k for k in range(1, m + 1)}
    return 1 if s in floors else 0

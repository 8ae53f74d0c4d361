"""
Семейство матриц S^(b)(t, δJ) = S^{t+1}(I + h(S)) + δJ.

Здесь собраны построение матрицы и вся комбинаторика нулевого собственного
значения в замкнутом виде: p1, p2, алгебраическая и геометрическая кратности,
индекс, размеры жордановых блоков и диаграмма Юнга.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from src.pseudospec.services.arithmetic import FLOAT, Arithmetic


class ModelParamsError(ValueError):
    """Исключение при недопустимых параметрах модели."""


@dataclass(frozen=True)
class ModelParams:
    """Полное описание одной матрицы семейства."""

    n: int
    t: int
    b_coeffs: tuple[Any, ...] = ()
    delta: Any = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "b_coeffs", tuple(self.b_coeffs))
        if self.n < 2:
            raise ModelParamsError(f"Размер матрицы должен быть n ≥ 2, получено n={self.n}")
        if not 0 <= self.t <= self.n - 2:
            raise ModelParamsError(
                f"Время t должно лежать в [0, n−2] = [0, {self.n - 2}], получено t={self.t}"
            )
        if len(self.b_coeffs) > self.n - 1:
            raise ModelParamsError(
                f"Коэффициентов b_j не больше n−1 = {self.n - 1}, "
                f"получено {len(self.b_coeffs)}"
            )

    @property
    def T(self) -> int:
        return self.n - 2

    @property
    def b(self) -> Any:
        """Коэффициент b₁ (основной случай h(s) = b s)."""
        return self.b_coeffs[0] if self.b_coeffs else 0

    def has_single_b(self) -> bool:
        """True, если h(s) = b₁ s (все b_j при j ≥ 2 нулевые)."""
        return all(not coeff for coeff in self.b_coeffs[1:])

    def with_delta(self, delta: Any) -> "ModelParams":
        return dataclasses.replace(self, delta=delta)

    def with_time(self, t: int) -> "ModelParams":
        return dataclasses.replace(self, t=t)


@dataclass(frozen=True)
class Multiplicities:
    """Кратности и жорданова структура нулевого собственного значения."""

    n: int
    t: int
    p1: int
    p2: int
    a0: int
    g0: int
    k0: int
    xi: int
    block_sizes: tuple[int, ...]


def multiplicities(n: int, t: int) -> Multiplicities:
    """
    Кратности λ₀ = 0 в замкнутом виде.

    Блок ℓ (ℓ = 1..t) имеет длину ⌊(n−ℓ−1)/(t+1)⌋ + 1: при (t+1) | n все блоки
    равны n/(t+1), иначе первые ξ−1 блоков на единицу длиннее остальных.
    При t = 0 возвращается a0 = g0 = 0 и k0 = 0 (λ₀ не собственное значение),
    при t = T все блоки единичные и k0 = 1.
    """
    if n < 2:
        raise ModelParamsError(f"Размер матрицы должен быть n ≥ 2, получено n={n}")
    if not 0 <= t <= n - 2:
        raise ModelParamsError(f"Время t должно лежать в [0, {n - 2}], получено t={t}")

    p1 = (n - 1) // (t + 1)
    p2 = (n - 1) // (t + 2)
    blocks = tuple((n - ell - 1) // (t + 1) + 1 for ell in range(1, t + 1))
    return Multiplicities(
        n=n,
        t=t,
        p1=p1,
        p2=p2,
        a0=n - p1 - 1,
        g0=t,
        k0=max(blocks) if blocks else 0,
        xi=n % (t + 1),
        block_sizes=blocks,
    )


def young_diagram(n: int, t: int) -> list[int]:
    """Строки диаграммы Юнга — размеры жордановых блоков λ₀."""
    return list(multiplicities(n, t).block_sizes)


def young_diagram_evolution(n: int) -> list[list[int]]:
    """Диаграммы Юнга для всех t = 0..T."""
    return [young_diagram(n, t) for t in range(n - 1)]


def multiplicity_table(n: int) -> list[Multiplicities]:
    return [multiplicities(n, t) for t in range(n - 1)]


def nilpotency_index(n: int, t: int) -> int:
    """Индекс нильпотентности S^{t+1}(I + h(S)), т.е. матрицы при δ = 0."""
    return -(-n // (t + 1))


def series_inverse(
    b_coeffs: Sequence[Any], length: int, arithmetic: Arithmetic = FLOAT
) -> list[Any]:
    """Коэффициенты ряда 1/(1 + h(s)), обрезанного до степени length−1."""
    b = [arithmetic.scalar(c) for c in b_coeffs]
    out = [arithmetic.scalar(1)]
    for k in range(1, length):
        acc = arithmetic.scalar(0)
        for j in range(1, min(k, len(b)) + 1):
            acc = acc - b[j - 1] * out[k - j]
        out.append(acc)
    return out


def nilpotent_part(params: ModelParams, arithmetic: Arithmetic = FLOAT) -> np.ndarray:
    """N = S^{t+1}(I + h(S)) без слагаемого δJ."""
    n, t = params.n, params.t
    matrix = arithmetic.zeros_matrix(n, n)
    coeffs = [arithmetic.scalar(1)] + [arithmetic.scalar(c) for c in params.b_coeffs]
    for power, coeff in enumerate(coeffs):
        if arithmetic.is_zero(coeff):
            continue
        offset = t + 1 + power
        for row in range(n - offset):
            matrix[row, row + offset] = matrix[row, row + offset] + coeff
    return matrix


def build_matrix(params: ModelParams, arithmetic: Arithmetic = FLOAT) -> np.ndarray:
    """S^{t+1}(I + h(S)) + δJ; S — сдвиг с единицами в позициях (j, j+1)."""
    matrix = nilpotent_part(params, arithmetic)
    delta = arithmetic.scalar(params.delta)
    if arithmetic.is_zero(delta):
        return matrix
    n = params.n
    for row in range(n):
        for col in range(n):
            matrix[row, col] = matrix[row, col] + delta
    return matrix


def ones_krylov(params: ModelParams, arithmetic: Arithmetic = FLOAT) -> list[np.ndarray]:
    """Векторы 𝟙, N𝟙, …, N^{p1}𝟙; вместе они натягивают ненулевую часть спектра."""
    nil = nilpotent_part(params, arithmetic)
    p1 = (params.n - 1) // (params.t + 1)
    current = arithmetic.zeros(params.n)
    for i in range(params.n):
        current[i] = arithmetic.scalar(1)
    out = [current]
    for _ in range(p1):
        current = nil.dot(current)
        out.append(current)
    return out

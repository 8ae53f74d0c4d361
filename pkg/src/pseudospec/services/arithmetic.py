"""
Арифметические бэкенды для матриц модели и цепочек Жордана.

Содержит общий интерфейс и две реализации:
- FloatArithmetic — комплексные числа двойной точности (numpy complex128);
- ExactArithmetic — гауссовы рациональные числа sympy QQ_I, для проверок
  на малых n, где плавающая арифметика не различает жордановы блоки.

Векторы в обоих случаях — одномерные numpy-массивы (dtype complex или object),
поэтому код цепочек не зависит от выбранного бэкенда.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any, Protocol

import numpy as np
import scipy.linalg
from sympy.polys.domains import QQ, QQ_I
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.exceptions import DMError


class SingularSystemError(Exception):
    """Исключение, когда линейная система вырождена."""


class Arithmetic(Protocol):
    """Контракт арифметического бэкенда."""

    name: str
    exact: bool

    def scalar(self, value: Any) -> Any: ...

    def ratio(self, numerator: int, denominator: int) -> Any: ...

    def is_zero(self, value: Any) -> bool: ...

    def zeros(self, n: int) -> np.ndarray: ...

    def zeros_matrix(self, rows: int, cols: int) -> np.ndarray: ...

    def solve(self, matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray: ...

    def to_complex(self, value: Any) -> complex: ...


class FloatArithmetic:
    """Комплексная арифметика двойной точности."""

    name = "float"
    exact = False

    def scalar(self, value: Any) -> complex:
        if isinstance(value, QQ_I.dtype):
            return self.to_complex(value)
        return complex(value)

    def ratio(self, numerator: int, denominator: int) -> complex:
        return complex(numerator / denominator)

    def is_zero(self, value: Any) -> bool:
        return value == 0

    def zeros(self, n: int) -> np.ndarray:
        return np.zeros(n, dtype=complex)

    def zeros_matrix(self, rows: int, cols: int) -> np.ndarray:
        return np.zeros((rows, cols), dtype=complex)

    def solve(self, matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        try:
            return scipy.linalg.solve(
                np.asarray(matrix, dtype=complex), np.asarray(rhs, dtype=complex)
            )
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise SingularSystemError(f"Система вырождена: {exc}") from exc

    def to_complex(self, value: Any) -> complex:
        if isinstance(value, QQ_I.dtype):
            return complex(float(value.x), float(value.y))
        return complex(value)


class ExactArithmetic:
    """Точная арифметика над гауссовыми рациональными числами (QQ_I)."""

    name = "exact"
    exact = True

    def scalar(self, value: Any) -> Any:
        if isinstance(value, QQ_I.dtype):
            return value
        if isinstance(value, complex):
            return QQ_I(_to_qq(value.real), _to_qq(value.imag))
        return QQ_I(_to_qq(value), QQ.zero)

    def ratio(self, numerator: int, denominator: int) -> Any:
        return QQ_I(QQ(numerator, denominator), QQ.zero)

    def is_zero(self, value: Any) -> bool:
        # У QQ_I сравнение с int через == всегда False, поэтому только bool()
        return not value

    def zeros(self, n: int) -> np.ndarray:
        out = np.empty(n, dtype=object)
        for i in range(n):
            out[i] = QQ_I.zero
        return out

    def zeros_matrix(self, rows: int, cols: int) -> np.ndarray:
        out = np.empty((rows, cols), dtype=object)
        for i in range(rows):
            for j in range(cols):
                out[i, j] = QQ_I.zero
        return out

    def solve(self, matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        rows, cols = matrix.shape
        rhs_2d = rhs.reshape(rows, -1)
        lhs = DomainMatrix(
            [[self.scalar(matrix[i, j]) for j in range(cols)] for i in range(rows)],
            (rows, cols),
            QQ_I,
        )
        rhs_dm = DomainMatrix(
            [
                [self.scalar(rhs_2d[i, j]) for j in range(rhs_2d.shape[1])]
                for i in range(rows)
            ],
            rhs_2d.shape,
            QQ_I,
        )
        try:
            solution = lhs.lu_solve(rhs_dm).to_list()
        except (DMError, ZeroDivisionError) as exc:
            raise SingularSystemError(f"Система вырождена: {exc!r}") from exc

        out = np.empty(rhs_2d.shape, dtype=object)
        for i, row in enumerate(solution):
            for j, value in enumerate(row):
                out[i, j] = value
        return out.reshape(rhs.shape)

    def to_complex(self, value: Any) -> complex:
        value = self.scalar(value)
        return complex(float(value.x), float(value.y))


def _to_qq(value: Any) -> Any:
    if isinstance(value, Fraction):
        return QQ(value.numerator, value.denominator)
    if isinstance(value, float):
        fraction = Fraction(value)
        return QQ(fraction.numerator, fraction.denominator)
    return QQ(value)


FLOAT = FloatArithmetic()
EXACT = ExactArithmetic()


def build_arithmetic(backend: str) -> Arithmetic:
    """
    Фабрика арифметики.

    backend: "float" или "exact". Неизвестное имя — ValueError.
    """
    key = backend.lower()
    if key == "float":
        return FLOAT
    if key == "exact":
        return EXACT
    raise ValueError(f"Неизвестный арифметический бэкенд: {backend}")


def to_complex_array(values: np.ndarray) -> np.ndarray:
    """Переводит массив любого бэкенда в complex128."""
    if values.dtype != object:
        return np.asarray(values, dtype=complex)
    flat = [FLOAT.to_complex(v) for v in values.ravel()]
    return np.array(flat, dtype=complex).reshape(values.shape)


def exact_complex(re: Fraction | int, im: Fraction | int = 0) -> Any:
    """Строит элемент QQ_I из пары дробей."""
    return QQ_I(_to_qq(re), _to_qq(im))

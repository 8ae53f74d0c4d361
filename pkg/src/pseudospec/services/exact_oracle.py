"""
Точный оракул на гауссовых рациональных числах.

Определитель det(zI − M) по Бэрайссу над кольцом QQ_I[z], точные ранги
степеней M и проверка жордановых цепочек точным равенством. Рассчитан
на малые n (до 12): используется тестами и командой oracle-check.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from sympy.polys.domains import QQ_I
from sympy.polys.rings import ring

from src.pseudospec.services.arithmetic import EXACT
from src.pseudospec.services.jordan import JordanBasis, build_jordan_basis
from src.pseudospec.services.model import ModelParams, build_matrix, multiplicities
from src.pseudospec.services.spectrum import char_poly

logger = logging.getLogger("pseudospec")

ORACLE_MAX_N = 12


class OracleLimitError(ValueError):
    """Точный оракул вызван для слишком большой матрицы."""


@dataclass(frozen=True)
class ExactCharPoly:
    """Коэффициенты det(zI − M) по возрастанию степени (элементы QQ_I)."""

    coefficients: tuple[Any, ...]

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def zero_root_count(self) -> int:
        """Индекс младшего ненулевого коэффициента."""
        for k, coeff in enumerate(self.coefficients):
            if coeff:
                return k
        return self.degree

    def nonzero_factor(self) -> tuple[Any, ...]:
        return self.coefficients[self.zero_root_count :]


@dataclass(frozen=True)
class ChainViolation:
    kind: str
    block: int
    position: int
    detail: str = ""


@dataclass(frozen=True)
class ChainCheckReport:
    violations: tuple[ChainViolation, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class OracleReport:
    """Результаты сверки формул с точными вычислениями для одной матрицы."""

    params: ModelParams
    checks: dict[str, bool]
    ranks: tuple[int, ...]
    charpoly: ExactCharPoly

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def _check_size(n: int, limit: int = ORACLE_MAX_N) -> None:
    if n > limit:
        raise OracleLimitError(f"Точный оракул поддерживает n ≤ {limit}, получено n={n}")


def exact_charpoly(params: ModelParams) -> ExactCharPoly:
    """det(zI − M) дробно-свободным исключением Бэрайсса над QQ_I[z]."""
    _check_size(params.n)
    n = params.n
    matrix = build_matrix(params, EXACT)
    poly_ring, z = ring("z", QQ_I)

    rows = [
        [(z if i == j else poly_ring.zero) - poly_ring.ground_new(matrix[i, j]) for j in range(n)]
        for i in range(n)
    ]
    sign = 1
    previous = poly_ring.one
    for k in range(n - 1):
        if not rows[k][k]:
            pivot = next((i for i in range(k + 1, n) if rows[i][k]), None)
            if pivot is None:
                return ExactCharPoly(tuple(QQ_I.zero for _ in range(n + 1)))
            rows[k], rows[pivot] = rows[pivot], rows[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                rows[i][j] = (rows[i][j] * rows[k][k] - rows[i][k] * rows[k][j]).exquo(previous)
        previous = rows[k][k]

    det = rows[n - 1][n - 1] if sign > 0 else -rows[n - 1][n - 1]
    coeffs = tuple(det.get((k,), QQ_I.zero) for k in range(n + 1))
    return ExactCharPoly(coeffs)


def exact_rank(matrix: np.ndarray) -> int:
    """Ранг дробно-свободным исключением (строки умножаются на опорный элемент)."""
    rows = [list(row) for row in matrix]
    n_rows = len(rows)
    n_cols = len(rows[0]) if rows else 0
    rank = 0
    for col in range(n_cols):
        pivot = next((i for i in range(rank, n_rows) if rows[i][col]), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        head = rows[rank][col]
        for i in range(rank + 1, n_rows):
            factor = rows[i][col]
            if factor:
                rows[i] = [head * a - factor * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
        if rank == n_rows:
            break
    return rank


def _matmul(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    size = left.shape[0]
    out = EXACT.zeros_matrix(size, right.shape[1])
    for i in range(size):
        for j in range(right.shape[1]):
            acc = QQ_I.zero
            for k in range(left.shape[1]):
                if left[i, k] and right[k, j]:
                    acc = acc + left[i, k] * right[k, j]
            out[i, j] = acc
    return out


def rank_sequence(params: ModelParams, kmax: int) -> list[int]:
    """Точные ранги M⁰, M¹, …, M^{kmax}."""
    _check_size(params.n)
    matrix = build_matrix(params, EXACT)
    power = EXACT.zeros_matrix(params.n, params.n)
    for i in range(params.n):
        power[i, i] = QQ_I.one
    ranks = [params.n]
    for _ in range(kmax):
        power = _matmul(power, matrix)
        ranks.append(exact_rank(power))
    return ranks


def block_sizes_from_ranks(ranks: Sequence[int]) -> list[int]:
    """
    Размеры жордановых блоков нуля: блоков размера ≥ q ровно r_{q−1} − r_q.
    Последовательность должна стабилизироваться внутри ranks.
    """
    drops = [ranks[q - 1] - ranks[q] for q in range(1, len(ranks))] + [0]
    sizes: list[int] = []
    for q in range(len(drops) - 1, 0, -1):
        sizes += [q] * (drops[q - 1] - drops[q])
    return sizes


def index_from_ranks(ranks: Sequence[int]) -> int:
    """Наименьшее q с rank(M^q) = rank(M^{q+1})."""
    for q in range(len(ranks) - 1):
        if ranks[q] == ranks[q + 1]:
            return q
    raise ValueError("Последовательность рангов ещё не стабилизировалась")


def exact_chain_check(params: ModelParams, basis: JordanBasis) -> ChainCheckReport:
    """Точная проверка M v^(q) = v^(q−1), нулевых сумм и матрицы Грама."""
    _check_size(params.n)
    matrix = build_matrix(params, EXACT)
    n = params.n
    violations: list[ChainViolation] = []

    def exact_vec(vec: np.ndarray) -> list[Any]:
        return [EXACT.scalar(value) for value in vec]

    def apply(vec: list[Any]) -> list[Any]:
        out = []
        for i in range(n):
            acc = QQ_I.zero
            for j in range(n):
                if matrix[i, j] and vec[j]:
                    acc = acc + matrix[i, j] * vec[j]
            out.append(acc)
        return out

    def total(vec: list[Any]) -> Any:
        acc = QQ_I.zero
        for value in vec:
            acc = acc + value
        return acc

    rights: list[tuple[int, int, list[Any]]] = []
    for ell, chain in enumerate(basis.right_chains, start=1):
        previous = [QQ_I.zero] * n
        for q, raw in enumerate(chain, start=1):
            vec = exact_vec(raw)
            image = apply(vec)
            if any(a - b for a, b in zip(image, previous)):
                violations.append(ChainViolation("chain", ell, q, "M v^(q) ≠ v^(q−1)"))
            if total(vec):
                violations.append(ChainViolation("right_sum", ell, q, f"Σ = {total(vec)}"))
            rights.append((ell, q, vec))
            previous = vec

    for ell, chain in enumerate(basis.left_chains, start=1):
        for p, raw in enumerate(chain, start=1):
            row = exact_vec(raw)
            if total(row):
                violations.append(ChainViolation("left_sum", ell, p, f"Σ = {total(row)}"))
            for r, q, vec in rights:
                pairing = QQ_I.zero
                for a, b in zip(row, vec):
                    pairing = pairing + a * b
                expected = QQ_I.one if (ell, p) == (r, q) else QQ_I.zero
                if pairing - expected:
                    violations.append(
                        ChainViolation("gram", ell, p, f"⟨w, v^({r},{q})⟩ = {pairing}")
                    )

    for item in violations:
        logger.warning("Нарушено тождество %s в блоке ℓ=%d, позиция %d", item.kind, item.block, item.position)
    return ChainCheckReport(tuple(violations))


def oracle_report(params: ModelParams, chain_limit: int = 10) -> OracleReport:
    """
    Сверка замкнутых формул с точными вычислениями: кратности, размерность ядра,
    разбиение на блоки, индекс, ненулевой множитель многочлена и цепочки.
    """
    _check_size(params.n)
    mult = multiplicities(params.n, params.t)
    ranks = tuple(rank_sequence(params, params.n))
    charpoly = exact_charpoly(params)
    checks: dict[str, bool] = {
        "a0": charpoly.zero_root_count == mult.a0,
        "g0": params.n - ranks[1] == mult.g0,
        "block_sizes": block_sizes_from_ranks(ranks) == list(mult.block_sizes),
        "k0": index_from_ranks(ranks) == mult.k0,
    }
    if params.delta and params.has_single_b():
        closed = char_poly(params, EXACT).coefficients
        checks["char_poly"] = tuple(closed) == charpoly.nonzero_factor()
    if params.n <= chain_limit:
        basis = build_jordan_basis(params, EXACT)
        checks["chains"] = exact_chain_check(params, basis).ok

    failed = [name for name, passed in checks.items() if not passed]
    if failed:
        logger.warning("Оракул: не сошлись проверки %s для n=%d, t=%d", failed, params.n, params.t)
    else:
        logger.info("Оракул: все проверки пройдены для n=%d, t=%d", params.n, params.t)
    return OracleReport(params=params, checks=checks, ranks=ranks, charpoly=charpoly)

"""
Жордановы цепочки нулевого собственного значения.

Правые цепочки строятся каноническим шагом w = −α(u)e₁ + u,
u = S^{−(t+1)}(I + ĥ(S))v, где ĥ — обратный ряд к h. Левые цепочки
находятся из рекурсии w M = w₀^(ℓ,p+1) и спаривания с концами правых
цепочек: точно одной системой, в плавающей арифметике сверху вниз
через QR расширенной матрицы [M | концы цепочек].

Все функции работают с любым арифметическим бэкендом (float или exact),
векторы — одномерные numpy-массивы.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

import numpy as np
import scipy.linalg

from src.pseudospec.services.arithmetic import (
    FLOAT,
    Arithmetic,
    SingularSystemError,
    to_complex_array,
)
from src.pseudospec.services.model import (
    ModelParams,
    build_matrix,
    multiplicities,
    ones_krylov,
    series_inverse,
)
from src.pseudospec.services.spectrum import EigenPair, SpectrumReport, eigenpairs

logger = logging.getLogger("pseudospec")

ILL_CONDITIONED = 1e12
LEFT_RANK_TOL = 1e-13


class ChainExhaustedError(Exception):
    """Цепочку нельзя продолжить: вектор доходит до конца матрицы."""


class JordanStructureError(Exception):
    """Построенные цепочки не согласуются с ожидаемыми размерами блоков."""


class SingularConstraintError(Exception):
    """Система для левых цепочек вырождена (неверные размеры блоков)."""


Chain = tuple[np.ndarray, ...]


@dataclass(frozen=True)
class JordanBasis:
    """
    Правые и левые жордановы цепочки λ₀ = 0.

    right_chains[ℓ−1][q−1] = v₀^(ℓ,q), left_chains[ℓ−1][p−1] = w₀^(ℓ,p);
    левые векторы хранятся строками, спаривание ⟨w, v⟩ = Σ w_j v_j.
    Частичный базис (только правые цепочки) имеет пустой left_chains.
    """

    params: ModelParams
    block_sizes: tuple[int, ...]
    right_chains: tuple[Chain, ...]
    left_chains: tuple[Chain, ...] = ()
    exact: bool = False

    @property
    def complete(self) -> bool:
        return len(self.left_chains) == len(self.right_chains)

    @property
    def k0(self) -> int:
        return max(self.block_sizes, default=0)

    @property
    def kappa0_per_block(self) -> dict[int, float]:
        return condition_numbers(self)[0]

    @property
    def kappa0(self) -> float:
        return condition_numbers(self)[1]

    def right_vectors(self) -> list[np.ndarray]:
        return [vec for chain in self.right_chains for vec in chain]

    def left_vectors(self) -> list[np.ndarray]:
        return [vec for chain in self.left_chains for vec in chain]


@dataclass(frozen=True)
class ChainReport:
    """
    Плавающие невязки базиса (все величины — максимумы по цепочкам).

    Поля *_relative делятся на нормы участвующих векторов: при b ≠ 0
    правые цепочки растут биномиально, и абсолютные невязки теряют смысл.
    """

    chain_residual: float
    zero_sum: float
    gram_deviation: float
    left_recursion: float
    chain_relative: float = 0.0
    gram_relative: float = 0.0
    left_relative: float = 0.0

    def ok(self, tol: float = 1e-10) -> bool:
        return max(self.chain_residual, self.zero_sum, self.gram_deviation, self.left_recursion) <= tol


@dataclass(frozen=True)
class Similarity:
    """V, W = V⁻¹ и ожидаемая форма 𝕁 ⊕ diag(λ)."""

    V: np.ndarray
    W: np.ndarray
    canonical: np.ndarray
    residual: float
    inverse_residual: float
    condition: float

    @property
    def ill_conditioned(self) -> bool:
        return self.condition > ILL_CONDITIONED


def right_eigenvectors(n: int, t: int, arithmetic: Arithmetic = FLOAT) -> list[np.ndarray]:
    """v₀^(ℓ,1) = e₁ − e_{ℓ+1}, ℓ = 1..t."""
    multiplicities(n, t)
    out = []
    for ell in range(1, t + 1):
        vec = arithmetic.zeros(n)
        vec[0] = arithmetic.scalar(1)
        vec[ell] = arithmetic.scalar(-1)
        out.append(vec)
    return out


def chain_step(params: ModelParams, v: np.ndarray, arithmetic: Arithmetic = FLOAT) -> np.ndarray:
    """
    Следующий вектор цепочки: M w = v и Σ w_j = 0.

    v должен обращаться в ноль в последних t+1 координатах, иначе
    ChainExhaustedError (длина блока достигнута).
    """
    n, t = params.n, params.t
    shift = t + 1
    for j in range(n - shift, n):
        if not arithmetic.is_zero(v[j]):
            raise ChainExhaustedError(
                f"Цепочка исчерпана: координата {j + 1} вектора ненулевая, "
                f"а последние {shift} должны быть нулевыми"
            )

    inverse = series_inverse(params.b_coeffs, n, arithmetic)
    u = arithmetic.zeros(n)
    for j in range(n - shift):
        acc = arithmetic.scalar(0)
        for k in range(n - shift - j):
            if not arithmetic.is_zero(inverse[k]):
                acc = acc + inverse[k] * v[j + k]
        u[j] = acc

    w = arithmetic.zeros(n)
    total = arithmetic.scalar(0)
    for j in range(shift, n):
        w[j] = u[j - shift]
        total = total + w[j]
    w[0] = w[0] - total
    return w


def build_right_chains(params: ModelParams, arithmetic: Arithmetic = FLOAT) -> JordanBasis:
    """Цепочки длины d₀^(ℓ) для ℓ = 1..t; от δ не зависят."""
    mult = multiplicities(params.n, params.t)
    chains: list[Chain] = []
    for ell, start in enumerate(right_eigenvectors(params.n, params.t, arithmetic), start=1):
        chain = [start]
        size = mult.block_sizes[ell - 1]
        for _ in range(1, size):
            try:
                chain.append(chain_step(params, chain[-1], arithmetic))
            except ChainExhaustedError as exc:
                raise JordanStructureError(
                    f"Блок ℓ={ell} оборвался на длине {len(chain)} вместо {size}"
                ) from exc
        chains.append(tuple(chain))
    return JordanBasis(
        params=params,
        block_sizes=mult.block_sizes,
        right_chains=tuple(chains),
        exact=arithmetic.exact,
    )


def build_left_chains(
    params: ModelParams, right: JordanBasis, arithmetic: Arithmetic = FLOAT
) -> JordanBasis:
    """
    Левые строки w₀^(ℓ,p): w M = w₀^(ℓ,p+1) (для верхней строки w M = 0)
    и ⟨w, v₀^(ℓ',d)⟩ = δ_{ℓℓ'}δ_{p,d} на концах правых цепочек.

    Точный бэкенд решает всё сразу: Cᵀ Yᵀ = [0; I], столбцы C — векторы
    Крылова 𝟙..N^{p1}𝟙 и все правые цепочки. Плавающий идёт по цепочке
    сверху вниз с одним QR-разложением расширенной матрицы [M | концы цепочек].
    """
    if not right.block_sizes:
        return JordanBasis(params=params, block_sizes=(), right_chains=(), exact=arithmetic.exact)
    if arithmetic.exact:
        chains = _left_chains_exact(params, right, arithmetic)
    else:
        chains = _left_chains_float(params, right)
    logger.info("Левые цепочки построены: блоки %s", list(right.block_sizes))
    return JordanBasis(
        params=params,
        block_sizes=right.block_sizes,
        right_chains=right.right_chains,
        left_chains=tuple(chains),
        exact=arithmetic.exact,
    )


def _left_chains_exact(params: ModelParams, right: JordanBasis, arithmetic: Arithmetic) -> list[Chain]:
    n = params.n
    krylov = ones_krylov(params, arithmetic)
    columns = list(krylov) + right.right_vectors()
    if len(columns) != n:
        raise SingularConstraintError(
            f"Ожидалось {n} столбцов ограничений, получено {len(columns)}: "
            "размеры блоков не согласованы с кратностью"
        )
    a0 = n - len(krylov)
    system = arithmetic.zeros_matrix(n, n)
    for col, vec in enumerate(columns):
        for row in range(n):
            system[col, row] = vec[row]
    rhs = arithmetic.zeros_matrix(n, a0)
    for i in range(a0):
        rhs[len(krylov) + i, i] = arithmetic.scalar(1)

    try:
        solution = arithmetic.solve(system, rhs)
    except SingularSystemError as exc:
        raise SingularConstraintError(f"Система левых цепочек вырождена: {exc}") from exc

    rows = [np.array(solution[:, i]) for i in range(a0)]
    chains: list[Chain] = []
    cursor = 0
    for size in right.block_sizes:
        chains.append(tuple(rows[cursor : cursor + size]))
        cursor += size
    return chains


def _left_chains_float(params: ModelParams, right: JordanBasis) -> list[Chain]:
    n = params.n
    matrix = to_complex_array(build_matrix(params))
    ends = [to_complex_array(chain[-1]) for chain in right.right_chains]
    scales = [float(np.linalg.norm(end)) for end in ends]
    augmented = np.hstack([matrix, np.column_stack([e / s for e, s in zip(ends, scales)])])

    # y·[M | E] = target  ⇔  [M | E]ᵀ yᵀ = targetᵀ, спаривание без сопряжения
    q, r = scipy.linalg.qr(augmented.T, mode="economic")
    diag = np.abs(np.diag(r))
    if diag.min() <= LEFT_RANK_TOL * diag.max():
        raise SingularConstraintError(
            f"Система левых цепочек вырождена: min|r_ii|/max|r_ii| = {diag.min() / diag.max():.1e}"
        )
    q_adjoint = q.conj().T

    chains: list[Chain] = []
    for ell, size in enumerate(right.block_sizes):
        rows: list[np.ndarray] = [np.zeros(0)] * size
        upper = np.zeros(n, dtype=complex)
        for p in reversed(range(size)):
            ends_target = np.zeros(len(ends), dtype=complex)
            if p == size - 1:
                ends_target[ell] = 1.0 / scales[ell]
            target = np.concatenate([upper, ends_target])
            row = scipy.linalg.solve_triangular(r, q_adjoint @ target)
            rows[p] = row
            upper = row
        chains.append(tuple(rows))
    return chains


def build_jordan_basis(params: ModelParams, arithmetic: Arithmetic = FLOAT) -> JordanBasis:
    return build_left_chains(params, build_right_chains(params, arithmetic), arithmetic)


def omega(t: int, xi: int) -> Fraction:
    """Ω_{t,ξ} = −(t−ξ+1)/ξ — множитель амплитуды граничных псевдомод."""
    if xi <= 0:
        raise ValueError("Ω определено только при ξ ≥ 1")
    return Fraction(-(t - xi + 1), xi)


def closed_form_b0(n: int, t: int, arithmetic: Arithmetic = FLOAT) -> JordanBasis:
    """
    Цепочки при b = 0 в замкнутом виде.

    Правые: v₀^(ℓ,q) = e_{(t+1)(q−1)+1} − e_{(t+1)(q−1)+ℓ+1}.
    Левые записаны для w₀^(ℓ,d−q), q = 0..d−1; при (t+1) ∤ n амплитуды
    хвоста меняются геометрически с множителем Ω_{t,ξ}.
    """
    mult = multiplicities(n, t)
    xi = mult.xi
    s = t + 1
    one = arithmetic.scalar(1)
    right_chains: list[Chain] = []
    left_chains: list[Chain] = []

    for ell, size in enumerate(mult.block_sizes, start=1):
        right = []
        for q in range(1, size + 1):
            vec = arithmetic.zeros(n)
            vec[s * (q - 1)] = one
            vec[s * (q - 1) + ell] = arithmetic.scalar(-1)
            right.append(vec)
        right_chains.append(tuple(right))

        left_by_q = [_left_b0(n, t, ell, size, q, xi, arithmetic) for q in range(size)]
        left_chains.append(tuple(reversed(left_by_q)))

    return JordanBasis(
        params=ModelParams(n=n, t=t),
        block_sizes=mult.block_sizes,
        right_chains=tuple(right_chains),
        left_chains=tuple(left_chains),
        exact=arithmetic.exact,
    )


def _left_b0(
    n: int, t: int, ell: int, size: int, q: int, xi: int, arithmetic: Arithmetic
) -> np.ndarray:
    s = t + 1
    one = arithmetic.scalar(1)
    zero = arithmetic.scalar(0)
    pieces: list[Any] = []

    if xi == 0:
        scale = arithmetic.ratio(1, s)
        pieces += [zero] * (n - (q + 1) * s)
        pieces += [one] * ell + [arithmetic.scalar(-t)] + [one] * (t - ell)
        pieces += [zero] * (q * s)
    else:
        scale = arithmetic.ratio(1, xi)
        om = arithmetic.ratio(-(t - xi + 1), xi)
        if ell < xi and q == 0:
            pieces += [zero] * (n - xi)
            pieces += [one] * ell + [arithmetic.scalar(1 - xi)] + [one] * (xi - ell - 1)
        elif ell < xi:
            pieces += [zero] * (s * (size - q - 1))
            pieces += [one] * ell + [arithmetic.scalar(1 - xi)] + [one] * (t - ell)
            for r in range(1, q):
                pieces += [om**r] * s
            pieces += [om**q] * xi
        else:
            pieces += [zero] * (s * (size - q - 1) + ell)
            pieces += [arithmetic.scalar(-xi)] + [zero] * (t - ell)
            for r in range(q):
                pieces += [om**r] * s
            pieces += [om**q] * xi

    if len(pieces) != n:
        raise JordanStructureError(
            f"Замкнутая форма дала длину {len(pieces)} вместо {n} (ℓ={ell}, q={q})"
        )
    vec = arithmetic.zeros(n)
    for j, value in enumerate(pieces):
        vec[j] = scale * value
    return vec


def condition_numbers(basis: JordanBasis) -> tuple[dict[int, float], float]:
    """κ₀^(ℓ) = ‖v₀^(ℓ,1)‖·‖w₀^(ℓ,d)‖ для блоков максимального размера и κ₀ = max."""
    if not basis.complete:
        raise JordanStructureError("Для чисел обусловленности нужны левые цепочки")
    k0 = basis.k0
    per_block: dict[int, float] = {}
    for ell, (right, left, size) in enumerate(
        zip(basis.right_chains, basis.left_chains, basis.block_sizes), start=1
    ):
        if size != k0:
            continue
        head = to_complex_array(right[0])
        top = to_complex_array(left[-1])
        per_block[ell] = float(np.linalg.norm(head) * np.linalg.norm(top))
    return per_block, max(per_block.values(), default=0.0)


def kappa0_b0_reference(n: int, t: int) -> float:
    """κ₀ при b = 0 в замкнутом виде (зависит от ξ = n mod (t+1))."""
    xi = multiplicities(n, t).xi
    if xi == 0:
        return math.sqrt(2 * t / (t + 1))
    if xi == 1:
        return 2.0
    return math.sqrt(2 * (xi - 1) / xi)


def kappa0_upper_bound(t: int) -> float:
    """√(2(t−1)/t): верхняя граница κ₀ при b = 0 и ξ ≥ 2."""
    return math.sqrt(2 * (t - 1) / t)


def t_kappa0_reference(t: int) -> float:
    return math.sqrt(2 * t * (t - 1))


def verify_chains(params: ModelParams, basis: JordanBasis) -> ChainReport:
    """Невязки цепочек, нулевые суммы, отклонение матрицы Грама и левая рекурсия."""
    matrix = to_complex_array(build_matrix(params))
    norm = max(float(np.linalg.norm(matrix, 2)), 1.0)

    chain_res = 0.0
    chain_rel = 0.0
    for chain in basis.right_chains:
        prev = np.zeros(params.n, dtype=complex)
        for vec in chain:
            vec = to_complex_array(vec)
            residual = float(np.linalg.norm(matrix @ vec - prev)) / norm
            chain_res = max(chain_res, residual)
            chain_rel = max(chain_rel, residual / float(np.linalg.norm(vec)))
            prev = vec

    rights = [to_complex_array(v) for v in basis.right_vectors()]
    lefts = [to_complex_array(w) for w in basis.left_vectors()]
    zero_sum = max((abs(vec.sum()) for vec in rights + lefts), default=0.0)

    gram_dev = 0.0
    gram_rel = 0.0
    left_res = 0.0
    left_rel = 0.0
    if lefts:
        deviation = np.abs(np.array(lefts) @ np.array(rights).T - np.eye(len(rights)))
        gram_dev = float(deviation.max())
        row_norms = np.linalg.norm(np.array(lefts), axis=1)
        col_norms = np.linalg.norm(np.array(rights), axis=1)
        gram_rel = float((deviation / np.outer(row_norms, col_norms)).max())
        for chain in basis.left_chains:
            rows = [to_complex_array(w) for w in chain]
            for p, row in enumerate(rows):
                target = rows[p + 1] if p + 1 < len(rows) else np.zeros(params.n, dtype=complex)
                residual = float(np.linalg.norm(row @ matrix - target)) / norm
                left_res = max(left_res, residual)
                left_rel = max(left_rel, residual / float(np.linalg.norm(row)))

    return ChainReport(
        chain_residual=chain_res,
        zero_sum=float(zero_sum),
        gram_deviation=gram_dev,
        left_recursion=left_res,
        chain_relative=chain_rel,
        gram_relative=gram_rel,
        left_relative=left_rel,
    )


def assemble_similarity(
    params: ModelParams,
    basis: JordanBasis,
    spectrum: SpectrumReport,
    pairs: Sequence[EigenPair] | None = None,
) -> Similarity:
    """
    V — все правые цепочки и затем ненулевые собственные векторы, W — строки
    в том же порядке. Ожидается W·M·V = 𝕁 ⊕ diag(λ₁..λ_{p1+1}).
    """
    if pairs is None:
        pairs = eigenpairs(params, spectrum)
    columns = [to_complex_array(v) for v in basis.right_vectors()] + [p.right for p in pairs]
    rows = [to_complex_array(w) for w in basis.left_vectors()] + [p.left for p in pairs]
    V = np.column_stack(columns)
    W = np.vstack(rows)

    size = len(columns)
    canonical = np.zeros((size, size), dtype=complex)
    offset = 0
    for block in basis.block_sizes:
        for q in range(1, block):
            canonical[offset + q - 1, offset + q] = 1.0
        offset += block
    for j, pair in enumerate(pairs):
        canonical[offset + j, offset + j] = pair.eigenvalue

    matrix = to_complex_array(build_matrix(params))
    residual = float(np.linalg.norm(W @ matrix @ V - canonical, 2))
    inverse_residual = float(np.linalg.norm(W @ V - np.eye(size), 2))
    condition = float(np.linalg.cond(V))
    if condition > ILL_CONDITIONED:
        logger.warning("Матрица подобия плохо обусловлена: cond(V) = %.3e", condition)
    return Similarity(
        V=V,
        W=W,
        canonical=canonical,
        residual=residual,
        inverse_residual=inverse_residual,
        condition=condition,
    )

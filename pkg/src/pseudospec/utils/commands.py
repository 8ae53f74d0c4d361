"""
Утилиты для работы с подкомандами.

Содержит единый список подкоманд и построение argparse-парсера.
"""

from __future__ import annotations

import argparse
import logging
from dataclasses import dataclass
from typing import Iterable, NoReturn


@dataclass(frozen=True)
class CommandSpec:
    """Описание подкоманды."""

    name: str
    description: str
    in_help: bool = True


COMMANDS_SPEC: tuple[CommandSpec, ...] = (
    CommandSpec("spectrum", "Ненулевые собственные значения и кратности нуля"),
    CommandSpec("jordan", "Жордановы цепочки, κ₀ и матрица подобия"),
    CommandSpec("pseudospec", "Сетка σ_min(zI − M) и диски включения"),
    CommandSpec("ensemble", "Гауссовы возмущения, средний радиус и подгонка"),
    CommandSpec("symbol", "Кривые символа и θ₀"),
    CommandSpec("fit", "Подгонка log R̄ = c1·x + c2 по CSV"),
    CommandSpec("oracle-check", "Точная сверка формул для малых n"),
)


class UsageError(Exception):
    """Ошибка разбора командной строки."""


class CommandParser(argparse.ArgumentParser):
    """ArgumentParser, который не завершает процесс, а поднимает UsageError."""

    def error(self, message: str) -> NoReturn:
        raise UsageError(message)


def _shared_flags() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", help="Файл key=value с параметрами запуска")
    shared.add_argument("--n", help="Размер матрицы")
    shared.add_argument("--t", help="Дискретное время 0 ≤ t ≤ n−2")
    shared.add_argument("--b-re", "--b", action="append", help="Re b_j (повторяется для b1, b2, ...)")
    shared.add_argument("--b-im", action="append", help="Im b_j (повторяется)")
    shared.add_argument("--delta-re", "--delta", help="Re δ")
    shared.add_argument("--delta-im", help="Im δ")
    shared.add_argument("--seed", help="Главный seed ансамбля, 0 ≤ seed < 2^64")
    shared.add_argument("--samples", help="Число выборок ансамбля")
    shared.add_argument("--tilde-delta", help="Масштаб возмущения δ̃")
    shared.add_argument("--eps", action="append", help="Уровень ε (повторяется)")
    shared.add_argument("--region", help="Область xmin,xmax,ymin,ymax")
    shared.add_argument("--resolution", help="Разрешение сетки nx,ny")
    shared.add_argument("--out", help="Папка для результатов")
    shared.add_argument("--format", help="Формат табличных данных: csv | json")
    shared.add_argument("--exact", action="store_const", const="true", help="Точная арифметика")
    shared.add_argument("--workers", help="Ширина параллельного отображения")
    shared.add_argument("--t-list", help="Список t через запятую (развёртка)")
    shared.add_argument("--n-list", help="Список n через запятую (развёртка)")
    shared.add_argument("--order", help="Порядок разложения выброса")
    shared.add_argument("--match-tol", help="Относительный допуск сопоставления λ_j")
    shared.add_argument("--symbol-samples", help="Число точек на кривой символа")
    shared.add_argument("--input", help="CSV со столбцами t,n,mean_radius для fit")
    shared.add_argument("--timestamp", action="store_const", const="true", help="Метка времени в файлах")
    return shared


def iter_help_commands(specs: Iterable[CommandSpec]) -> list[CommandSpec]:
    return [spec for spec in specs if spec.in_help]


def build_parser() -> CommandParser:
    """Парсер с подкомандой и общими флагами (значения по умолчанию — None)."""
    logger = logging.getLogger("pseudospec")
    parser = CommandParser(prog="pseudospec", description="Спектры и псевдоспектры S^(b)(t, δJ)")
    subparsers = parser.add_subparsers(dest="subcommand", required=True, parser_class=CommandParser)
    shared = _shared_flags()
    for spec in iter_help_commands(COMMANDS_SPEC):
        subparsers.add_parser(spec.name, help=spec.description, parents=[shared])
    logger.debug("Подкоманды: %s", ", ".join(spec.name for spec in COMMANDS_SPEC))
    return parser

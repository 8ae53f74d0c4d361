"""
Точка входа командной строки.

Здесь выполняется:
- настройка логирования;
- разбор подкоманды и сборка конфигурации;
- создание кэша выборок ансамбля;
- запуск обработчика и перевод исключений в код выхода.

Коды выхода: 0 — успех, 1 — ошибка использования или параметров,
2 — численный сбой.
"""

from __future__ import annotations

import os
import sys
from typing import Sequence

from dotenv import load_dotenv

from src.pseudospec.commands import RunContext, get_handlers
from src.pseudospec.commands.oracle import OracleMismatchError
from src.pseudospec.config import load_config
from src.pseudospec.services.arithmetic import SingularSystemError
from src.pseudospec.services.cache import CacheSettings, build_sample_cache
from src.pseudospec.services.ensemble import EigensolverError, FitError
from src.pseudospec.services.exact_oracle import OracleLimitError
from src.pseudospec.services.jordan import (
    ChainExhaustedError,
    JordanStructureError,
    SingularConstraintError,
)
from src.pseudospec.services.resolvent import NearSingularResolventError
from src.pseudospec.services.spectrum import EigenvectorError, RootFindingError
from src.pseudospec.services.symbol import AmbiguousWindingError, ThetaZeroNotFoundError
from src.pseudospec.utils.commands import UsageError, build_parser
from src.pseudospec.utils.logging import setup_logging

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2

# Часть численных ошибок наследует ValueError, поэтому проверяются первыми.
NUMERICAL_ERRORS: tuple[type[Exception], ...] = (
    RootFindingError,
    EigenvectorError,
    ChainExhaustedError,
    JordanStructureError,
    SingularConstraintError,
    NearSingularResolventError,
    EigensolverError,
    FitError,
    AmbiguousWindingError,
    ThetaZeroNotFoundError,
    OracleMismatchError,
    SingularSystemError,
)
USAGE_ERRORS: tuple[type[Exception], ...] = (UsageError, OracleLimitError, ValueError)


async def main(argv: Sequence[str] | None = None) -> int:
    """
    Выполняет одну подкоманду и возвращает код выхода.
    """
    load_dotenv()
    logger = setup_logging(os.getenv("PSEUDOSPEC_LOG_DIR"))

    try:
        args = build_parser().parse_args(argv)
        config = load_config(args)
    except USAGE_ERRORS as exc:
        print(f"Ошибка: {exc}", file=sys.stderr)
        return EXIT_USAGE

    cache = build_sample_cache(
        backend=config.cache_backend,
        settings=CacheSettings(ttl_seconds=config.cache_ttl_sec),
        redis_url=config.redis_url,
    )
    handler = get_handlers()[config.subcommand]
    logger.info("Подкоманда %s, вывод в %s", config.subcommand, config.out)
    try:
        files = await handler(config, RunContext(cache=cache))
    except NUMERICAL_ERRORS as exc:
        logger.error("Численный сбой в %s: %s", config.subcommand, exc)
        print(f"Численная ошибка: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except USAGE_ERRORS as exc:
        logger.error("Некорректные параметры для %s: %s", config.subcommand, exc)
        print(f"Ошибка: {exc}", file=sys.stderr)
        return EXIT_USAGE
    finally:
        await cache.aclose()

    for path in files:
        logger.info("Записан файл %s", path)
    return EXIT_OK

"""
Пакет с обработчиками подкоманд.

Каждый модуль экспортирует `async def handle(config, context) -> list[Path]`;
вычисления живут в слое services, здесь — только оркестрация и вывод.
"""

from __future__ import annotations

from pathlib import Path
from typing import Awaitable, Callable

from src.pseudospec.config import RunConfig

from . import ensemble, fit, jordan, oracle, pseudospec, spectrum, symbol
from .context import RunContext


Handler = Callable[[RunConfig, RunContext], Awaitable[list[Path]]]


def get_handlers() -> dict[str, Handler]:
    """Соответствие имени подкоманды и обработчика."""
    return {
        "spectrum": spectrum.handle,
        "jordan": jordan.handle,
        "pseudospec": pseudospec.handle,
        "ensemble": ensemble.handle,
        "symbol": symbol.handle,
        "fit": fit.handle,
        "oracle-check": oracle.handle,
    }

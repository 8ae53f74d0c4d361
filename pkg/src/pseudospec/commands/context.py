"""Контекст запуска, общий для обработчиков подкоманд."""

from __future__ import annotations

from dataclasses import dataclass

from src.pseudospec.services.cache import SampleCache


@dataclass
class RunContext:
    """Ресурсы процесса: кэш выборок ансамбля."""

    cache: SampleCache

"""
Модуль конфигурации запуска.

Приоритет значений: флаги командной строки > файл key=value (--config,
синтаксис dotenv) > значения по умолчанию. Настройки процесса (кэш, Redis,
папка логов) читаются из окружения и .env.
"""

from __future__ import annotations

import argparse
import os
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

from dotenv import dotenv_values, load_dotenv

from src.pseudospec.services.arithmetic import EXACT, FLOAT, Arithmetic, exact_complex
from src.pseudospec.services.model import ModelParams

SEED_LIMIT = 2**64
FORMATS = ("csv", "json")


class ConfigError(ValueError):
    """Исключение при некорректной конфигурации запуска."""


@dataclass
class RunConfig:
    """Конфигурация одного запуска подкоманды."""

    subcommand: str
    n: int = 12
    t: int = 2
    b_re: list[Fraction] = field(default_factory=list)
    b_im: list[Fraction] = field(default_factory=list)
    delta_re: Fraction = Fraction(1, 100)
    delta_im: Fraction = Fraction(0)
    seed: int = 0
    samples: int = 20
    tilde_delta: Fraction = Fraction(1, 10**10)
    eps: list[Fraction] = field(default_factory=lambda: [Fraction(1, 10**10)])
    region: tuple[Fraction, Fraction, Fraction, Fraction] | None = None
    resolution: tuple[int, int] = (101, 101)
    out: Path = Path("out")
    format: str = "csv"
    exact: bool = False
    workers: int = 4
    t_list: list[int] = field(default_factory=list)
    n_list: list[int] = field(default_factory=list)
    order: int = 3
    match_tol: Fraction = Fraction(1, 100)
    symbol_samples: int = 4096
    input_path: Path | None = None
    timestamp: bool = False
    config_path: Path | None = None

    cache_backend: str = "memory"  # memory | redis
    redis_url: str | None = None
    cache_ttl_sec: int = 60 * 60 * 24 * 7

    def b_coeffs(self, arithmetic: Arithmetic = FLOAT) -> tuple[Any, ...]:
        size = max(len(self.b_re), len(self.b_im))
        re = self.b_re + [Fraction(0)] * (size - len(self.b_re))
        im = self.b_im + [Fraction(0)] * (size - len(self.b_im))
        return tuple(_complex(r, i, arithmetic) for r, i in zip(re, im))

    def delta(self, arithmetic: Arithmetic = FLOAT) -> Any:
        return _complex(self.delta_re, self.delta_im, arithmetic)

    def params(self, arithmetic: Arithmetic = FLOAT, t: int | None = None, n: int | None = None) -> ModelParams:
        return ModelParams(
            n=self.n if n is None else n,
            t=self.t if t is None else t,
            b_coeffs=self.b_coeffs(arithmetic),
            delta=self.delta(arithmetic),
        )

    @property
    def arithmetic(self) -> Arithmetic:
        return EXACT if self.exact else FLOAT


def _complex(re: Fraction, im: Fraction, arithmetic: Arithmetic) -> Any:
    if arithmetic.exact:
        return exact_complex(re, im)
    return complex(float(re), float(im))


def parse_fraction(text: str) -> Fraction:
    """Число как точная дробь: принимает "0.25", "1e-2", "1/10"."""
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"Некорректное число: {text!r}") from exc


def parse_int(text: str) -> int:
    value = parse_fraction(text)
    if value.denominator != 1:
        raise ConfigError(f"Ожидалось целое число, получено {text!r}")
    return int(value)


def parse_fraction_list(text: str | list[str]) -> list[Fraction]:
    items = text if isinstance(text, list) else str(text).split(",")
    return [parse_fraction(item) for item in items if str(item).strip()]


def parse_int_list(text: str) -> list[int]:
    return [parse_int(item) for item in str(text).split(",") if item.strip()]


def parse_region(text: str) -> tuple[Fraction, Fraction, Fraction, Fraction]:
    values = parse_fraction_list(text)
    if len(values) != 4:
        raise ConfigError(f"Область задаётся как xmin,xmax,ymin,ymax, получено {text!r}")
    xmin, xmax, ymin, ymax = values
    if not (xmin < xmax and ymin < ymax):
        raise ConfigError(f"Пустая область: {text!r}")
    return xmin, xmax, ymin, ymax


def parse_resolution(text: str) -> tuple[int, int]:
    values = parse_int_list(text)
    if len(values) != 2:
        raise ConfigError(f"Разрешение задаётся как nx,ny, получено {text!r}")
    if min(values) < 2:
        raise ConfigError(f"Разрешение сетки должно быть не меньше 2×2, получено {text!r}")
    return values[0], values[1]


def parse_bool(text: str) -> bool:
    return str(text).strip().lower() in {"1", "true", "yes", "on"}


_PARSERS: dict[str, Callable[[Any], Any]] = {
    "n": parse_int,
    "t": parse_int,
    "b_re": parse_fraction_list,
    "b_im": parse_fraction_list,
    "delta_re": parse_fraction,
    "delta_im": parse_fraction,
    "seed": parse_int,
    "samples": parse_int,
    "tilde_delta": parse_fraction,
    "eps": parse_fraction_list,
    "region": parse_region,
    "resolution": parse_resolution,
    "out": Path,
    "format": lambda text: str(text).strip().lower(),
    "exact": parse_bool,
    "workers": parse_int,
    "t_list": parse_int_list,
    "n_list": parse_int_list,
    "order": parse_int,
    "match_tol": parse_fraction,
    "symbol_samples": parse_int,
    "input": Path,
    "timestamp": parse_bool,
}

# имя ключа → имя поля RunConfig
_FIELDS = {"input": "input_path"}


def read_config_file(path: Path) -> dict[str, str]:
    """Плоский файл key=value (синтаксис dotenv); ключи без учёта регистра, '-' = '_'."""
    if not path.exists():
        raise ConfigError(f"Файл конфигурации не найден: {path}")
    values = dotenv_values(path)
    return {
        key.strip().lower().replace("-", "_"): value
        for key, value in values.items()
        if value is not None
    }


def load_config(args: argparse.Namespace) -> RunConfig:
    """
    Собирает RunConfig из разобранных флагов, файла конфигурации и окружения.
    """
    load_dotenv()

    config_path = Path(args.config) if getattr(args, "config", None) else None
    file_values = read_config_file(config_path) if config_path else {}
    unknown = set(file_values) - set(_PARSERS)
    if unknown:
        raise ConfigError(f"Неизвестные ключи в файле конфигурации: {sorted(unknown)}")

    values: dict[str, Any] = {}
    for key, parser in _PARSERS.items():
        raw = getattr(args, key, None)
        if raw is None:
            raw = file_values.get(key)
        if raw is None:
            continue
        values[_FIELDS.get(key, key)] = parser(raw)

    config = RunConfig(
        subcommand=args.subcommand,
        config_path=config_path,
        cache_backend=os.getenv("CACHE_BACKEND", "memory"),
        redis_url=os.getenv("REDIS_URL"),
        cache_ttl_sec=int(os.getenv("CACHE_TTL_SEC", str(60 * 60 * 24 * 7))),
        **values,
    )
    validate_config(config)
    return config


def validate_config(config: RunConfig) -> None:
    if not 0 <= config.seed < SEED_LIMIT:
        raise ConfigError(f"seed должен лежать в [0, 2^64), получено {config.seed}")
    if config.format not in FORMATS:
        raise ConfigError(f"Формат должен быть csv или json, получено {config.format!r}")
    if config.samples < 1:
        raise ConfigError(f"Число выборок должно быть положительным, получено {config.samples}")
    if config.workers < 1:
        raise ConfigError(f"workers должно быть ≥ 1, получено {config.workers}")
    if any(eps <= 0 for eps in config.eps):
        raise ConfigError("Все уровни ε должны быть положительными")
    if config.match_tol <= 0:
        raise ConfigError("match_tol должен быть положительным")
    if config.cache_backend.lower() not in {"memory", "redis"}:
        raise ConfigError(f"Неизвестный бэкенд кэша: {config.cache_backend}")

"""Подкоманда fit: подгонка закона среднего радиуса по готовому CSV."""

from __future__ import annotations

import logging
from pathlib import Path

from src.pseudospec.config import ConfigError, RunConfig
from src.pseudospec.services.ensemble import RadiusPoint, fit_radius_law
from src.pseudospec.utils.formatting import read_csv, write_json

from .context import RunContext

logger = logging.getLogger("pseudospec")


async def handle(config: RunConfig, context: RunContext) -> list[Path]:
    if config.input_path is None:
        raise ConfigError("Для fit нужен --input с CSV t,n,mean_radius")
    if not config.input_path.exists():
        raise ConfigError(f"Файл не найден: {config.input_path}")
    try:
        points = [
            RadiusPoint(t=int(row["t"]), n=int(row["n"]), mean_radius=float(row["mean_radius"]))
            for row in read_csv(config.input_path)
        ]
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"Некорректный CSV {config.input_path}: {exc}") from exc

    fit = fit_radius_law(points)
    logger.info("fit: c1=%.4f, c2=%.4f по %d точкам", fit.c1, fit.c2, fit.points)
    payload = {"c1": fit.c1, "c2": fit.c2, "residual": fit.residual, "points": fit.points}
    return [write_json(config.out / "fit.json", payload, config.timestamp)]

"""Подкоманда oracle-check: точная сверка формул для одного n и набора t."""

from __future__ import annotations

import asyncio
import logging
from pathlib import Path

from src.pseudospec.config import RunConfig
from src.pseudospec.services.arithmetic import EXACT
from src.pseudospec.services.exact_oracle import oracle_report
from src.pseudospec.utils.formatting import params_to_json, write_json

from .context import RunContext

logger = logging.getLogger("pseudospec")


class OracleMismatchError(Exception):
    """Точные вычисления разошлись с замкнутыми формулами."""


async def handle(config: RunConfig, context: RunContext) -> list[Path]:
    times = config.t_list or [config.t]
    results = []
    for t in times:
        params = config.params(EXACT, t=t)
        report = await asyncio.to_thread(oracle_report, params)
        results.append(
            {
                "params": params_to_json(params),
                "checks": report.checks,
                "ranks": list(report.ranks),
                "charpoly": list(report.charpoly.coefficients),
                "ok": report.ok,
            }
        )

    path = write_json(config.out / "oracle.json", {"n": config.n, "results": results}, config.timestamp)
    failed = [item["params"]["t"] for item in results if not item["ok"]]
    if failed:
        raise OracleMismatchError(f"Проверки не пройдены для t = {failed}")
    logger.info("oracle-check: n=%d, все %d значений t прошли проверку", config.n, len(times))
    return [path]

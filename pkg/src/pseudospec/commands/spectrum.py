"""Подкоманда spectrum: многочлен, корни и асимптотики."""

from __future__ import annotations

import asyncio
import logging
from pathlib import Path

from src.pseudospec.config import RunConfig
from src.pseudospec.services.arithmetic import EXACT, FLOAT
from src.pseudospec.services.model import nilpotency_index
from src.pseudospec.services.spectrum import (
    char_poly,
    circular_limit,
    nonzero_eigenvalues,
    outlier_expansion,
    p_gap,
    p_gap_prediction,
)
from src.pseudospec.utils.formatting import format_params_for_log, params_to_json, write_json, write_table

from .context import RunContext

logger = logging.getLogger("pseudospec")


async def handle(config: RunConfig, context: RunContext) -> list[Path]:
    params = config.params()
    logger.info("spectrum: %s", format_params_for_log(params))
    report = await asyncio.to_thread(nonzero_eigenvalues, params)
    mult = report.multiplicities
    n_delta = params.n * FLOAT.to_complex(params.delta)

    payload = {
        "params": params_to_json(params),
        "multiplicities": {
            "p1": mult.p1,
            "p2": mult.p2,
            "a0": mult.a0,
            "g0": mult.g0,
            "k0": mult.k0,
            "xi": mult.xi,
            "block_sizes": list(mult.block_sizes),
            "nilpotency_index": nilpotency_index(params.n, params.t),
            "p_gap": p_gap(params.n, params.t),
            "p_gap_prediction": p_gap_prediction(params.n, params.t),
        },
        "polynomial": {
            "provenance": report.polynomial.provenance,
            "coefficients": list(report.polynomial.coefficients),
            "scale": report.polynomial.scale,
        },
        "eigenvalues": list(report.eigenvalues),
        "residuals": list(report.residuals),
        "iterations": report.iterations,
        "outlier": report.outlier,
        "trace_error": abs(sum(report.eigenvalues) - n_delta),
    }

    if abs(n_delta) > 1:
        expansion = []
        for order in range(min(config.order, max(mult.p1 - 1, 0)) + 1):
            value = outlier_expansion(params, order)
            expansion.append({"order": order, "value": value, "error": abs(report.outlier - value)})
        payload["outlier_expansion"] = expansion

    limit = circular_limit(params, strict=False)
    payload["circular_limit"] = {
        "points": list(limit.points),
        "failed_conditions": list(limit.failed_conditions),
    }

    if config.exact:
        exact_poly = char_poly(config.params(EXACT), EXACT)
        payload["exact_polynomial"] = list(exact_poly.coefficients)

    out = config.out
    files = [
        write_json(out / "spectrum.json", payload, config.timestamp),
        write_table(
            out,
            "roots",
            ["index", "re", "im", "residual"],
            (
                [j, z.real, z.imag, res]
                for j, (z, res) in enumerate(zip(report.eigenvalues, report.residuals), start=1)
            ),
            config.format,
            config.timestamp,
        ),
    ]
    logger.info("spectrum: %d корней записано в %s", len(report.eigenvalues), out)
    return files

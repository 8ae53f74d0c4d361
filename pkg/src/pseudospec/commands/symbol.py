"""Подкоманда symbol: кривые f(r e^{iθ}), θ₀ и ϖ."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any

from src.pseudospec.config import RunConfig
from src.pseudospec.services.model import multiplicities
from src.pseudospec.services.symbol import (
    AmbiguousWindingError,
    size_reduction_radius,
    symbol_curve,
    varpi,
    winding_number,
)
from src.pseudospec.utils.formatting import params_to_json, write_json, write_table

from .context import RunContext

logger = logging.getLogger("pseudospec")


async def handle(config: RunConfig, context: RunContext) -> list[Path]:
    params = config.params()
    radii: list[tuple[str, float]] = [("unit", 1.0)]
    if multiplicities(params.n, params.t).k0 > 0:
        radii += [(f"eps={float(eps):g}", size_reduction_radius(params.n, params.t, float(eps))) for eps in config.eps]

    curves: list[dict[str, Any]] = []
    rows: list[list[Any]] = []
    for label, r in radii:
        curve = symbol_curve(params.t, params.b_coeffs, r, config.symbol_samples)
        try:
            winding = winding_number(curve, 0)
        except AmbiguousWindingError:
            winding = None
        curves.append({"curve": label, "r": r, "theta0": curve.theta0, "winding_at_zero": winding})
        rows += [[label, r, theta, z.real, z.imag] for theta, z in zip(curve.thetas, curve.points)]
        logger.info("symbol: кривая %s, r=%.6f, θ₀=%s", label, r, curve.theta0)

    payload = {
        "params": params_to_json(params),
        "varpi": varpi(params.n, params.t),
        "curves": curves,
    }
    out = config.out
    return [
        write_json(out / "symbol.json", payload, config.timestamp),
        write_table(out, "symbol_curve", ["curve", "r", "theta", "re", "im"], rows, config.format, config.timestamp),
    ]

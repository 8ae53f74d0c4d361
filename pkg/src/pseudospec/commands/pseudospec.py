"""Подкоманда pseudospec: поле σ_min, диски включения и проверка нулевой компоненты."""

from __future__ import annotations

import asyncio
import logging
from pathlib import Path
from typing import Any

import numpy as np

from src.pseudospec.config import ConfigError, RunConfig
from src.pseudospec.services.jordan import build_jordan_basis
from src.pseudospec.services.model import build_matrix
from src.pseudospec.services.resolvent import (
    Region,
    check_enclosure,
    default_region,
    enclosure_disks,
    pseudospectrum_grid,
)
from src.pseudospec.services.spectrum import eigenpairs, nonzero_eigenvalues
from src.pseudospec.utils.formatting import format_params_for_log, params_to_json, write_json, write_table

from .context import RunContext

logger = logging.getLogger("pseudospec")


async def handle(config: RunConfig, context: RunContext) -> list[Path]:
    if any(eps >= 1 for eps in config.eps):
        raise ConfigError("Для дисков включения нужно 0 < ε < 1")
    params = config.params()
    logger.info("pseudospec: %s", format_params_for_log(params))
    matrix = np.asarray(build_matrix(params), dtype=complex)
    region = (
        Region(*(float(v) for v in config.region)) if config.region else default_region(params)
    )
    grid = await pseudospectrum_grid(matrix, region, config.resolution, config.workers)

    payload: dict[str, Any] = {
        "params": params_to_json(params),
        "region": [region.xmin, region.xmax, region.ymin, region.ymax],
        "resolution": list(grid.resolution),
        "levels": [],
    }
    if params.delta and params.has_single_b() and params.t >= 1:
        spectrum = await asyncio.to_thread(nonzero_eigenvalues, params)
        basis = await asyncio.to_thread(build_jordan_basis, params)
        pairs = eigenpairs(params, spectrum)
        for eps in config.eps:
            disks = enclosure_disks(params, basis, spectrum, float(eps), pairs)
            check = check_enclosure(grid, disks)
            payload["levels"].append(
                {
                    "epsilon": float(eps),
                    "c0": disks.c0,
                    "exponent": disks.exponent,
                    "zero_radius": disks.zero_radius,
                    "eigen_disks": [
                        {"center": c, "radius": r}
                        for c, r in zip(disks.eigen_centers, disks.eigen_radii)
                    ],
                    "zero_component": {
                        "ok": check.ok,
                        "nodes": check.component_size,
                        "max_modulus": check.max_modulus,
                        "allowed_radius": check.allowed_radius,
                    },
                }
            )
    else:
        logger.info("pseudospec: диски включения пропущены (нужны δ ≠ 0, h = b s, t ≥ 1)")

    out = config.out
    nodes = (
        [x, y, grid.values[iy, ix]]
        for iy, y in enumerate(grid.ys)
        for ix, x in enumerate(grid.xs)
    )
    files = [
        write_table(out, "grid", ["x", "y", "sigma_min"], nodes, config.format, config.timestamp),
        write_table(
            out,
            "sigma_matrix",
            [f"x{ix}" for ix in range(grid.xs.size)],
            (list(row) for row in grid.values),
            config.format,
            config.timestamp,
        ),
        write_json(out / "disks.json", payload, config.timestamp),
    ]
    return files

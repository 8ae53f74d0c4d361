"""Подкоманда ensemble: облако возмущённых спектров, R̄, развёртка и подгонка."""

from __future__ import annotations

import asyncio
import logging
from pathlib import Path
from typing import Any

import numpy as np

from src.pseudospec.config import RunConfig
from src.pseudospec.services.ensemble import (
    boundary_radius_ratio,
    filter_outer,
    fit_radius_law,
    run_ensemble,
    sweep_mean_radius,
)
from src.pseudospec.services.model import multiplicities
from src.pseudospec.services.resolvent import Region, default_region
from src.pseudospec.services.spectrum import nonzero_eigenvalues
from src.pseudospec.services.symbol import (
    conjecture_region,
    region_coverage,
    size_reduction_radius,
    symbol_curve,
)
from src.pseudospec.utils.formatting import format_params_for_log, params_to_json, write_json, write_table

from .context import RunContext

logger = logging.getLogger("pseudospec")


def _outer_displacement(outer: np.ndarray, targets: np.ndarray) -> float:
    if outer.size == 0 or targets.size == 0:
        return 0.0
    distance = np.abs(outer[:, None] - targets[None, :]) / np.abs(targets)[None, :]
    return float(distance.min(axis=1).max())


async def handle(config: RunConfig, context: RunContext) -> list[Path]:
    params = config.params()
    logger.info("ensemble: %s, δ̃=%s, выборок %d", format_params_for_log(params), config.tilde_delta, config.samples)
    tilde = float(config.tilde_delta)
    epsilon = float(config.eps[0])
    match_tol = float(config.match_tol)

    spectrum = await asyncio.to_thread(nonzero_eigenvalues, params)
    cloud = await run_ensemble(params, tilde, config.samples, config.seed, config.workers, context.cache)
    cloud = filter_outer(cloud, spectrum, match_tol)
    remaining = cloud.remaining()
    radius = float(np.abs(remaining).mean()) if remaining.size else 0.0

    payload: dict[str, Any] = {
        "params": params_to_json(params),
        "tilde_delta": tilde,
        "seed": config.seed,
        "samples": config.samples,
        "failures": [{"sample": i, "error": msg} for i, msg in cloud.failures],
        "mean_radius": radius,
        "outer_displacement": _outer_displacement(cloud.outer(), np.array(spectrum.eigenvalues)),
        "epsilon": epsilon,
    }
    # уменьшенная кривая определена только при k₀ > 0 и ε < 1
    reduced = multiplicities(params.n, params.t).k0 > 0 and epsilon < 1
    if reduced:
        region = Region(*(float(v) for v in config.region)) if config.region else default_region(params)
        conjecture = await asyncio.to_thread(
            conjecture_region, params, epsilon, region, config.resolution, config.symbol_samples
        )
        payload["reduced_radius"] = conjecture.radius
        payload["theta0"] = conjecture.theta0
        payload["region_coverage"] = region_coverage(conjecture, remaining)
        if radius > 0:
            payload["boundary_ratio"] = boundary_radius_ratio(
                radius, params.n, params.t, params.b_coeffs, epsilon
            )

    out = config.out
    files = [
        write_table(
            out,
            "cloud",
            ["sample", "re", "im", "filtered"],
            (
                [int(i), z.real, z.imag, int(flag)]
                for i, z, flag in zip(cloud.sample_index, cloud.eigenvalues, cloud.filtered)
            ),
            config.format,
            config.timestamp,
        )
    ]

    radii = [("unit", 1.0)]
    if reduced:
        radii.append(("reduced", size_reduction_radius(params.n, params.t, epsilon)))
    curves = []
    for label, r in radii:
        curve = symbol_curve(params.t, params.b_coeffs, r, config.symbol_samples)
        curves += [[label, r, theta, z.real, z.imag] for theta, z in zip(curve.thetas, curve.points)]
    files.append(
        write_table(out, "symbol_curve", ["curve", "r", "theta", "re", "im"], curves, config.format, config.timestamp)
    )

    if config.t_list and config.n_list:
        pairs = [(t, n) for n in config.n_list for t in config.t_list if t <= n - 2]
        points = await sweep_mean_radius(
            pairs,
            params.b_coeffs,
            params.delta,
            tilde,
            config.samples,
            config.seed,
            match_tol,
            config.workers,
            context.cache,
        )
        files.append(
            write_table(
                out,
                "radius",
                ["t", "n", "mean_radius"],
                ([p.t, p.n, p.mean_radius] for p in points),
                config.format,
                config.timestamp,
            )
        )
        if len(points) >= 3:
            fit = fit_radius_law(points)
            payload["fit"] = {"c1": fit.c1, "c2": fit.c2, "residual": fit.residual, "points": fit.points}
            files.append(write_json(out / "fit.json", payload["fit"], config.timestamp))

    files.insert(0, write_json(out / "ensemble.json", payload, config.timestamp))
    logger.info("ensemble: R̄ = %.6f, файлов %d", radius, len(files))
    return files

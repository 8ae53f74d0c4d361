"""Подкоманда jordan: цепочки по блокам, κ₀ и невязка подобия."""

from __future__ import annotations

import asyncio
import logging
from pathlib import Path
from typing import Any

from src.pseudospec.config import RunConfig
from src.pseudospec.services.exact_oracle import exact_chain_check
from src.pseudospec.services.jordan import (
    JordanBasis,
    assemble_similarity,
    build_jordan_basis,
    condition_numbers,
    kappa0_b0_reference,
    kappa0_upper_bound,
    t_kappa0_reference,
    verify_chains,
)
from src.pseudospec.services.spectrum import nonzero_eigenvalues
from src.pseudospec.utils.formatting import (
    complex_columns,
    format_params_for_log,
    params_to_json,
    write_json,
    write_table,
)

from .context import RunContext

logger = logging.getLogger("pseudospec")


def _chain_rows(basis: JordanBasis, ell: int) -> list[list[Any]]:
    rows = []
    right = basis.right_chains[ell]
    left = basis.left_chains[ell]
    for q, (v, w) in enumerate(zip(right, left), start=1):
        row: list[Any] = [q]
        for value in v:
            row += complex_columns(value)
        for value in w:
            row += complex_columns(value)
        rows.append(row)
    return rows


def _chain_header(n: int) -> list[str]:
    header = ["q"]
    for prefix in ("v", "w"):
        for j in range(1, n + 1):
            header += [f"{prefix}{j}_re", f"{prefix}{j}_im"]
    return header


async def handle(config: RunConfig, context: RunContext) -> list[Path]:
    arithmetic = config.arithmetic
    params = config.params(arithmetic)
    logger.info("jordan: %s (%s)", format_params_for_log(params), arithmetic.name)
    basis = await asyncio.to_thread(build_jordan_basis, params, arithmetic)
    per_block, kappa0 = condition_numbers(basis)
    report = verify_chains(params, basis)

    payload: dict[str, Any] = {
        "params": params_to_json(params),
        "arithmetic": arithmetic.name,
        "block_sizes": list(basis.block_sizes),
        "kappa0_per_block": per_block,
        "kappa0": kappa0,
        "t_kappa0": params.t * kappa0,
        "chain_report": {
            "chain_residual": report.chain_residual,
            "zero_sum": report.zero_sum,
            "gram_deviation": report.gram_deviation,
            "left_recursion": report.left_recursion,
            "chain_relative": report.chain_relative,
            "gram_relative": report.gram_relative,
            "left_relative": report.left_relative,
        },
    }
    if params.t >= 1 and all(not c for c in params.b_coeffs):
        payload["b0_reference"] = {
            "kappa0": kappa0_b0_reference(params.n, params.t),
            "kappa0_bound": kappa0_upper_bound(params.t),
            "t_kappa0": t_kappa0_reference(params.t),
        }

    if params.delta and params.has_single_b():
        float_params = config.params()
        spectrum = await asyncio.to_thread(nonzero_eigenvalues, float_params)
        similarity = assemble_similarity(float_params, basis, spectrum)
        payload["similarity"] = {
            "residual": similarity.residual,
            "inverse_residual": similarity.inverse_residual,
            "condition": similarity.condition,
            "ill_conditioned": similarity.ill_conditioned,
        }

    if basis.exact:
        check = exact_chain_check(params, basis)
        payload["exact_check"] = {
            "ok": check.ok,
            "violations": [
                {"kind": v.kind, "block": v.block, "position": v.position, "detail": v.detail}
                for v in check.violations
            ],
        }

    out = config.out
    files = [write_json(out / "jordan.json", payload, config.timestamp)]
    header = _chain_header(params.n)
    for ell in range(len(basis.right_chains)):
        files.append(
            write_table(
                out, f"chain_{ell + 1}", header, _chain_rows(basis, ell), config.format, config.timestamp
            )
        )
    logger.info("jordan: блоки %s, κ₀ = %.6g", list(basis.block_sizes), kappa0)
    return files

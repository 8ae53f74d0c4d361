"""
Утилиты форматирования для логов и файлового вывода.

Комплексные числа всегда пишутся парой {re, im} (JSON) или соседними
столбцами re, im (CSV); float — через repr, чтобы чтение было бит-в-бит.
"""

from __future__ import annotations

import csv
import json
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np
from sympy.polys.domains import QQ_I

from src.pseudospec.services.arithmetic import EXACT, FLOAT
from src.pseudospec.services.model import ModelParams


def format_value_for_log(value: Any) -> str:
    if isinstance(value, QQ_I.dtype):
        return str(value)
    z = FLOAT.to_complex(value)
    if z.imag == 0:
        return f"{z.real:g}"
    return f"{z.real:g}{z.imag:+g}i"


def format_params_for_log(params: ModelParams) -> str:
    """
    Строка с параметрами модели для логов.

    Returns:
        Строка вида "n=12, t=2, b=[1], δ=0.01"
    """
    b = ", ".join(format_value_for_log(c) for c in params.b_coeffs)
    return f"n={params.n}, t={params.t}, b=[{b}], δ={format_value_for_log(params.delta)}"


def format_float(value: float) -> str:
    return repr(float(value))


def _fraction(value: Any) -> Fraction:
    return Fraction(int(value.numerator), int(value.denominator))


def format_exact(value: Any) -> tuple[str, str]:
    """Элемент QQ_I как пара строк-дробей ("p/q", "r/s")."""
    value = EXACT.scalar(value)
    return str(_fraction(value.x)), str(_fraction(value.y))


def complex_to_json(value: Any) -> dict[str, Any]:
    """{re, im}: float для плавающих значений, строки-дроби для точных."""
    if isinstance(value, QQ_I.dtype):
        re, im = format_exact(value)
        return {"re": re, "im": im}
    z = FLOAT.to_complex(value)
    return {"re": float(z.real), "im": float(z.imag)}


def complex_columns(value: Any) -> list[str]:
    if isinstance(value, QQ_I.dtype):
        return list(format_exact(value))
    z = FLOAT.to_complex(value)
    return [format_float(z.real), format_float(z.imag)]


def params_to_json(params: ModelParams) -> dict[str, Any]:
    return {
        "n": params.n,
        "t": params.t,
        "b": [complex_to_json(c) for c in params.b_coeffs],
        "delta": complex_to_json(params.delta),
    }


def to_jsonable(value: Any) -> Any:
    """Рекурсивно приводит numpy-типы, комплексные числа и кортежи к JSON."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (complex, np.complexfloating)) or isinstance(value, QQ_I.dtype):
        return complex_to_json(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if np.isfinite(value) else str(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, Path):
        return str(value)
    return value


def write_json(path: Path, payload: dict[str, Any], timestamp: bool = False) -> Path:
    """JSON с сортировкой ключей; метка времени добавляется только по запросу."""
    data = to_jsonable(payload)
    if timestamp:
        data["generated_at"] = datetime.now(timezone.utc).isoformat()
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    return path


def write_csv(
    path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]], timestamp: bool = False
) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        if timestamp:
            handle.write(f"# generated_at {datetime.now(timezone.utc).isoformat()}\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def read_csv(path: Path) -> list[dict[str, str]]:
    with path.open("r", encoding="utf-8", newline="") as handle:
        lines = [line for line in handle if not line.startswith("#")]
    return list(csv.DictReader(lines))


def write_table(
    out_dir: Path,
    name: str,
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    fmt: str = "csv",
    timestamp: bool = False,
) -> Path:
    """Табличные данные в CSV или в JSON вида {"columns": [...], "rows": [[...]]}."""
    if fmt == "json":
        return write_json(
            out_dir / f"{name}.json",
            {"columns": list(header), "rows": [list(row) for row in rows]},
            timestamp,
        )
    return write_csv(out_dir / f"{name}.csv", header, rows, timestamp)

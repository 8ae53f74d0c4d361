"""
Тесты точки входа (`src.pseudospec.main`): подкоманды пишут файлы и
возвращают коды выхода 0 / 1 / 2.
"""

import json
import logging
from pathlib import Path
from typing import Generator

import pytest

from src.pseudospec.main import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, main
from src.pseudospec.utils.formatting import read_csv, write_csv


@pytest.fixture(autouse=True)
def isolated_logs(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> Generator[None, None, None]:
    """Логи пишутся во временную папку, кэш — в памяти."""
    monkeypatch.setenv("PSEUDOSPEC_LOG_DIR", str(tmp_path / "logs"))
    monkeypatch.setenv("CACHE_BACKEND", "memory")
    logger = logging.getLogger("pseudospec")
    handlers = list(logger.handlers)
    for handler in handlers:
        logger.removeHandler(handler)
    try:
        yield
    finally:
        for handler in list(logger.handlers):
            handler.close()
            logger.removeHandler(handler)
        for handler in handlers:
            logger.addHandler(handler)


@pytest.mark.asyncio
async def test_spectrum_writes_json_and_roots(tmp_path: Path) -> None:
    out = tmp_path / "out"

    code = await main(
        ["spectrum", "--n", "12", "--t", "2", "--b-re", "1", "--delta-re", "0.5", "--out", str(out)]
    )

    assert code == EXIT_OK
    payload = json.loads((out / "spectrum.json").read_text(encoding="utf-8"))
    assert payload["multiplicities"]["a0"] == 8
    assert payload["multiplicities"]["block_sizes"] == [4, 4]
    assert len(payload["eigenvalues"]) == 4
    assert len(read_csv(out / "roots.csv")) == 4


@pytest.mark.asyncio
async def test_spectrum_accepts_short_aliases(tmp_path: Path) -> None:
    out = tmp_path / "out"

    code = await main(["spectrum", "--n", "100", "--t", "3", "--b", "1", "--delta", "1e-2", "--out", str(out)])

    assert code == EXIT_OK
    payload = json.loads((out / "spectrum.json").read_text(encoding="utf-8"))
    assert len(payload["eigenvalues"]) == 25


@pytest.mark.asyncio
async def test_spectrum_rejects_zero_delta(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    code = await main(["spectrum", "--delta-re", "0", "--out", str(tmp_path)])

    assert code == EXIT_USAGE
    assert "delta must be non-zero" in capsys.readouterr().err


@pytest.mark.asyncio
async def test_usage_error_for_unknown_flag(capsys: pytest.CaptureFixture[str]) -> None:
    code = await main(["spectrum", "--bogus", "1"])

    assert code == EXIT_USAGE
    assert "Ошибка" in capsys.readouterr().err


@pytest.mark.asyncio
async def test_jordan_writes_chain_tables(tmp_path: Path) -> None:
    out = tmp_path / "out"

    code = await main(
        ["jordan", "--n", "6", "--t", "2", "--b-re", "1", "--delta-re", "1/10", "--exact", "--out", str(out)]
    )

    assert code == EXIT_OK
    payload = json.loads((out / "jordan.json").read_text(encoding="utf-8"))
    assert payload["block_sizes"] == [2, 2]
    assert (out / "chain_1.csv").exists()
    assert (out / "chain_2.csv").exists()


@pytest.mark.asyncio
async def test_oracle_check_passes(tmp_path: Path) -> None:
    out = tmp_path / "out"

    code = await main(
        ["oracle-check", "--n", "8", "--t-list", "1,2,3", "--b-re", "1/2", "--delta-re", "1/10", "--out", str(out)]
    )

    assert code == EXIT_OK
    payload = json.loads((out / "oracle.json").read_text(encoding="utf-8"))
    assert [item["ok"] for item in payload["results"]] == [True, True, True]


@pytest.mark.asyncio
async def test_oracle_check_rejects_large_n(tmp_path: Path) -> None:
    code = await main(["oracle-check", "--n", "20", "--out", str(tmp_path)])

    assert code == EXIT_USAGE


@pytest.mark.asyncio
async def test_fit_reads_csv(tmp_path: Path) -> None:
    source = write_csv(
        tmp_path / "radius.csv",
        ["t", "n", "mean_radius"],
        [[2, 40, 0.3], [3, 60, 0.32], [5, 80, 0.35], [8, 120, 0.36]],
    )

    code = await main(["fit", "--input", str(source), "--out", str(tmp_path / "out")])

    assert code == EXIT_OK
    payload = json.loads((tmp_path / "out" / "fit.json").read_text(encoding="utf-8"))
    assert payload["points"] == 4


@pytest.mark.asyncio
async def test_fit_with_too_few_points_is_numerical_error(tmp_path: Path) -> None:
    source = write_csv(tmp_path / "radius.csv", ["t", "n", "mean_radius"], [[2, 40, 0.3]])

    code = await main(["fit", "--input", str(source), "--out", str(tmp_path / "out")])

    assert code == EXIT_NUMERICAL


@pytest.mark.asyncio
async def test_fit_requires_input(tmp_path: Path) -> None:
    code = await main(["fit", "--out", str(tmp_path)])

    assert code == EXIT_USAGE


@pytest.mark.asyncio
async def test_symbol_and_pseudospec_outputs(tmp_path: Path) -> None:
    out = tmp_path / "out"

    symbol_code = await main(["symbol", "--n", "12", "--t", "2", "--eps", "1e-6", "--out", str(out)])
    grid_code = await main(
        ["pseudospec", "--n", "12", "--t", "2", "--b-re", "0", "--resolution", "9,9", "--eps", "1e-6", "--out", str(out)]
    )

    assert symbol_code == EXIT_OK
    assert grid_code == EXIT_OK
    symbol = json.loads((out / "symbol.json").read_text(encoding="utf-8"))
    assert symbol["varpi"] == 12
    assert len(read_csv(out / "grid.csv")) == 81
    disks = json.loads((out / "disks.json").read_text(encoding="utf-8"))
    assert disks["levels"][0]["zero_component"]["ok"]


@pytest.mark.asyncio
async def test_ensemble_is_reproducible(tmp_path: Path) -> None:
    argv = ["ensemble", "--n", "12", "--t", "2", "--b-re", "1", "--delta-re", "0.5", "--samples", "3",
            "--seed", "5", "--resolution", "21,21", "--eps", "1e-6"]

    first = await main(argv + ["--out", str(tmp_path / "a")])
    second = await main(argv + ["--out", str(tmp_path / "b")])

    assert first == second == EXIT_OK
    assert (tmp_path / "a" / "cloud.csv").read_text() == (tmp_path / "b" / "cloud.csv").read_text()
    payload = json.loads((tmp_path / "a" / "ensemble.json").read_text(encoding="utf-8"))
    assert payload["failures"] == []
    assert payload["mean_radius"] > 0


@pytest.mark.asyncio
async def test_ensemble_outputs_do_not_depend_on_workers(tmp_path: Path) -> None:
    argv = ["ensemble", "--n", "12", "--t", "2", "--b-re", "1", "--delta-re", "0.5", "--samples", "6",
            "--seed", "9", "--resolution", "21,21", "--eps", "1e-6"]

    serial = await main(argv + ["--workers", "1", "--out", str(tmp_path / "serial")])
    parallel = await main(argv + ["--workers", "8", "--out", str(tmp_path / "parallel")])

    assert serial == parallel == EXIT_OK
    names = sorted(path.name for path in (tmp_path / "serial").iterdir())
    assert names == sorted(path.name for path in (tmp_path / "parallel").iterdir())
    assert {"cloud.csv", "ensemble.json", "symbol_curve.csv"} <= set(names)
    for name in names:
        assert (tmp_path / "serial" / name).read_bytes() == (tmp_path / "parallel" / name).read_bytes(), name

"""
Настройка логирования.

Выводит логи в консоль и записывает их в файл pseudospec.log.
"""

import logging
from pathlib import Path


def setup_logging(log_dir: str | Path | None = None) -> logging.Logger:
    """
    Создаёт и настраивает логгер "pseudospec".

    log_dir — папка для файла логов (по умолчанию logs). Повторный вызов
    не добавляет обработчики второй раз.
    """
    logs_dir = Path(log_dir) if log_dir else Path("logs")
    logger = logging.getLogger("pseudospec")
    logger.setLevel(logging.INFO)
    if logger.handlers:
        return logger

    logs_dir.mkdir(parents=True, exist_ok=True)
    formatter = logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")

    file_handler = logging.FileHandler(logs_dir / "pseudospec.log", encoding="utf-8")
    file_handler.setFormatter(formatter)

    console_handler = logging.StreamHandler()
    console_handler.setFormatter(formatter)

    logger.addHandler(file_handler)
    logger.addHandler(console_handler)
    return logger

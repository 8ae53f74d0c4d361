"""
Позволяет запускать программу командой:

    python -m src.pseudospec spectrum --n 12 --t 2 --b-re 1 --delta-re 0.01
"""

import asyncio
import sys

from .main import main


if __name__ == "__main__":
    try:
        sys.exit(asyncio.run(main()))
    except KeyboardInterrupt:
        print("Вычисление прервано пользователем.", file=sys.stderr)
        sys.exit(130)

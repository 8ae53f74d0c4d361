"""Вычислительное ядро, не зависящее от командной строки и файлового вывода."""

"""Вспомогательные утилиты (логирование, таблица подкоманд, сериализация)."""

"""
Пакет pseudospec: спектры, жордановы цепочки и псевдоспектры семейства
S^(b)(t, δJ).

Точка входа командной строки: модуль src.pseudospec.main
"""

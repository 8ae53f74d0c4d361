"""
Тесты pseudospec: кратности и спектр, жордановы цепочки, резольвента,
ансамбли возмущений, символ и точный оракул, а также CLI.

Запуск из корня проекта: `pytest` (асинхронные тесты идут через pytest-asyncio).
"""

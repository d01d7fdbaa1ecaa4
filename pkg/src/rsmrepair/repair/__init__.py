"""Repair formulas, solver backends, and the exploration loop.

Import the submodules directly (``formula``, ``encode``, ``oracle``,
``backend``, ``srtr``); this package initializer stays empty so the child
solver process starts without pulling numeric dependencies.
"""

"""Global numeric budgets with environment-variable overrides.

All defaults are deliberately generous for desk-scale indices (eigenvalue
index <= ~16, primes 2..7).  Overrides:

    PADICTREE_TERM_BUDGET   max number of series terms before giving up
    PADICTREE_FLOAT_DPS     decimal digits for floating work (DFT, zeta)
    PADICTREE_ORACLE_DPS    decimal digits for the dense Jacobi eigensolver
"""

from __future__ import annotations

import os

DEFAULT_TERM_BUDGET = 256
DEFAULT_FLOAT_DPS = 64
DEFAULT_ORACLE_DPS = 50


def _env_int(name: str, default: int, minimum: int) -> int:
    raw = os.environ.get(name)
    if raw is None:
        return default
    value = int(raw)
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return value


def term_budget(override: int | None = None) -> int:
    if override is not None:
        return int(override)
    return _env_int("PADICTREE_TERM_BUDGET", DEFAULT_TERM_BUDGET, 8)


def float_dps(override: int | None = None) -> int:
    if override is not None:
        return int(override)
    return _env_int("PADICTREE_FLOAT_DPS", DEFAULT_FLOAT_DPS, 15)


def oracle_dps(override: int | None = None) -> int:
    if override is not None:
        return int(override)
    return _env_int("PADICTREE_ORACLE_DPS", DEFAULT_ORACLE_DPS, 15)

"""Frozen default constants.

Every value can be overridden from the CLI with ``--const KEY=VAL`` or from the
environment (``QCYCLE_CONST=KEY=VAL,...``).  ``QSEARCH_D`` is the measured Markov
constant written by ``scripts/calibrate_constants.py``.
"""
from __future__ import annotations

import math

DEFAULTS: dict[str, float] = {
    # span program: alpha = ALPHA_FACTOR * sqrt(W1 bound), Theta = 1 / (C_PRIME * W)
    "ALPHA_FACTOR": 3.0,
    "C_PRIME": 10.0,
    # quantum walk: weight of the dangling edge and step multiplier
    "WALK_C": 4.0,
    "WALK_CW": 8.0,
    # search driver
    "C_DOUBLE_PRIME": 16.0,
    "LAMBDA": 6.0 / 5.0,
    "AMPLIFY_THRESHOLD": 0.30,
    "AMPLIFY_P_YES": 0.45,
    "AMPLIFY_P_NO": 0.10,
    # query cap constant for one R_A R_B step in units of sqrt(d_m)
    "WALK_QUERY_C": 12.0,
    # qsearch mean-iteration constant
    "QSEARCH_C": 4.0,
    # measured by scripts/calibrate_constants.py (mean QSearch iterations / sqrt(N/t), worst cell)
    "QSEARCH_D": 1.16,
}

C_GEO = (1 + math.sqrt(2)) / ((math.sqrt(2) - 1) * math.sqrt(2))

ZERO_PHASE_TOL = 1e-9
RANK_TOL = 1e-9


def resolve(overrides: dict[str, float] | None = None) -> dict[str, float]:
    out = dict(DEFAULTS)
    for key, val in (overrides or {}).items():
        key = key.upper()
        if key not in out:
            raise KeyError(f"unknown constant {key}")
        out[key] = float(val)
    return out

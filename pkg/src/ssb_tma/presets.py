"""Published duty-cycle sets for a 30-element array (element indices start at 0)."""

from __future__ import annotations

import numpy as np

N_PRESET = 30

# mirrored pairs (n, 29 - n)
TABLE2_PAIRS = {
    (1, 28): 0.136,
    (2, 27): 0.050,
    (3, 26): 0.953,
    (4, 25): 0.947,
    (5, 24): 0.689,
    (9, 20): 0.926,
}

# nonideal-pulse set; unlisted elements stay at 1 and no mirroring is assumed
TABLE3_ELEMENTS = {
    2: 0.063,
    4: 0.078,
    5: 0.076,
    6: 0.063,
    7: 0.880,
    14: 0.962,
    18: 0.175,
    19: 0.471,
    20: 0.977,
}


def table2_xi() -> np.ndarray:
    xi = np.ones(N_PRESET)
    for pair, value in TABLE2_PAIRS.items():
        xi[list(pair)] = value
    return xi


def table3_xi() -> np.ndarray:
    xi = np.ones(N_PRESET)
    for n, value in TABLE3_ELEMENTS.items():
        xi[n] = value
    return xi


PRESETS = {
    "ones": None,
    "table2": table2_xi,
    "table3": table3_xi,
}

"""Gamma function by the Lanczos approximation and the Airy seeds built from it."""

from __future__ import annotations

import math

# g = 7, n = 9 coefficient set; relative error below 1e-15 on the positive axis
_G = 7
_P = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def lanczos_gamma(z: float) -> float:
    if z < 0.5:
        # reflection formula
        return math.pi / (math.sin(math.pi * z) * lanczos_gamma(1.0 - z))
    z -= 1.0
    acc = _P[0]
    for k in range(1, len(_P)):
        acc += _P[k] / (z + k)
    t = z + _G + 0.5
    return math.sqrt(2 * math.pi) * t ** (z + 0.5) * math.exp(-t) * acc


def airy_seeds() -> tuple[float, float, float, float]:
    """``(Ai(0), Ai'(0), Bi(0), Bi'(0))`` from their Gamma-function expressions."""
    g13 = lanczos_gamma(1.0 / 3.0)
    g23 = lanczos_gamma(2.0 / 3.0)
    ai0 = 3.0 ** (-2.0 / 3.0) / g23
    aip0 = -(3.0 ** (-1.0 / 3.0)) / g13
    bi0 = 3.0 ** (-1.0 / 6.0) / g23
    bip0 = 3.0 ** (1.0 / 6.0) / g13
    return ai0, aip0, bi0, bip0

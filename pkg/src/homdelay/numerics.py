"""Small numerical kernels: bisection, golden-section search, Simpson
weights, guarded fractional powers.

Everything here is deterministic and allocation-light; the heavier
sampling machinery lives in `homogeneity`.
"""
from __future__ import annotations

import numpy as np

from .errors import NumericalFailureError

#: golden ratio conjugate, used by the section search
_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


def guarded_power(base, exponent):
    """(max(base, 0))**exponent, elementwise.

    Keeps fractional powers well defined when roundoff drags a
    nonnegative quantity slightly below zero.
    """
    return np.power(np.maximum(base, 0.0), exponent)


def simpson_weights(panels: int, width: float) -> np.ndarray:
    """Composite Simpson weights for `panels` panels over total `width`.

    Returns panels+1 weights; `panels` must be even and >= 2.
    """
    if panels < 2 or panels % 2:
        raise ValueError("quadrature panel count must be even and >= 2")
    w = np.ones(panels + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (width / panels / 3.0)


def bisect_increasing(fn, lo: float, hi: float, iters: int = 200) -> float:
    """Root of an increasing function on [lo, hi] by plain bisection.

    Requires fn(lo) <= 0 <= fn(hi). Runs a fixed iteration count; the
    bracket collapses to a few ulps long before 200 halvings, so the
    result is deterministic and as accurate as the float format allows.
    """
    flo, fhi = fn(lo), fn(hi)
    if flo > 0.0 or fhi < 0.0:
        raise NumericalFailureError(
            f"bisection bracket does not straddle the root: f({lo})={flo}, f({hi})={fhi}"
        )
    if flo == 0.0:
        return lo
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:  # bracket at float resolution
            break
        if fn(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def golden_section_max(fn, lo: float, hi: float, iters: int = 120):
    """Maximize a scalar function on [lo, hi] by golden-section search.

    Intended for unimodal (or monotone) objectives; returns (x, fn(x))
    at the best interior probe.
    """
    a, b = float(lo), float(hi)
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        if b - a <= abs(b) * 1e-15 + 1e-300:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = fn(d)
    return (c, fc) if fc >= fd else (d, fd)

"""Synthetic surfaces and quote sets for tests and demos.

No market data ships with the package; these builders stand in for it.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .calibration import DEFAULT_TENORS, SwaptionQuote, quotes_from_surface
from .curves import DiscountCurve, flat_curve
from .surface import ForwardVolSurface, grid_index


def bucket_surface(expiries, tenors, segment_vols, dt: float = 0.5) -> ForwardVolSurface:
    """Surface in the calibration's own representable class.

    ``segment_vols[e][k]`` is the vol over calendar bucket
    ``[expiries[e-1], expiries[e])`` and maturities
    ``[expiries[e] + tenors[k-1], expiries[e] + tenors[k])``. Maturities below
    the bucket's expiry take the first segment's value; everything beyond the
    longest tenor is zero.
    """
    expiries = sorted(expiries)
    tenors = sorted(tenors)
    seg = np.asarray(segment_vols, dtype=float)
    if seg.shape != (len(expiries), len(tenors)):
        raise ValueError(f"segment_vols must have shape {(len(expiries), len(tenors))}")
    M = grid_index(expiries[-1] + tenors[-1], dt)
    vols = np.zeros((M, M))
    prev = 0
    for e, T in enumerate(expiries):
        k_T = grid_index(T, dt)
        start = k_T
        for k, m in enumerate(tenors):
            end = grid_index(T + m, dt)
            vols[prev:k_T, start:end] = seg[e, k]
            start = end
        for i in range(prev, k_T):
            vols[i, i:k_T] = seg[e, 0]
        prev = k_T
    return ForwardVolSurface(vols, dt)


ARB_EXPIRIES = (1.0, 2.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
ARB_INFLATED_QUOTE = (25.0, 7.0)
ARB_BUMP = 1.03


def arbitrage_base_surface(dt: float = 0.5) -> ForwardVolSurface:
    """80bp forward vols, steepening to 200bp beyond 31y maturity after year 25."""
    return ForwardVolSurface.from_function(
        lambda t, tau: np.where((t >= 25.0) & (tau >= 31.0), 0.02, 0.008),
        grid_index(60.0, dt),
        dt,
    )


def arbitrage_fixture(
    curve: DiscountCurve | None = None, bump: float = ARB_BUMP
) -> tuple[DiscountCurve, list[SwaptionQuote]]:
    """Consistent quote grid with the 25y x 7y vol marked up by ``bump``.

    The mark-up overprices the 25y expiry relative to 30y: the 30y x 1y quote
    then needs negative incremental variance. Dropping the 25y expiry
    restores a consistent set.
    """
    curve = curve if curve is not None else flat_curve(0.02)
    quotes = quotes_from_surface(arbitrage_base_surface(), curve, ARB_EXPIRIES, DEFAULT_TENORS)
    quotes = [
        replace(q, normal_iv=q.normal_iv * bump) if q.key == ARB_INFLATED_QUOTE else q
        for q in quotes
    ]
    return curve, quotes

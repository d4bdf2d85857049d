"""
Pricing ATM swaptions from a forward-vol surface
================================================

A one-factor forward volatility surface sigma(t, tau) is stored as a grid of
half-year cells. The closed-form ATM price only needs the surface, the
discount curve and the swap schedule.
"""

import numpy as np

from hjm_swaption import ForwardVolSurface, SwaptionSpec, atm_price, build_discount_curve

# an upward sloping continuously compounded zero curve
curve = build_discount_curve([(1, 0.010), (2, 0.013), (5, 0.019), (10, 0.024), (30, 0.028)], mode="rate")

# forward vols that decay with time-to-maturity tau - t, 40 years of half-year cells
surface = ForwardVolSurface.from_function(
    lambda t, tau: 0.006 + 0.004 * np.exp(-(tau - t) / 8.0), max_index=80
)

print("expiry x tenor   strike    annuity   normal vol (bp)")
for expiry in (1, 2, 5, 10):
    for tenor in (1, 5, 10, 30):
        res = atm_price(surface, curve, SwaptionSpec(expiry, tenor))
        print(f"{expiry:>4}y x {tenor:>2}y   {res.strike:.5f}   {res.annuity:7.4f}   {res.normal_iv * 1e4:7.2f}")

# Prices are homogeneous of degree one in the surface.
spec = SwaptionSpec(5, 10)
base = atm_price(surface, curve, spec).price
print("\ndoubling the surface doubles the price:", atm_price(surface.scaled(2.0), curve, spec).price / base)

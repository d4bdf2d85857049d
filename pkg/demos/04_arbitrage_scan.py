"""
Finding inconsistent quotes
===========================

A 25y x 7y quote marked up by 3% makes the 25y expiry too expensive relative
to 30y. The 30y x 1y quote then needs negative incremental variance, which
no real volatility can deliver. The scan flags it and tries dropping each
neighbouring expiry.
"""

from dataclasses import replace

from hjm_swaption import arb_scan, bootstrap_surface
from hjm_swaption.synthetic import arbitrage_fixture

curve, quotes = arbitrage_fixture()

for flag in arb_scan(quotes, curve):
    print(f"{flag.expiry:g}y x {flag.tenor:g}y: {flag.kind}, detail {flag.detail:.3e}")
    print("  dropping these expiries clears it:", list(flag.suggested_exclusions))

cleaned = [replace(q, excluded=True) if q.expiry == 25.0 else q for q in quotes]
report = bootstrap_surface(cleaned, curve)
print("\nafter excluding 25y:", len(report.flags), "flags, max residual", f"{report.max_relative_residual:.1e}")

"""
Checking the closed form against Monte-Carlo
============================================

The forward curve is simulated on the same grid with Euler steps. With a
flat 100bp surface and 10,000 paths the two prices should agree within the
sampling error, and dropping the drift should break the agreement.
"""

from hjm_swaption import ForwardVolSurface, SwaptionSpec, atm_price, flat_curve, martingale_check, price_swaption_mc

curve = flat_curve(0.02)
surface = ForwardVolSurface.flat(0.01, 60)

print("expiry x tenor   closed form   Monte-Carlo      z")
for expiry in (1, 2, 5, 10):
    for tenor in (1, 2, 5, 10):
        spec = SwaptionSpec(expiry, tenor)
        cf = atm_price(surface, curve, spec)
        mc = price_swaption_mc(surface, curve, spec, n_paths=10_000, seed=42)
        z = (mc.normal_iv - cf.normal_iv) / mc.iv_std_error
        print(f"{expiry:>4}y x {tenor:>2}y   {cf.normal_iv * 1e4:8.2f}bp   {mc.normal_iv * 1e4:8.2f}bp   {z:+5.2f}")

# Discounted bonds are martingales under the simulated measure.
for t, T in [(1, 5), (2, 10)]:
    res = martingale_check(surface, curve, t, T, n_paths=10_000, seed=0, antithetic=True)
    print(f"\nE[disc B({t},{T})] = {res.mean:.6f}  vs  B(0,{T}) = {res.expected:.6f}  "
          f"({res.relative_error / res.relative_std_error:.2f} standard errors)")

# Without the drift the bias is visible far above the noise.
res = martingale_check(surface, curve, 2, 10, n_paths=10_000, seed=0, drift_scheme="none", antithetic=True)
print(f"zero drift: {res.relative_error / res.relative_std_error:.1f} standard errors")

"""ATM swaption pricing and forward-volatility calibration in a one-factor HJM model.

The closed form (:mod:`.pricer`) is the small-volatility limit of the HJM
swap-value distribution; :mod:`.mc` is an independent Euler Monte-Carlo of
the same model used to check it; :mod:`.calibration` bootstraps the
forward-volatility surface from ATM normal vols and flags quotes no
nonnegative volatility can reproduce.
"""

from .calibration import (
    DEFAULT_TENORS,
    ArbitrageFlag,
    CalibrationConfig,
    CalibrationReport,
    SwaptionQuote,
    arb_scan,
    bootstrap_surface,
    quotes_from_surface,
    reprice_quotes,
    tenor_fill,
)
from .curves import (
    DiscountCurve,
    SpreadCurve,
    SwaptionSpec,
    annuity,
    atm_strike_dual,
    build_discount_curve,
    build_spread_curve,
    discount,
    flat_curve,
    flat_spread,
    swap_rate,
    unit_spread,
)
from .mc import McResult, martingale_check, price_swaption_mc
from .pricer import PriceResult, atm_price, sigma_total
from .surface import ForwardVolSurface, GridError, int_sigma

__version__ = "0.1.0"

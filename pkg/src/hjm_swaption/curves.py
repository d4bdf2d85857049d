"""Discount and Libor-OIS spread curves, swap rates and annuities.

All times are year fractions measured from today. Discount factors are
interpolated linearly in ``log B(0, T)``, which is the same as holding the
instantaneous forward rate flat between pillars. Beyond the last pillar the
terminal forward is held flat.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

DEFAULT_DAY_COUNT_FACTOR = 365.25 / 360.0
GRID_TOL = 1e-9


class CurveError(ValueError):
    """Raised for malformed curve pillars or out-of-domain queries."""


def _log_linear_pillars(times, values, what: str) -> tuple[np.ndarray, np.ndarray]:
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.ndim != 1 or times.shape != values.shape:
        raise CurveError(f"{what} pillars must be two equal-length 1-d sequences")
    if times.size == 0:
        raise CurveError(f"{what} needs at least one pillar")
    if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
        raise CurveError(f"{what} pillars must be finite")
    if np.any(values <= 0.0):
        raise CurveError(f"{what} factors must be strictly positive")
    if times[0] < 0.0:
        raise CurveError(f"{what} pillar times must be >= 0")
    if times[0] == 0.0:
        if not math.isclose(values[0], 1.0, rel_tol=0.0, abs_tol=1e-15):
            raise CurveError(f"{what} factor at t=0 must be 1, got {values[0]!r}")
        times, values = times[1:], values[1:]
    if np.any(np.diff(times) <= 0.0):
        raise CurveError(f"{what} pillar times must be strictly increasing")
    times = np.concatenate(([0.0], times))
    log_values = np.concatenate(([0.0], np.log(values)))
    return times, log_values


def _log_linear_eval(times: np.ndarray, log_values: np.ndarray, t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    out = np.interp(t, times, log_values)
    if times.size > 1:
        slope = (log_values[-1] - log_values[-2]) / (times[-1] - times[-2])
    else:
        slope = 0.0
    beyond = t > times[-1]
    if np.any(beyond):
        out = np.where(beyond, log_values[-1] + slope * (t - times[-1]), out)
    return out


@dataclass(frozen=True, eq=False)
class DiscountCurve:
    """Zero-coupon bond prices ``B(0, T)``.

    Construct with :func:`build_discount_curve`; the implicit pillar
    ``(0, 1)`` is always present.
    """

    times: np.ndarray
    log_dfs: np.ndarray
    interpolation: str = "log_linear"

    def __call__(self, T):
        return discount(self, T)

    @property
    def pillars(self) -> list[tuple[float, float]]:
        return [(float(t), float(math.exp(l))) for t, l in zip(self.times, self.log_dfs)]


@dataclass(frozen=True, eq=False)
class SpreadCurve:
    """Deterministic Libor-OIS spread factor ``S(t) = exp(-int_0^t s)``."""

    times: np.ndarray
    log_factors: np.ndarray

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0.0):
            raise CurveError("spread factor queried at negative time")
        out = np.exp(_log_linear_eval(self.times, self.log_factors, t))
        return float(out) if out.ndim == 0 else out


def build_discount_curve(
    pillars: Sequence[tuple[float, float]],
    mode: Literal["rate", "df"] = "df",
) -> DiscountCurve:
    """Build a log-linear discount curve.

    Parameters
    ----------
    pillars : sequence of (maturity, value)
        Maturities in years, strictly increasing.
    mode : {"rate", "df"}
        ``"rate"`` reads values as continuously compounded zero rates,
        ``"df"`` as discount factors.
    """
    if len(pillars) == 0:
        raise CurveError("discount curve needs at least one pillar")
    arr = np.asarray(pillars, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise CurveError("pillars must be (maturity, value) pairs")
    times, values = arr[:, 0], arr[:, 1]
    if mode == "rate":
        if not np.all(np.isfinite(values)):
            raise CurveError("discount curve pillars must be finite")
        values = np.exp(-values * times)
    elif mode != "df":
        raise CurveError(f"unknown curve mode {mode!r}; expected 'rate' or 'df'")
    t, l = _log_linear_pillars(times, values, "discount")
    return DiscountCurve(times=t, log_dfs=l)


def flat_curve(rate: float, horizon: float = 60.0, step: float = 0.5) -> DiscountCurve:
    """Continuously compounded flat-rate curve with pillars every ``step`` years."""
    ts = np.arange(step, horizon + step / 2, step)
    return build_discount_curve(list(zip(ts, np.full_like(ts, rate))), mode="rate")


def build_spread_curve(pillars: Sequence[tuple[float, float]]) -> SpreadCurve:
    """Spread curve from ``(t, S(t))`` pillars, log-linear in ``S``."""
    arr = np.asarray(pillars, dtype=float).reshape(-1, 2) if len(pillars) else np.empty((0, 2))
    t, l = _log_linear_pillars(arr[:, 0], arr[:, 1], "spread")
    return SpreadCurve(times=t, log_factors=l)


def unit_spread() -> SpreadCurve:
    """``S(t) = 1`` everywhere (no Libor-OIS basis)."""
    return SpreadCurve(times=np.array([0.0]), log_factors=np.array([0.0]))


def flat_spread(s: float, horizon: float = 60.0) -> SpreadCurve:
    """``S(t) = exp(-s t)`` for a constant spread rate ``s``."""
    return build_spread_curve([(horizon, math.exp(-s * horizon))])


def discount(curve: DiscountCurve, T):
    """``B(0, T)``; accepts scalars or arrays, returns the same shape."""
    T_arr = np.asarray(T, dtype=float)
    if np.any(T_arr < 0.0):
        raise CurveError(f"discount queried at negative maturity {T!r}")
    out = np.exp(_log_linear_eval(curve.times, curve.log_dfs, T_arr))
    out = np.where(T_arr == 0.0, 1.0, out)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SwaptionSpec:
    """Terms of a European payer swaption on a spot-starting-at-expiry swap.

    ``strike=None`` means at-the-money under whichever convention prices it.
    """

    expiry: float
    tenor: float
    frequency: int = 2
    strike: float | None = None
    day_count_factor: float = DEFAULT_DAY_COUNT_FACTOR
    n_payments: int = field(init=False)

    def __post_init__(self):
        if not self.expiry > 0.0:
            raise ValueError(f"expiry must be > 0, got {self.expiry!r}")
        if not self.tenor > 0.0:
            raise ValueError(f"tenor must be > 0, got {self.tenor!r}")
        if int(self.frequency) != self.frequency or self.frequency < 1:
            raise ValueError(f"frequency must be a positive integer, got {self.frequency!r}")
        if not self.day_count_factor > 0.0:
            raise ValueError("day_count_factor must be > 0")
        n = self.tenor * self.frequency
        if abs(n - round(n)) > GRID_TOL or round(n) < 1:
            raise ValueError(
                f"tenor * frequency must be a positive integer, got {self.tenor} * {self.frequency}"
            )
        object.__setattr__(self, "n_payments", int(round(n)))

    @property
    def payment_times(self) -> np.ndarray:
        """``T_n = T + n / nu`` for ``n = 1..N``."""
        n = np.arange(1, self.n_payments + 1)
        return self.expiry + n / self.frequency

    @property
    def end(self) -> float:
        return self.expiry + self.tenor

    def with_strike(self, strike: float | None) -> "SwaptionSpec":
        return SwaptionSpec(self.expiry, self.tenor, self.frequency, strike, self.day_count_factor)


def annuity(curve: DiscountCurve, spec: SwaptionSpec) -> float:
    """Fixed-leg PV01 per unit rate: ``(1/nu) sum_n B(0, T_n)``."""
    return float(np.sum(discount(curve, spec.payment_times))) / spec.frequency


def swap_rate(curve: DiscountCurve, spec: SwaptionSpec) -> float:
    """Par rate ``(B(0,T) - B(0,T_N)) / annuity``."""
    a = annuity(curve, spec)
    if not a > 0.0:
        raise CurveError(f"annuity must be positive, got {a!r}")
    return (discount(curve, spec.expiry) - discount(curve, spec.end)) / a


def swap_value(curve: DiscountCurve, spec: SwaptionSpec, strike: float | None = None) -> float:
    """Today's value of the payer swap, float leg scaled by the day-count factor.

    With ``day_count_factor = 1`` this is ``B(0,T) - B(0,T_N) - r_X * annuity``.
    """
    r = spec.strike if strike is None else strike
    if r is None:
        raise ValueError("swap_value needs a strike")
    A = spec.day_count_factor
    return A * (discount(curve, spec.expiry) - discount(curve, spec.end)) - r * annuity(curve, spec)


def atm_strike_single(curve: DiscountCurve, spec: SwaptionSpec) -> float:
    """Strike zeroing :func:`swap_value`; equals the par rate when ``A = 1``."""
    return spec.day_count_factor * swap_rate(curve, spec)


def dual_float_leg(curve: DiscountCurve, spread: SpreadCurve, spec: SwaptionSpec) -> np.ndarray:
    """Per-period ``B(0,T_{n-1}) S(T_{n-1}) / S(T_n)`` terms, ``T_0 = T``."""
    ends = spec.payment_times
    starts = np.concatenate(([spec.expiry], ends[:-1]))
    s_start, s_end = np.asarray(spread(starts)), np.asarray(spread(ends))
    if np.any(s_start <= 0.0) or np.any(s_end <= 0.0):
        raise CurveError("spread factors must be positive at all payment dates")
    return discount(curve, starts) * s_start / s_end


def atm_strike_dual(curve: DiscountCurve, spread: SpreadCurve, spec: SwaptionSpec) -> float:
    """ATM strike with OIS discounting and a deterministic Libor-OIS spread.

    ``r_ATM = A nu sum_n (B(0,T_{n-1}) S(T_{n-1})/S(T_n) - B(0,T_n)) / sum_n B(0,T_n)``
    """
    dfs = discount(curve, spec.payment_times)
    denom = float(np.sum(dfs))
    if not denom > 0.0:
        raise CurveError("sum of payment discount factors must be positive")
    num = float(np.sum(dual_float_leg(curve, spread, spec) - dfs))
    return spec.day_count_factor * spec.frequency * num / denom

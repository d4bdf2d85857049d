"""Closed-form ATM swaption prices in the small-volatility limit.

To first order in the forward volatility, the discounted payer swap value at
expiry ``T`` is Gaussian with standard deviation ``Sigma(T, N) sqrt(T)``, where

    Sigma^2(T, N) = (1/T) int_0^T v(t, N)^2 dt

and ``v(t, N)`` is the volatility-weighted sensitivity of the swap legs to
the single Brownian driver. The at-the-money option value is then
``Sigma sqrt(T / 2 pi)``.

Two conventions are supported:

``single``
    One curve for projection and discounting,
    ``v = A (B_T I_T - B_N I_N) - (r_X/nu) sum_n B_n I_n``.
``dual``
    OIS discounting with a deterministic Libor-OIS spread factor ``S(t)``,
    ``v = (A + r_ATM/nu) sum_n B_n I_n - A sum_n B_{n-1} S_{n-1}/S_n I_{n-1}``.

``I_x`` denotes ``int_t^{T_x} sigma(t, tau) dtau``, evaluated as a left sum
on the surface grid. Calendar time is also summed from the left.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Literal

import numpy as np

from .curves import (
    DiscountCurve,
    SpreadCurve,
    SwaptionSpec,
    annuity,
    atm_strike_dual,
    atm_strike_single,
    discount,
    dual_float_leg,
    unit_spread,
)
from .surface import ForwardVolSurface, GridError

Convention = Literal["single", "dual"]
CONVENTIONS = ("single", "dual")


@dataclass(frozen=True)
class PriceResult:
    expiry: float
    tenor: float
    price: float
    sigma_total: float
    normal_iv: float
    annuity: float
    strike: float

    def to_record(self) -> dict:
        return asdict(self)


def _check_convention(convention: str) -> None:
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}, got {convention!r}")


def atm_strike(
    curve: DiscountCurve,
    spec: SwaptionSpec,
    spread: SpreadCurve | None = None,
    convention: Convention = "single",
) -> float:
    """ATM strike for the given convention."""
    _check_convention(convention)
    if convention == "single":
        return atm_strike_single(curve, spec)
    return atm_strike_dual(curve, spread if spread is not None else unit_spread(), spec)


def _indices(surface: ForwardVolSurface, spec: SwaptionSpec) -> tuple[int, np.ndarray]:
    k_T = surface.index(spec.expiry, "expiry")
    k_n = np.array([surface.index(t, "payment time") for t in spec.payment_times])
    if k_T == 0:
        raise GridError("expiry must be at least one grid step")
    return k_T, k_n


def _strike(curve, spec, spread, convention) -> float:
    return spec.strike if spec.strike is not None else atm_strike(curve, spec, spread, convention)


def v_profile(
    surface: ForwardVolSurface,
    curve: DiscountCurve,
    spec: SwaptionSpec,
    spread: SpreadCurve | None = None,
    convention: Convention = "single",
) -> np.ndarray:
    """``v(t_i, N)`` for every calendar step ``i = 0 .. T/dt - 1``."""
    _check_convention(convention)
    k_T, k_n = _indices(surface, spec)
    cum = surface.cumulative()[:k_T]
    A = spec.day_count_factor
    nu = spec.frequency
    r = _strike(curve, spec, spread, convention)
    b_n = discount(curve, spec.payment_times)
    i_n = cum[:, k_n]
    if convention == "single":
        return (
            A * (discount(curve, spec.expiry) * cum[:, k_T] - b_n[-1] * i_n[:, -1])
            - (r / nu) * (i_n @ b_n)
        )
    spread = spread if spread is not None else unit_spread()
    k_prev = np.concatenate(([k_T], k_n[:-1]))
    float_prev = dual_float_leg(curve, spread, spec)
    return (A + r / nu) * (i_n @ b_n) - A * (cum[:, k_prev] @ float_prev)


def v_single(surface, curve, spec, t_i: int) -> float:
    """Single-curve ``v(t_i, N)``; ``spec.strike=None`` means ATM."""
    return _v_at(surface, curve, spec, None, "single", t_i)


def v_dual(surface, curve, spread, spec, t_i: int) -> float:
    """Dual-curve ``v(t_i, N)`` at the dual ATM strike unless ``spec.strike`` is set."""
    return _v_at(surface, curve, spec, spread, "dual", t_i)


def _v_at(surface, curve, spec, spread, convention, t_i):
    k_T = surface.index(spec.expiry, "expiry")
    if not 0 <= t_i < k_T:
        raise GridError(f"calendar index {t_i} must lie in [0, {k_T})")
    return float(v_profile(surface, curve, spec, spread, convention)[t_i])


def cell_weights(
    surface: ForwardVolSurface,
    curve: DiscountCurve,
    spec: SwaptionSpec,
    spread: SpreadCurve | None = None,
    convention: Convention = "single",
) -> np.ndarray:
    """Weights ``w_j`` with ``v(t_i) = dt * sum_j vols[i, j] w_j``.

    ``w_j`` is the signed bond exposure to maturity cell ``j``. At the ATM
    strike it vanishes for every cell before expiry.
    """
    _check_convention(convention)
    k_T, k_n = _indices(surface, spec)
    M = surface.max_index
    cells = np.arange(M)
    A = spec.day_count_factor
    nu = spec.frequency
    r = _strike(curve, spec, spread, convention)
    b_n = discount(curve, spec.payment_times)
    # alive[n, j]: cell j lies before T_n
    alive = cells[None, :] < k_n[:, None]
    if convention == "single":
        w = A * discount(curve, spec.expiry) * (cells < k_T) - A * b_n[-1] * alive[-1]
        return w - (r / nu) * (b_n @ alive)
    spread = spread if spread is not None else unit_spread()
    k_prev = np.concatenate(([k_T], k_n[:-1]))
    alive_prev = cells[None, :] < k_prev[:, None]
    return (A + r / nu) * (b_n @ alive) - A * (dual_float_leg(curve, spread, spec) @ alive_prev)


def sigma_total(
    surface: ForwardVolSurface,
    curve: DiscountCurve,
    spec: SwaptionSpec,
    spread: SpreadCurve | None = None,
    convention: Convention = "single",
) -> float:
    """``Sigma(T, N) = sqrt((1/T) sum_i v(t_i)^2 dt)``."""
    v = v_profile(surface, curve, spec, spread, convention)
    return math.sqrt(float(v @ v) * surface.dt / spec.expiry)


def atm_price(
    surface: ForwardVolSurface,
    curve: DiscountCurve,
    spec: SwaptionSpec,
    spread: SpreadCurve | None = None,
    convention: Convention = "single",
) -> PriceResult:
    """ATM price ``Sigma sqrt(T / 2 pi)`` and its Bachelier normal vol ``Sigma / annuity``."""
    k = atm_strike(curve, spec, spread, convention)
    if spec.strike is not None and not math.isclose(spec.strike, k, rel_tol=1e-12, abs_tol=1e-14):
        raise ValueError(f"atm_price needs the ATM strike {k!r}, spec has {spec.strike!r}")
    spec = spec.with_strike(k)
    s = sigma_total(surface, curve, spec, spread, convention)
    a = annuity(curve, spec)
    return PriceResult(
        expiry=spec.expiry,
        tenor=spec.tenor,
        price=s * math.sqrt(spec.expiry / (2.0 * math.pi)),
        sigma_total=s,
        normal_iv=s / a,
        annuity=a,
        strike=k,
    )



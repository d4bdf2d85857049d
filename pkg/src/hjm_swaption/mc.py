"""Monte-Carlo HJM engine on the surface grid.

The forward curve ``f(t, t_j)`` lives on maturity cells ``[t_j, t_j + dt)``.
Each Euler step over ``[t_i, t_i + dt)`` accrues the short rate
``f(t_i, t_i)`` (left rectangle), drops that cell, and moves every remaining
cell ``j > i`` by ``alpha(t_i, t_j) dt + sigma(t_i, t_j) sqrt(dt) z``.

Drift schemes
-------------
``"exact"`` (default)
    ``alpha_ij = sigma_ij * (sum_{k=i+1}^{j-1} sigma_ik + sigma_ij / 2) dt``.
    This is the trapezoid form of ``sigma(t,T) int_t^T sigma(t,u) du`` over the
    cells that are still alive after the step, and it makes every discounted
    grid bond an exact martingale of the discretised model.
``"inclusive"``
    ``alpha_ij = sigma_ij * sum_{k=i}^{j} sigma_ik dt``; a left sum that keeps the
    expiring cell. Biased by ``O(sigma^2 dt)`` per step.
``"none"``
    Zero drift. Only useful as a negative control.

Random numbers come from numpy's PCG64 with ziggurat normals. Paths are split
into fixed-size blocks, each seeded from ``SeedSequence(seed).spawn``, so the
result does not depend on how many worker threads process the blocks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Literal

import numpy as np

from .curves import DiscountCurve, SpreadCurve, SwaptionSpec, annuity, discount, unit_spread
from .pricer import Convention, atm_strike
from .surface import ForwardVolSurface, GridError

DriftScheme = Literal["exact", "inclusive", "none"]
DRIFT_SCHEMES = ("exact", "inclusive", "none")
BLOCK_SIZE = 4096
RNG_NAME = "numpy.PCG64/ziggurat"


@dataclass(frozen=True)
class ForwardCurveState:
    """Forward curve after ``index`` steps.

    ``forwards[..., m]`` is ``f(t, t_{index + m})``; leading axes are paths.
    """

    index: int
    forwards: np.ndarray
    accumulated_discount: np.ndarray | float
    dt: float

    @property
    def t(self) -> float:
        return self.index * self.dt


@dataclass(frozen=True)
class McResult:
    expiry: float
    tenor: float
    price: float
    std_error: float
    n_paths: int
    normal_iv: float
    iv_std_error: float
    annuity: float
    strike: float
    seed: int
    antithetic: bool
    # mean of the first-order (Gaussian) payoff on the same paths; its
    # expectation is the closed-form price
    linear_price: float
    gap_std_error: float

    def to_record(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class MartingaleResult:
    t: float
    bond_maturity: float
    expected: float
    mean: float
    relative_error: float
    relative_std_error: float
    n_paths: int


def drift(surface: ForwardVolSurface, i: int, j: int, scheme: DriftScheme = "exact") -> float:
    """No-arbitrage drift ``alpha(t_i, t_j)`` of the forward for maturity cell ``j``."""
    if not 0 <= i <= j < surface.max_index:
        raise IndexError(f"need 0 <= i <= j < {surface.max_index}, got i={i}, j={j}")
    row = surface.vols[i]
    if scheme == "exact":
        return float(row[j] * (np.sum(row[i + 1 : j]) + 0.5 * row[j]) * surface.dt)
    if scheme == "inclusive":
        return float(row[j] * np.sum(row[i : j + 1]) * surface.dt)
    if scheme == "none":
        return 0.0
    raise ValueError(f"drift scheme must be one of {DRIFT_SCHEMES}, got {scheme!r}")


def drift_matrix(surface: ForwardVolSurface, scheme: DriftScheme = "exact") -> np.ndarray:
    """``alpha[i, j]`` for the whole grid, vectorised :func:`drift`."""
    v, dt = surface.vols, surface.dt
    if scheme == "none":
        return np.zeros_like(v)
    inclusive = np.cumsum(v, axis=1)  # sum_{k<=j}; lower triangle is zero
    if scheme == "inclusive":
        return np.triu(v * inclusive * dt)
    if scheme == "exact":
        below_j = inclusive - v - np.diag(v)[:, None]
        np.fill_diagonal(below_j, 0.0)
        return np.triu(v * (below_j + 0.5 * v) * dt)
    raise ValueError(f"drift scheme must be one of {DRIFT_SCHEMES}, got {scheme!r}")


def initial_forwards(curve: DiscountCurve, dt: float, n_cells: int) -> np.ndarray:
    """``f(0, t_j) = -(log B(0, t_{j+1}) - log B(0, t_j)) / dt``."""
    log_b = np.log(discount(curve, np.arange(n_cells + 1) * dt))
    return -np.diff(log_b) / dt


def initial_state(curve: DiscountCurve, surface: ForwardVolSurface, n_cells: int | None = None):
    n = surface.max_index if n_cells is None else n_cells
    return ForwardCurveState(0, initial_forwards(curve, surface.dt, n), 0.0, surface.dt)


def euler_step(
    state: ForwardCurveState,
    surface: ForwardVolSurface,
    z,
    drift_rates: np.ndarray | None = None,
) -> ForwardCurveState:
    """Advance one grid step with normal draw(s) ``z`` (scalar or one per path)."""
    i, dt = state.index, surface.dt
    f = np.asarray(state.forwards)
    width = f.shape[-1]
    if i + width > surface.max_index:
        raise GridError("forward curve extends beyond the surface")
    if drift_rates is None:
        drift_rates = drift_matrix(surface)
    sig = surface.vols[i, i + 1 : i + width]
    alpha = drift_rates[i, i + 1 : i + width]
    z = np.asarray(z, dtype=float)[..., None]
    new_f = f[..., 1:] + alpha * dt + sig * math.sqrt(dt) * z
    acc = state.accumulated_discount + f[..., 0] * dt
    return ForwardCurveState(i + 1, new_f, acc, dt)


def _payoff_weights(curve, spread, spec, strike, convention, k_T, k_end):
    """Bond weights ``c[k]`` on grid maturities ``k_T..k_end`` so the swap value is
    ``sum_k c[k] B(T, t_k)``."""
    dt = spec.expiry / k_T
    k_n = np.array([round(t / dt) for t in spec.payment_times]) - k_T
    c = np.zeros(k_end - k_T + 1)
    A, nu = spec.day_count_factor, spec.frequency
    if convention == "single":
        c[0] += A
        c[k_n[-1]] -= A
        c[k_n] -= strike / nu
        return c
    spread = spread if spread is not None else unit_spread()
    ends = spec.payment_times
    starts = np.concatenate(([spec.expiry], ends[:-1]))
    ratio = np.asarray(spread(starts)) / np.asarray(spread(ends))
    k_prev = np.concatenate(([0], k_n[:-1]))
    np.add.at(c, k_prev, A * ratio)
    c[k_n] -= A + strike / nu
    return c


def _simulate_block(
    surface, alpha, f0, k_T, weights, b0, n, seed_seq, antithetic, linear_payoffs
):
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    half = n // 2 if antithetic else n
    z = rng.standard_normal((k_T, half))
    if antithetic:
        z = np.concatenate([z, -z], axis=1)
    state = ForwardCurveState(0, np.broadcast_to(f0, (n, f0.size)), np.zeros(n), surface.dt)
    # shock-only copy of the curve for the first-order payoff
    lin = ForwardCurveState(0, np.zeros((n, f0.size)), np.zeros(n), surface.dt)
    zero_drift = np.zeros_like(alpha)
    for i in range(k_T):
        state = euler_step(state, surface, z[i], alpha)
        if linear_payoffs:
            lin = euler_step(lin, surface, z[i], zero_drift)
    dt = surface.dt
    # log B(T, t_k) for k = k_T..k_end, relative to t_T
    log_bonds = np.zeros((n, weights.size))
    np.cumsum(-state.forwards[:, : weights.size - 1] * dt, axis=1, out=log_bonds[:, 1:])
    disc = np.exp(-state.accumulated_discount)
    value = disc * (np.exp(log_bonds) @ weights)
    payoff = np.maximum(value, 0.0)
    if not linear_payoffs:
        return payoff, None
    x_lin = lin.accumulated_discount[:, None] + np.concatenate(
        [np.zeros((n, 1)), np.cumsum(lin.forwards[:, : weights.size - 1] * dt, axis=1)], axis=1
    )
    lin_value = weights @ b0 - x_lin @ (weights * b0)
    return payoff, np.maximum(lin_value, 0.0)


def _block_sizes(n_paths: int, antithetic: bool) -> list[int]:
    sizes = [BLOCK_SIZE] * (n_paths // BLOCK_SIZE)
    if n_paths % BLOCK_SIZE:
        sizes.append(n_paths % BLOCK_SIZE)
    if antithetic and any(s % 2 for s in sizes):
        raise ValueError("antithetic sampling needs an even number of paths")
    return sizes


def _run_blocks(fn, n_paths, seed, antithetic, workers):
    sizes = _block_sizes(n_paths, antithetic)
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = list(zip(sizes, seqs))
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda a: fn(*a), jobs))
    return [fn(*a) for a in jobs]


def _pairs(blocks: list[np.ndarray]) -> np.ndarray:
    return np.concatenate([b.reshape(2, -1).mean(axis=0) for b in blocks])


def simulate_payoffs(
    surface: ForwardVolSurface,
    curve: DiscountCurve,
    spec: SwaptionSpec,
    spread: SpreadCurve | None = None,
    convention: Convention = "single",
    n_paths: int = 10_000,
    seed: int = 0,
    antithetic: bool = False,
    drift_scheme: DriftScheme = "exact",
    workers: int | None = None,
    linear_payoffs: bool = False,
):
    """Pathwise discounted payoffs ``exp(-int r) max(swap value at T, 0)``.

    Returns ``(payoffs, linear_payoffs_or_None, strike)`` as lists of per-block
    arrays in block order.
    """
    if n_paths < 2:
        raise ValueError("n_paths must be at least 2")
    dt = surface.dt
    k_T = surface.index(spec.expiry, "expiry")
    k_end = surface.index(spec.end, "swap end")
    for t in spec.payment_times:
        surface.index(t, "payment time")
    if k_T == 0:
        raise GridError("expiry must be at least one grid step")
    strike = spec.strike if spec.strike is not None else atm_strike(curve, spec, spread, convention)
    weights = _payoff_weights(curve, spread, spec, strike, convention, k_T, k_end)
    b0 = discount(curve, np.arange(k_T, k_end + 1) * dt)
    f0 = initial_forwards(curve, dt, k_end)
    alpha = drift_matrix(surface, drift_scheme)

    def block(n, seq):
        return _simulate_block(surface, alpha, f0, k_T, weights, b0, n, seq, antithetic, linear_payoffs)

    out = _run_blocks(block, n_paths, seed, antithetic, workers)
    return [p for p, _ in out], ([l for _, l in out] if linear_payoffs else None), strike


def price_swaption_mc(
    surface: ForwardVolSurface,
    curve: DiscountCurve,
    spec: SwaptionSpec,
    spread: SpreadCurve | None = None,
    convention: Convention = "single",
    n_paths: int = 10_000,
    seed: int = 0,
    antithetic: bool = False,
    drift_scheme: DriftScheme = "exact",
    workers: int | None = None,
) -> McResult:
    """Monte-Carlo price of the ATM (or ``spec.strike``) payer swaption.

    ``linear_price`` is the same-path mean of the first-order payoff, whose
    exact expectation is the closed-form price; ``price - linear_price`` is a
    low-noise estimate of the closed-form error.
    """
    payoffs, linear, strike = simulate_payoffs(
        surface, curve, spec, spread, convention, n_paths, seed, antithetic,
        drift_scheme, workers, linear_payoffs=True,
    )
    if antithetic:
        p, l = _pairs(payoffs), _pairs(linear)
    else:
        p, l = np.concatenate(payoffs), np.concatenate(linear)
    price, se = float(np.mean(p)), float(np.std(p, ddof=1) / math.sqrt(p.size))
    diff = p - l
    gap_se = float(np.std(diff, ddof=1) / math.sqrt(diff.size))
    a = annuity(curve, spec)
    scale = a * math.sqrt(spec.expiry / (2.0 * math.pi))
    return McResult(
        expiry=spec.expiry,
        tenor=spec.tenor,
        price=price,
        std_error=se,
        n_paths=n_paths,
        normal_iv=price / scale,
        iv_std_error=se / scale,
        annuity=a,
        strike=strike,
        seed=seed,
        antithetic=antithetic,
        linear_price=float(np.mean(l)),
        gap_std_error=gap_se,
    )


def martingale_check(
    surface: ForwardVolSurface,
    curve: DiscountCurve,
    t: float,
    bond_maturity: float,
    n_paths: int = 10_000,
    seed: int = 0,
    drift_scheme: DriftScheme = "exact",
    antithetic: bool = False,
) -> MartingaleResult:
    """Compare ``mean(exp(-int_0^t r) B(t, T))`` with ``B(0, T)``."""
    if n_paths < 2:
        raise ValueError("n_paths must be at least 2")
    dt = surface.dt
    k_t = surface.index(t, "checkpoint")
    k_b = surface.index(bond_maturity, "bond maturity")
    if k_b < k_t:
        raise GridError("bond must mature at or after the checkpoint")
    f0 = initial_forwards(curve, dt, k_b)
    alpha = drift_matrix(surface, drift_scheme)

    def block(n, seq):
        rng = np.random.Generator(np.random.PCG64(seq))
        half = n // 2 if antithetic else n
        z = rng.standard_normal((k_t, half))
        if antithetic:
            z = np.concatenate([z, -z], axis=1)
        state = ForwardCurveState(0, np.broadcast_to(f0, (n, f0.size)), np.zeros(n), dt)
        for i in range(k_t):
            state = euler_step(state, surface, z[i], alpha)
        return np.exp(-state.accumulated_discount - state.forwards.sum(axis=1) * dt)

    blocks = _run_blocks(block, n_paths, seed, antithetic, None)
    x = _pairs(blocks) if antithetic else np.concatenate(blocks)
    expected = discount(curve, bond_maturity)
    mean = float(np.mean(x))
    se = float(np.std(x, ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
    return MartingaleResult(
        t=t,
        bond_maturity=bond_maturity,
        expected=expected,
        mean=mean,
        relative_error=abs(mean - expected) / expected,
        relative_std_error=se / expected,
        n_paths=n_paths,
    )

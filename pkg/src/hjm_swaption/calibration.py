"""Nonparametric bootstrap of the forward-volatility surface from ATM quotes.

Quoted expiries ``T_1 < T_2 < ...`` split calendar time into buckets
``[T_{e-1}, T_e)``; inside a bucket the volatility profile does not depend on
calendar time. Walking expiries in order and tenors in order, every quote
pins one new maturity segment ``[T_e + m_{k-1}, T_e + m_k)`` of the current
bucket. Because ``v(t, N)`` is linear in the segment value ``x``, matching the
quote's total variance is a quadratic in ``x``; the smallest nonnegative root
is taken. A quote with no nonnegative root cannot be reproduced by any
nonnegative volatility given the earlier expiries, which is reported as an
:class:`ArbitrageFlag`.

Missing tenors at a quoted expiry are filled with a natural cubic spline in
tenor (flat beyond the quoted range). Cells no quote reaches stay at zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Literal, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .curves import DEFAULT_DAY_COUNT_FACTOR, DiscountCurve, SpreadCurve, SwaptionSpec, annuity
from .pricer import Convention, atm_price, cell_weights
from .surface import ForwardVolSurface, GridError, grid_index

DEFAULT_TENORS = (1.0, 2.0, 3.0, 5.0, 7.0, 10.0, 15.0, 20.0, 25.0, 30.0)

FlagKind = Literal["negative-step-variance", "no-real-root"]


@dataclass(frozen=True)
class SwaptionQuote:
    """Market ATM normal vol (absolute rate units per sqrt year)."""

    expiry: float
    tenor: float
    normal_iv: float
    weight: float = 1.0
    excluded: bool = False
    filled: bool = False

    def __post_init__(self):
        if not (self.expiry > 0 and self.tenor > 0):
            raise ValueError(f"quote expiry and tenor must be positive: {self}")
        if not (self.normal_iv >= 0 and math.isfinite(self.normal_iv)):
            raise ValueError(f"quote normal_iv must be finite and >= 0: {self}")

    @property
    def key(self) -> tuple[float, float]:
        return (self.expiry, self.tenor)


@dataclass(frozen=True)
class ArbitrageFlag:
    """A quote no nonnegative segment volatility can reproduce.

    ``a, b, c`` are the coefficients of ``V(x) - V_mkt`` for the segment value
    ``x``, with the segment occupying calendar rows ``rows`` and maturity
    cells ``cols`` (half-open index ranges). ``detail`` is the discriminant
    for ``no-real-root`` and the excess variance ``V(0) - V_mkt`` otherwise.
    """

    expiry: float
    tenor: float
    kind: FlagKind
    detail: float
    a: float
    b: float
    c: float
    rows: tuple[int, int]
    cols: tuple[int, int]
    filled: bool = False
    suggested_exclusions: tuple[float, ...] = ()

    def to_record(self) -> dict:
        return {
            "expiry": self.expiry,
            "tenor": self.tenor,
            "kind": self.kind,
            "detail": self.detail,
            "quadratic": [self.a, self.b, self.c],
            "rows": list(self.rows),
            "cols": list(self.cols),
            "filled": self.filled,
            "suggested_exclusions": list(self.suggested_exclusions),
        }


@dataclass(frozen=True)
class Residual:
    expiry: float
    tenor: float
    market_iv: float
    model_iv: float
    filled: bool = False
    binding: bool = True

    @property
    def diff(self) -> float:
        return self.model_iv - self.market_iv

    @property
    def relative_diff(self) -> float:
        if self.market_iv == 0.0:
            return abs(self.diff)
        return abs(self.diff) / self.market_iv

    def to_record(self) -> dict:
        return {
            "expiry": self.expiry,
            "tenor": self.tenor,
            "market_iv": self.market_iv,
            "model_iv": self.model_iv,
            "diff": self.diff,
            "filled": self.filled,
            "binding": self.binding,
        }


@dataclass(frozen=True)
class CalibrationConfig:
    dt: float = 0.5
    frequency: int = 2
    day_count_factor: float = DEFAULT_DAY_COUNT_FACTOR
    # None: fill every expiry up to the union of quoted tenors
    target_tenors: tuple[float, ...] | None = DEFAULT_TENORS
    fit_tolerance: float = 1e-8

    def spec(self, expiry: float, tenor: float) -> SwaptionSpec:
        return SwaptionSpec(expiry, tenor, self.frequency, None, self.day_count_factor)


@dataclass
class CalibrationReport:
    surface: ForwardVolSurface
    residuals: list[Residual]
    flags: list[ArbitrageFlag]
    filled_quotes: list[SwaptionQuote]
    quotes: list[SwaptionQuote] = field(default_factory=list)

    @property
    def max_relative_residual(self) -> float:
        """Largest relative IV miss over binding (non-flagged) quotes."""
        return max((r.relative_diff for r in self.residuals if r.binding), default=0.0)

    @property
    def flagged_keys(self) -> set[tuple[float, float]]:
        return {(f.expiry, f.tenor) for f in self.flags}


def tenor_fill(
    quotes: Iterable[SwaptionQuote],
    expiry: float,
    target_tenors: Sequence[float],
) -> list[SwaptionQuote]:
    """Synthetic quotes for target tenors missing at ``expiry``.

    Natural cubic spline in tenor through the quoted points; two points give
    the straight line and one point a constant. Flat outside the quoted range.
    """
    at = sorted((q for q in quotes if q.expiry == expiry and not q.excluded), key=lambda q: q.tenor)
    if not at:
        raise ValueError(f"no quotes at expiry {expiry!r}")
    x = np.array([q.tenor for q in at])
    y = np.array([q.normal_iv for q in at])
    missing = [t for t in target_tenors if not np.any(np.isclose(x, t, rtol=0, atol=1e-9))]
    if not missing:
        return []
    if x.size == 1:
        values = np.full(len(missing), y[0])
    else:
        spline = CubicSpline(x, y, bc_type="natural")
        values = spline(np.clip(missing, x[0], x[-1]))
    return [
        SwaptionQuote(expiry, float(t), float(max(v, 0.0)), filled=True)
        for t, v in zip(missing, values)
    ]


def _validate(quotes: Sequence[SwaptionQuote], config: CalibrationConfig) -> None:
    seen = set()
    for q in quotes:
        if q.key in seen:
            raise ValueError(f"duplicate quote for expiry={q.expiry}, tenor={q.tenor}")
        seen.add(q.key)
        grid_index(q.expiry, config.dt, "expiry")
        grid_index(q.expiry + q.tenor, config.dt, "expiry + tenor")
        for t in config.spec(q.expiry, q.tenor).payment_times:
            grid_index(t, config.dt, "payment time")


def _with_fills(quotes, config):
    live = [q for q in quotes if not q.excluded]
    expiries = sorted({q.expiry for q in live})
    if config.target_tenors is None:
        targets = sorted({q.tenor for q in live})
    else:
        targets = list(config.target_tenors)
    filled = []
    for e in expiries:
        filled.extend(tenor_fill(live, e, targets))
    return live + filled, filled


def _max_index(quotes, dt) -> int:
    return max(grid_index(q.expiry + q.tenor, dt) for q in quotes)


def segment_quadratic(
    vols: np.ndarray,
    dt: float,
    weights: np.ndarray,
    k_T: int,
    rows: tuple[int, int],
    cols: tuple[int, int],
    target_variance: float,
) -> tuple[float, float, float]:
    """Coefficients of ``V(x) - target`` where ``x`` fills ``vols[rows, cols]``.

    ``V = dt * sum_{i < k_T} v_i^2`` with ``v_i = dt * vols[i] @ weights``.
    """
    base = np.array(vols[:k_T], dtype=float)
    base[rows[0] : rows[1], cols[0] : cols[1]] = 0.0
    v0 = dt * (base @ weights)
    g = np.zeros(k_T)
    g[rows[0] : rows[1]] = dt * np.sum(weights[cols[0] : cols[1]])
    a = dt * float(g @ g)
    b = 2.0 * dt * float(v0 @ g)
    c = dt * float(v0 @ v0) - target_variance
    return a, b, c


def _smallest_nonnegative_root(a: float, b: float, c: float):
    """Return ``(x, kind, detail)``; ``kind`` is None when a root exists."""
    if a <= 0.0:
        if b > 0.0 and c <= 0.0:
            return -c / b, None, 0.0
        if c == 0.0:
            return 0.0, None, 0.0
        return 0.0, "negative-step-variance", c
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return max(0.0, -b / (2.0 * a)), "no-real-root", disc
    q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
    roots = sorted([q / a, c / q] if q != 0.0 else [0.0, 0.0])
    for r in roots:
        if r >= 0.0:
            return r, None, disc
    return 0.0, "negative-step-variance", c


def bootstrap_surface(
    quotes: Sequence[SwaptionQuote],
    curve: DiscountCurve,
    spread: SpreadCurve | None = None,
    convention: Convention = "single",
    config: CalibrationConfig | None = None,
) -> CalibrationReport:
    """Fit the forward-vol surface quote by quote; see the module docstring."""
    config = config or CalibrationConfig()
    dt = config.dt
    _validate([q for q in quotes if not q.excluded], config)
    all_quotes, filled = _with_fills(list(quotes), config)
    if not all_quotes:
        raise ValueError("no quotes to calibrate")
    _validate(all_quotes, config)
    M = _max_index(all_quotes, dt)
    shape_surface = ForwardVolSurface.zeros(M, dt)
    vols = np.zeros((M, M))
    flags: list[ArbitrageFlag] = []
    prev_k = 0
    for expiry in sorted({q.expiry for q in all_quotes}):
        k_T = grid_index(expiry, dt)
        rows = (prev_k, k_T)
        seg_start = k_T
        first = True
        for q in sorted((q for q in all_quotes if q.expiry == expiry), key=lambda q: q.tenor):
            spec = config.spec(expiry, q.tenor)
            k_end = grid_index(expiry + q.tenor, dt)
            w = cell_weights(shape_surface, curve, spec, spread, convention)
            target = (annuity(curve, spec) * q.normal_iv) ** 2 * expiry
            cols = (seg_start, k_end)
            a, b, c = segment_quadratic(vols, dt, w, k_T, rows, cols, target)
            x, kind, detail = _smallest_nonnegative_root(a, b, c)
            if kind is not None:
                flags.append(
                    ArbitrageFlag(expiry, q.tenor, kind, detail, a, b, c, rows, cols, q.filled)
                )
            vols[rows[0] : rows[1], cols[0] : cols[1]] = x
            if first:
                for i in range(*rows):
                    vols[i, i:k_T] = x
                first = False
            seg_start = k_end
        prev_k = k_T
    surface = ForwardVolSurface(vols, dt)
    flagged = {(f.expiry, f.tenor) for f in flags}
    residuals = reprice_quotes(surface, all_quotes, curve, spread, convention, config, flagged)
    return CalibrationReport(surface, residuals, flags, filled, all_quotes)


def reprice_quotes(
    surface: ForwardVolSurface,
    quotes: Sequence[SwaptionQuote],
    curve: DiscountCurve,
    spread: SpreadCurve | None = None,
    convention: Convention = "single",
    config: CalibrationConfig | None = None,
    flagged: set | None = None,
) -> list[Residual]:
    """Model normal vol for every quote via the closed-form pricer."""
    config = config or CalibrationConfig(dt=surface.dt)
    flagged = flagged or set()
    out = []
    for q in quotes:
        res = atm_price(surface, curve, config.spec(q.expiry, q.tenor), spread, convention)
        out.append(
            Residual(q.expiry, q.tenor, q.normal_iv, res.normal_iv, q.filled, q.key not in flagged)
        )
    return out


def _exclude_expiry(quotes, expiry):
    return [replace(q, excluded=True) if q.expiry == expiry else q for q in quotes]


def suggest_exclusions(
    report: CalibrationReport,
    quotes: Sequence[SwaptionQuote],
    curve: DiscountCurve,
    spread: SpreadCurve | None = None,
    convention: Convention = "single",
    config: CalibrationConfig | None = None,
) -> list[ArbitrageFlag]:
    """Attach to each flag the neighbouring quoted expiries whose removal clears it."""
    config = config or CalibrationConfig()
    expiries = sorted({q.expiry for q in quotes if not q.excluded})
    retries: dict[float, set] = {}
    out = []
    for f in report.flags:
        pos = expiries.index(f.expiry)
        neighbours = [expiries[p] for p in (pos - 1, pos + 1) if 0 <= p < len(expiries)]
        cleared = []
        for e in neighbours:
            if e not in retries:
                rerun = bootstrap_surface(_exclude_expiry(quotes, e), curve, spread, convention, config)
                retries[e] = rerun.flagged_keys
            if (f.expiry, f.tenor) not in retries[e]:
                cleared.append(e)
        out.append(replace(f, suggested_exclusions=tuple(cleared)))
    return out


def arb_scan(
    quotes: Sequence[SwaptionQuote],
    curve: DiscountCurve,
    spread: SpreadCurve | None = None,
    convention: Convention = "single",
    config: CalibrationConfig | None = None,
) -> list[ArbitrageFlag]:
    """Flags from a full bootstrap, each with its suggested exclusions."""
    report = bootstrap_surface(quotes, curve, spread, convention, config)
    return suggest_exclusions(report, quotes, curve, spread, convention, config)


def quotes_from_surface(
    surface: ForwardVolSurface,
    curve: DiscountCurve,
    expiries: Iterable[float],
    tenors: Iterable[float],
    spread: SpreadCurve | None = None,
    convention: Convention = "single",
    config: CalibrationConfig | None = None,
) -> list[SwaptionQuote]:
    """ATM normal vols implied by ``surface`` on an expiry x tenor grid."""
    config = config or CalibrationConfig(dt=surface.dt)
    tenors = list(tenors)
    out = []
    for e in expiries:
        for m in tenors:
            res = atm_price(surface, curve, config.spec(e, m), spread, convention)
            out.append(SwaptionQuote(float(e), float(m), res.normal_iv))
    return out

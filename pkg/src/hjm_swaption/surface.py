"""Piecewise-constant one-factor forward volatility surface ``sigma(t, tau)``.

Cell ``(i, j)`` holds the volatility of the forward rate for maturities in
``[j dt, (j+1) dt)`` over calendar time ``[i dt, (i+1) dt)``. Only cells with
``j >= i`` are meaningful; the strict lower triangle is kept at zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import GRID_TOL


class GridError(ValueError):
    """A time does not fall on the surface's ``dt`` grid, or is out of range."""


def grid_index(t: float, dt: float, what: str = "time") -> int:
    """Integer ``k`` with ``k * dt == t`` (to 1e-9 years), else :class:`GridError`."""
    k = round(t / dt)
    if abs(k * dt - t) > GRID_TOL:
        raise GridError(f"{what} {float(t)!r} is not a multiple of dt={dt!r}")
    return int(k)


@dataclass(frozen=True, eq=False)
class ForwardVolSurface:
    """Upper-triangular grid ``vols[i, j]`` of forward volatilities."""

    vols: np.ndarray
    dt: float = 0.5

    def __post_init__(self):
        v = np.array(self.vols, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"vols must be a square matrix, got shape {v.shape}")
        if not self.dt > 0.0:
            raise ValueError("dt must be positive")
        if not np.all(np.isfinite(v)):
            raise ValueError("vols must be finite")
        v = np.triu(v)
        v.setflags(write=False)
        object.__setattr__(self, "vols", v)

    @property
    def max_index(self) -> int:
        return self.vols.shape[0]

    @property
    def horizon(self) -> float:
        return self.max_index * self.dt

    @classmethod
    def zeros(cls, max_index: int, dt: float = 0.5) -> "ForwardVolSurface":
        return cls(np.zeros((max_index, max_index)), dt)

    @classmethod
    def flat(cls, sigma: float, max_index: int, dt: float = 0.5) -> "ForwardVolSurface":
        return cls(np.full((max_index, max_index), float(sigma)), dt)

    @classmethod
    def from_function(cls, fn, max_index: int, dt: float = 0.5) -> "ForwardVolSurface":
        """Sample ``fn(t, tau)`` at the lower-left corner of every cell."""
        t = np.arange(max_index) * dt
        return cls(fn(t[:, None], t[None, :]) * np.ones((max_index, max_index)), dt)

    def scaled(self, factor: float) -> "ForwardVolSurface":
        return ForwardVolSurface(self.vols * factor, self.dt)

    def refined(self, factor: int) -> "ForwardVolSurface":
        """Same piecewise-constant surface on a grid ``factor`` times finer."""
        v = np.kron(self.vols, np.ones((factor, factor)))
        return ForwardVolSurface(v, self.dt / factor)

    def cumulative(self) -> np.ndarray:
        """``C[i, j] = sum_{k < j} vols[i, k] * dt``, shape ``(M, M + 1)``."""
        c = np.zeros((self.max_index, self.max_index + 1))
        np.cumsum(self.vols * self.dt, axis=1, out=c[:, 1:])
        return c

    def index(self, t: float, what: str = "time") -> int:
        k = grid_index(t, self.dt, what)
        if k > self.max_index:
            raise GridError(f"{what} {float(t)!r} lies beyond the surface horizon {self.horizon!r}")
        return k


def int_sigma(surface: ForwardVolSurface, i: int, j_end: int) -> float:
    """``int_{t_i}^{t_{j_end}} sigma(t_i, tau) dtau`` as a left sum over cells."""
    if not (0 <= i <= j_end <= surface.max_index):
        raise IndexError(f"need 0 <= i <= j_end <= {surface.max_index}, got i={i}, j_end={j_end}")
    return float(np.sum(surface.vols[i, i:j_end]) * surface.dt)

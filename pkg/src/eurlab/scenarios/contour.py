"""Bound landscape over the two null probabilities."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ..bounds import BoundInput, eur_modified

HEADER = ("p_z_null", "p_x_null", "raw_bound_bits", "clamped_bound_bits")


@dataclass(frozen=True)
class ContourResult:
    c_less: float
    h_max: float
    grid: np.ndarray
    rows: list
    equal_null_crossing: float
    frontier_p_z: float
    frontier_p_x: float

    def summary(self) -> dict:
        return {
            "c_less": self.c_less,
            "h_max_bits": self.h_max,
            "grid_n": int(self.grid.size),
            "equal_null_crossing": self.equal_null_crossing,
            "frontier_p_z_null": self.frontier_p_z,
            "frontier_p_x_null": self.frontier_p_x,
        }


def _raw(pz, px, c, h):
    return eur_modified(BoundInput(pz, px, c, h)).raw_bound


def _zero_crossing(fn) -> float:
    """Largest argument in [0, 1] where a decreasing-then-negative curve hits 0."""
    if fn(0.0) <= 0:
        return 0.0
    if fn(1.0) > 0:
        return 1.0
    return brentq(fn, 0.0, 1.0, xtol=1e-15, rtol=1e-15)


def equal_null_crossing(c_less: float, h_max: float) -> float:
    return _zero_crossing(lambda p: _raw(p, p, c_less, h_max))


def px_frontier(p_z: float, c_less: float, h_max: float) -> float:
    """Largest ``p_X`` keeping the bound positive at fixed ``p_Z``.

    The raw bound first decreases in ``p_X`` and turns back up only after it
    is already negative, so the first root is the frontier.
    """
    xs = np.linspace(0.0, 1.0, 4097)
    vals = np.array([_raw(p_z, x, c_less, h_max) for x in xs])
    if vals[0] <= 0:
        return 0.0
    neg = np.nonzero(vals <= 0)[0]
    if not neg.size:
        return 1.0
    k = neg[0]
    return brentq(lambda x: _raw(p_z, x, c_less, h_max), xs[k - 1], xs[k], xtol=1e-15, rtol=1e-15)


def fig2_contour(c_less: float = 1e-3, h_max: float = 1.0, grid_n: int = 101, frontier_p_z: float = 1e-3) -> ContourResult:
    if grid_n < 2:
        raise ValueError("grid_n must be at least 2")
    grid = np.linspace(0.0, 1.0, grid_n)
    rows = []
    for pz in grid:
        for px in grid:
            r = eur_modified(BoundInput(float(pz), float(px), c_less, h_max))
            rows.append((float(pz), float(px), r.raw_bound, r.clamped_bound))
    return ContourResult(
        c_less,
        h_max,
        grid,
        rows,
        equal_null_crossing(c_less, h_max),
        frontier_p_z,
        px_frontier(frontier_p_z, c_less, h_max),
    )

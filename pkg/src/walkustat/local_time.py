"""Rescaled local time of one-dimensional recurrent walks.

For a walk with stable index alpha in (1, 2], the occupation counts at
scale n define the local-time estimator

    L_hat(k * dx) = n^(1/alpha - 1) * N_{floor(n t)}(k),   dx = n^(-1/alpha),

a step function on bins [k*dx, (k+1)*dx). Integer visit counts are kept
alongside the float values so total mass is an exact identity:
sum_k L_hat(k) * dx == floor(n*t)/n (one float division, no accumulation).

limit_functional evaluates the double integral of L(x)*L(y) against a
sheet realization on the same grid resolution, which is the limit object
of the scaled U statistics in this regime.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, RegimeError
from .sheet import SheetGrid, integrate_continuous
from .stable import StableLawParams, TailConstants
from .walks import OccupationField, Regime, regime_of


@dataclass(frozen=True)
class LocalTimeField:
    """Binned local-time estimator of one walk at one checkpoint.

    bin_indices are the sorted integer bins k with at least one visit;
    counts are the raw visit counts; values = n^(1/alpha-1) * counts.
    """

    alpha: float
    n: int
    t: float
    steps: int
    bin_indices: np.ndarray
    counts: np.ndarray
    values: np.ndarray

    @property
    def delta_x(self) -> float:
        return float(self.n) ** (-1.0 / self.alpha)

    @property
    def support_radius(self) -> float:
        if self.bin_indices.size == 0:
            return 0.0
        lo = int(self.bin_indices[0])
        hi = int(self.bin_indices[-1])
        return max(abs(lo), abs(hi + 1)) * self.delta_x

    def total_mass(self) -> float:
        """Exact: integer visit total over n; equals floor(n*t)/n."""
        return int(self.counts.sum()) / self.n


def estimate_local_time(field: OccupationField, t: float | None = None) -> LocalTimeField:
    """Bin the occupation counts of a local-time-regime walk at checkpoint t.

    t must be one of the field's checkpoint times (defaults to the last).
    """
    if regime_of(field.model) is not Regime.RECURRENT_LOCAL_TIME:
        raise RegimeError(
            "local time requires a recurrent walk with alpha > dimension (d0 = 1)"
        )
    if t is None:
        idx = len(field.time_grid) - 1
    else:
        matches = [i for i, tg in enumerate(field.time_grid) if tg == float(t)]
        if not matches:
            raise ParameterError(
                f"t={t!r} is not a checkpoint; available: {field.time_grid}"
            )
        idx = matches[0]
    alpha = field.model.alpha
    counts = field.checkpoint_counts[idx]
    occupied = counts > 0
    bins = field.sites[occupied]
    cnt = counts[occupied].astype(np.int64)
    values = float(field.n) ** (1.0 / alpha - 1.0) * cnt.astype(np.float64)
    return LocalTimeField(
        float(alpha),
        int(field.n),
        float(field.time_grid[idx]),
        int(field.checkpoint_steps[idx]),
        bins,
        cnt,
        values,
    )


def f_functional(ltf: LocalTimeField, b: float) -> float:
    """Signed area of the local-time step function between 0 and b.

    F(b) = integral_0^b L_hat(x) dx for b >= 0, minus integral_b^0 for
    b < 0; b may be +/-inf. F is the rescaled time the walk spends at
    sites between 0 and b*n^(1/alpha).
    """
    if math.isnan(b):
        raise ParameterError("b must not be NaN")
    if b == 0.0 or ltf.bin_indices.size == 0:
        return 0.0
    dx = ltf.delta_x
    lo_edges = ltf.bin_indices * dx
    hi_edges = (ltf.bin_indices + 1) * dx
    if b > 0:
        overlap = np.minimum(hi_edges, b) - np.maximum(lo_edges, 0.0)
        np.clip(overlap, 0.0, None, out=overlap)
        return float(np.sum(ltf.values * overlap))
    overlap = np.minimum(hi_edges, 0.0) - np.maximum(lo_edges, b)
    np.clip(overlap, 0.0, None, out=overlap)
    return -float(np.sum(ltf.values * overlap))


def required_extent(ltf: LocalTimeField, cell_size: float | None = None) -> int:
    """Smallest sheet extent (in cells) covering the local-time support."""
    tau = ltf.delta_x if cell_size is None else float(cell_size)
    if tau <= 0:
        raise ParameterError("cell_size must be positive")
    return max(1, int(math.ceil(ltf.support_radius / tau - 1e-12)))


def limit_functional(ltf: LocalTimeField, grid: SheetGrid) -> float:
    """Double integral of L_hat(x) * L_hat(y) against the sheet.

    The grid must use cell_size == ltf.delta_x (bit-equal: both sides
    should be computed as n**(-1/alpha)) so bins and cells coincide, and
    must cover the local-time support.
    """
    if grid.cell_size != ltf.delta_x:
        raise ParameterError(
            "sheet cell_size must equal the local-time bin width n**(-1/alpha)"
        )
    if ltf.bin_indices.size == 0:
        return 0.0
    lo = int(ltf.bin_indices[0])
    hi = int(ltf.bin_indices[-1])
    dense = np.zeros(hi - lo + 1, dtype=np.float64)
    dense[ltf.bin_indices - lo] = ltf.values
    dx = ltf.delta_x

    def lookup(z):
        k = np.floor(np.asarray(z, dtype=float) / dx).astype(np.int64)
        inside = (k >= lo) & (k <= hi)
        idx = np.clip(k - lo, 0, dense.size - 1)
        return np.where(inside, dense[idx], 0.0)

    return integrate_continuous(
        grid, lambda x, y: lookup(x) * lookup(y), ltf.support_radius
    )


def limit_cf_params(ltf: LocalTimeField, tail: TailConstants) -> StableLawParams:
    """Conditional law of the limit functional given this local time.

    L_hat >= 0 makes the double integral of |L(x)L(y)|^beta factorize into
    (integral L^beta dx)^2, so A = (c0+c1)*s^2 and B = (c0-c1)*s^2 with
    s = sum_k L_hat_k^beta * dx.
    """
    s = float(np.sum(ltf.values ** tail.beta)) * ltf.delta_x
    scale = s * s
    if tail.beta == 1.0:
        return StableLawParams(1.0, (tail.c0 + tail.c1) * scale, 0.0)
    return StableLawParams(
        tail.beta, (tail.c0 + tail.c1) * scale, (tail.c0 - tail.c1) * scale
    )

"""U-statistics over walk occupation fields and their pair statistics.

The central object is

    U_n(t) = sum over ordered site pairs (x, y), x != y, of
             h(xi_x, xi_y) * N_t(x) * N_t(y)

where N_t are the visit counts of one walk at checkpoint t and xi is the
scenery. The diagonal is excluded by the convention h(a, a) = 0. The
proper normalization a_n and the limit law both depend on the walk
regime; scaled_trajectory wires walk, scenery, and normalization together
for one replicate.

The pair statistics G+/G- aggregate |zeta|^beta over ordered site pairs
(including the diagonal), where zeta is a theta-weighted quadratic form
of either the occupation increments (transient and planar regimes) or the
occupation levels (local-time regime).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _accel
from ._rng import ROLE_SCENERY, ROLE_WALK, derive_key, substream
from .errors import NumericError, ParameterError, RegimeError
from .kernels import (
    KernelSpec,
    PowerKernel,
    ReciprocalSumKernel,
    SceneryField,
    SignedPowerKernel,
    sample_scenery,
    tail_constants,
)
from .walks import OccupationField, Regime, WalkModel, regime_of, simulate_occupation

MODE_INCREMENTS = "increments"
MODE_LEVELS = "levels"


def mode_for_regime(regime: Regime) -> str:
    """Pair-statistic form appropriate to a walk regime."""
    if regime is Regime.RECURRENT_LOCAL_TIME:
        return MODE_LEVELS
    return MODE_INCREMENTS


# --- the U statistic ---------------------------------------------------------

def _check_alignment(field: OccupationField, scenery: SceneryField):
    if not np.array_equal(field.sites, scenery.sites):
        raise ParameterError(
            "scenery sites do not match occupation sites; sample the scenery "
            "on field.sites"
        )


def _pair_sum(spec: KernelSpec, scenery: SceneryField, weights: np.ndarray) -> float:
    w = np.ascontiguousarray(weights, dtype=np.float64)
    if isinstance(spec, (PowerKernel, SignedPowerKernel)):
        q = spec.p / spec.beta
        val, bad = _accel.pair_sum_maxnorm(scenery.coords, scenery.signs, w, q)
    elif isinstance(spec, ReciprocalSumKernel):
        val, bad = _accel.pair_sum_reciprocal(scenery.coords[:, 0], w)
    else:
        raise ParameterError(f"unknown kernel spec {spec!r}")
    if bad:
        raise NumericError(f"{bad} scenery pairs produced an undefined kernel value")
    if not math.isfinite(val):
        raise NumericError("pair sum overflowed to a non-finite value")
    return float(val)


def compute_U(field: OccupationField, scenery: SceneryField, spec: KernelSpec) -> float:
    """Exact double sum over visited sites at the last checkpoint, O(R^2)."""
    _check_alignment(field, scenery)
    return _pair_sum(spec, scenery, field.counts)


def compute_U_at_checkpoints(
    field: OccupationField, scenery: SceneryField, spec: KernelSpec
) -> np.ndarray:
    """compute_U at every checkpoint of the field's time grid."""
    _check_alignment(field, scenery)
    out = np.empty(len(field.checkpoint_steps), dtype=np.float64)
    for i in range(out.size):
        out[i] = _pair_sum(spec, scenery, field.checkpoint_counts[i])
    return out


# --- normalization -----------------------------------------------------------

def local_time_exponent(alpha: float, beta: float) -> float:
    """delta = 1 - 1/alpha + 1/(alpha*beta); a_n = n^(2*delta)."""
    if not 1.0 < alpha <= 2.0:
        raise ParameterError(f"alpha must be in (1, 2], got {alpha}")
    if not 0.0 < beta < 2.0:
        raise ParameterError(f"beta must be in (0, 2), got {beta}")
    return 1.0 - 1.0 / alpha + 1.0 / (alpha * beta)


def normalization_a_n(
    regime: Regime, n: int, beta: float, alpha: float | None = None
) -> float:
    """Scaling a_n such that U_n / a_n converges in the given regime."""
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    if not 0.0 < beta < 2.0:
        raise ParameterError(f"beta must be in (0, 2), got {beta}")
    if regime is Regime.TRANSIENT:
        return float(n) ** (2.0 / beta)
    if regime is Regime.RECURRENT_NO_LOCAL_TIME:
        if n < 2:
            raise ParameterError("n >= 2 required when the scaling involves log n")
        return float(n) ** (2.0 / beta) * math.log(n) ** (2.0 - 2.0 / beta)
    if regime is Regime.RECURRENT_LOCAL_TIME:
        if alpha is None:
            raise ParameterError("alpha is required in the local-time regime")
        return float(n) ** (2.0 * local_time_exponent(alpha, beta))
    raise ParameterError(f"unknown regime {regime!r}")


# --- theta combinations and G statistics --------------------------------------

@dataclass(frozen=True)
class ThetaCombination:
    """Coefficients theta_i attached to checkpoint times t_1 < ... < t_m."""

    thetas: tuple
    time_grid: tuple

    def __post_init__(self):
        thetas = tuple(float(v) for v in self.thetas)
        grid = tuple(float(t) for t in self.time_grid)
        object.__setattr__(self, "thetas", thetas)
        object.__setattr__(self, "time_grid", grid)
        if len(thetas) != len(grid) or not thetas:
            raise ParameterError("thetas and time_grid must have equal positive length")
        prev = 0.0
        for t in grid:
            if not math.isfinite(t) or t <= prev:
                raise ParameterError("time grid must be strictly increasing, positive")
            prev = t
        if not all(math.isfinite(v) for v in thetas):
            raise ParameterError("thetas must be finite")
        if all(v == 0.0 for v in thetas):
            raise ParameterError("at least one theta must be nonzero")

    @property
    def m(self) -> int:
        return len(self.thetas)


def _theta_max_matrix(combo: ThetaCombination) -> np.ndarray:
    idx = np.arange(combo.m)
    return np.asarray(combo.thetas, dtype=float)[np.maximum.outer(idx, idx)]


def g_statistic(
    field: OccupationField,
    combo: ThetaCombination,
    a_n: float,
    beta: float,
    mode: str,
    regime: Regime | None = None,
):
    """Pair statistics (G+, G-) of one occupation field.

    zeta_{x,y} = sum_i theta_i * N_{t_i}(x) * N_{t_i}(y)    (levels mode)
    zeta_{x,y} = sum_{i,j} theta_{max(i,j)} * d_i(x) * d_j(y)  (increments)

    with d_i the count increment between consecutive checkpoints. Returns
    (a_n^-beta * sum |zeta|^beta, a_n^-beta * sum sign(zeta)|zeta|^beta)
    over ordered pairs including the diagonal.
    """
    if mode not in (MODE_INCREMENTS, MODE_LEVELS):
        raise ParameterError(f"mode must be 'increments' or 'levels', got {mode!r}")
    if regime is not None and mode != mode_for_regime(regime):
        raise RegimeError(f"mode {mode!r} does not belong to regime {regime.value}")
    if not (math.isfinite(a_n) and a_n > 0):
        raise ParameterError("a_n must be positive")
    if not 0.0 < beta < 2.0:
        raise ParameterError(f"beta must be in (0, 2), got {beta}")
    if tuple(field.time_grid) != tuple(combo.time_grid):
        raise ParameterError(
            "theta combination time grid must equal the field's checkpoint grid"
        )
    scale = a_n ** (-beta)
    if combo.m == 1:
        # zeta factorizes: counts are nonnegative, so the double sum is the
        # square of a single power sum and sign(zeta) = sign(theta_1)
        w = (
            field.checkpoint_counts[0]
            if mode == MODE_LEVELS
            else field.increments()[0]
        ).astype(np.float64)
        theta = combo.thetas[0]
        s = float(np.sum(w ** beta))
        gp = scale * abs(theta) ** beta * s * s
        gm = math.copysign(gp, theta) if theta != 0.0 else 0.0
        return gp, gm
    if mode == MODE_LEVELS:
        dmat = field.checkpoint_counts.T.astype(np.float64)
        vmat = dmat * np.asarray(combo.thetas, dtype=float)[None, :]
    else:
        dmat = field.increments().T.astype(np.float64)
        vmat = dmat @ _theta_max_matrix(combo)
    dmat = np.ascontiguousarray(dmat)
    vmat = np.ascontiguousarray(vmat)
    gp, gm = _accel.g_bilinear(dmat, vmat, beta)
    return scale * gp, scale * gm


def limit_G(
    regime: Regime,
    combo: ThetaCombination,
    beta: float,
    k_beta: float | None = None,
    local_time_fields=None,
):
    """Limit values of the pair statistics (G+, G-).

    Increment regimes (transient, planar): K_beta^2 * sum_{i,j}
    |theta_{max(i,j)}|^beta^(+/-) * dt_i * dt_j, requiring k_beta.
    Local-time regime: double integral of |sum_i theta_i L_{t_i}(x)
    L_{t_i}(y)|^beta^(+/-) over the bins of the supplied local-time
    fields (one per checkpoint, duck-typed: bin_indices, values, delta_x).
    """
    if not 0.0 < beta < 2.0:
        raise ParameterError(f"beta must be in (0, 2), got {beta}")
    if regime in (Regime.TRANSIENT, Regime.RECURRENT_NO_LOCAL_TIME):
        if k_beta is None or not (math.isfinite(k_beta) and k_beta > 0):
            raise ParameterError("k_beta must be a positive float in this regime")
        times = (0.0,) + combo.time_grid
        dt = np.diff(times)
        theta = _theta_max_matrix(combo)
        with np.errstate(invalid="ignore"):
            mags = np.abs(theta) ** beta
        signed = np.where(theta > 0, mags, np.where(theta < 0, -mags, 0.0))
        w = np.outer(dt, dt)
        return (
            k_beta ** 2 * float(np.sum(mags * w)),
            k_beta ** 2 * float(np.sum(signed * w)),
        )
    if regime is not Regime.RECURRENT_LOCAL_TIME:
        raise ParameterError(f"unknown regime {regime!r}")
    if local_time_fields is None or len(local_time_fields) != combo.m:
        raise ParameterError("one local-time field per checkpoint is required")
    dx = local_time_fields[0].delta_x
    for f in local_time_fields:
        if f.delta_x != dx:
            raise ParameterError("local-time fields must share delta_x")
    occupied = [f for f in local_time_fields if f.bin_indices.size]
    if not occupied:
        return 0.0, 0.0
    lo = min(int(f.bin_indices.min()) for f in occupied)
    hi = max(int(f.bin_indices.max()) for f in occupied)
    nbins = hi - lo + 1
    lmat = np.zeros((combo.m, nbins), dtype=np.float64)
    for i, f in enumerate(local_time_fields):
        lmat[i, f.bin_indices - lo] = f.values
    theta = np.asarray(combo.thetas, dtype=float)
    gp = 0.0
    gm = 0.0
    block = max(1, int(4_000_000 // max(nbins, 1)))
    for start in range(0, nbins, block):
        z = np.einsum("i,ir,ic->rc", theta, lmat[:, start : start + block], lmat)
        az = np.abs(z) ** beta
        gp += float(az.sum())
        gm += float(np.where(z < 0.0, -az, az).sum())
    return dx * dx * gp, dx * dx * gm


# --- one replicate end to end --------------------------------------------------

@dataclass(frozen=True)
class UStatTrajectory:
    """Raw and a_n-scaled U values of one replicate along the time grid."""

    model: WalkModel
    n: int
    replicate: int
    time_grid: tuple
    raw: tuple
    scaled: tuple
    a_n: float
    regime: Regime


def scaled_trajectory(
    model: WalkModel,
    spec: KernelSpec,
    n: int,
    time_grid,
    master_seed: int,
    replicate: int = 0,
) -> UStatTrajectory:
    """Simulate one walk + scenery replicate and return U_n(t)/a_n.

    Randomness is derived from (master_seed, replicate, role), so any
    worker partition of the replicate range reproduces the same numbers.
    """
    regime = regime_of(model)
    beta = tail_constants(spec).beta
    alpha = model.alpha if regime is Regime.RECURRENT_LOCAL_TIME else None
    a_n = normalization_a_n(regime, n, beta, alpha)
    walk_rng = substream(master_seed, replicate, ROLE_WALK)
    field = simulate_occupation(model, n, time_grid, walk_rng)
    scenery = sample_scenery(
        field.sites, spec, derive_key(master_seed, replicate, ROLE_SCENERY)
    )
    raw = compute_U_at_checkpoints(field, scenery, spec)
    return UStatTrajectory(
        model,
        int(n),
        int(replicate),
        tuple(field.time_grid),
        tuple(float(v) for v in raw),
        tuple(float(v / a_n) for v in raw),
        float(a_n),
        regime,
    )

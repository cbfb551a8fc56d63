"""Walk models on Z^d, occupation fields, and regime classification.

Three step laws are supported:

* Deterministic: S_k = k on Z; every site is visited exactly once.
* SimpleWalk(d0): nearest-neighbour simple random walk on Z^d0.
* HeavyStepWalk(alpha): one-dimensional walk whose iid steps satisfy
  P(X = +/-k) = C * k^-(alpha+1) for k >= 1 and P(X = 0) = C, with
  C = 1/(1 + 2*zeta(alpha+1)); the step law lies in the domain of
  attraction of an alpha-stable law for alpha in (1, 2).

The regime of a model decides which limit theory applies downstream:

* TRANSIENT (Deterministic, SimpleWalk d0 >= 3): finite total visit
  counts, constant K_beta = E[N_inf^(beta-1)].
* RECURRENT_NO_LOCAL_TIME (SimpleWalk d0 = 2): range grows like
  c3 * n/log n; K_beta = Gamma(beta+1)/c3^(beta-1).
* RECURRENT_LOCAL_TIME (SimpleWalk d0 = 1, HeavyStepWalk): rescaled
  occupation converges to the local time of an alpha-stable motion.

Occupation fields store visit counts per site at a grid of checkpoint
times; sites are packed into int64 keys so downstream code works on flat
sorted arrays.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import zeta as _hurwitz_zeta

from .errors import NumericError, ParameterError, RegimeError


class Regime(enum.Enum):
    TRANSIENT = "transient"
    RECURRENT_NO_LOCAL_TIME = "recurrent_no_local_time"
    RECURRENT_LOCAL_TIME = "recurrent_local_time"


@dataclass(frozen=True)
class Deterministic:
    """S_k = k on Z."""

    @property
    def dimension(self) -> int:
        return 1

    @property
    def alpha(self) -> float:
        return 1.0  # ballistic; only the transient classification is used


@dataclass(frozen=True)
class SimpleWalk:
    """Simple random walk on Z^d0."""

    d0: int

    def __post_init__(self):
        if not isinstance(self.d0, int) or self.d0 < 1:
            raise ParameterError(f"d0 must be a positive integer, got {self.d0}")
        if self.d0 > 6:
            raise ParameterError("d0 > 6 exceeds the site packing range")

    @property
    def dimension(self) -> int:
        return self.d0

    @property
    def alpha(self) -> float:
        return 2.0


@dataclass(frozen=True)
class HeavyStepWalk:
    """One-dimensional walk with symmetric heavy-tailed integer steps."""

    alpha: float

    def __post_init__(self):
        if not 1.0 < self.alpha <= 2.0:
            raise ParameterError(f"alpha must be in (1, 2], got {self.alpha}")

    @property
    def dimension(self) -> int:
        return 1

    @property
    def mass_at_zero(self) -> float:
        # C = 1/(1 + 2*zeta(alpha+1)); zeta(s) = hurwitz(s, 1)
        return 1.0 / (1.0 + 2.0 * float(_hurwitz_zeta(self.alpha + 1.0, 1.0)))


WalkModel = Union[Deterministic, SimpleWalk, HeavyStepWalk]


def regime_of(model: WalkModel) -> Regime:
    if isinstance(model, Deterministic):
        return Regime.TRANSIENT
    if isinstance(model, SimpleWalk):
        if model.d0 >= 3:
            return Regime.TRANSIENT
        if model.d0 == 2:
            return Regime.RECURRENT_NO_LOCAL_TIME
        return Regime.RECURRENT_LOCAL_TIME
    if isinstance(model, HeavyStepWalk):
        return Regime.RECURRENT_LOCAL_TIME
    raise ParameterError(f"unknown walk model {model!r}")


def alpha_of(model: WalkModel) -> float:
    """Stable index of the rescaled walk (2 for simple walks)."""
    return model.alpha


def alpha0_of(model: WalkModel) -> float:
    """Index ratio alpha/d0 in the local-time regime, 1 otherwise.

    Values > 1 select the levels form of the pair statistics; exactly 1
    selects the increments form.
    """
    if regime_of(model) is Regime.RECURRENT_LOCAL_TIME:
        return model.alpha / model.dimension
    return 1.0


def walk_from_string(text: str) -> WalkModel:
    """Parse 'deterministic', 'simple:<d0>', or 'heavy:<alpha>'."""
    t = text.strip().lower()
    if t == "deterministic":
        return Deterministic()
    if t.startswith("simple:"):
        try:
            return SimpleWalk(int(t.split(":", 1)[1]))
        except ValueError as exc:
            raise ParameterError(f"bad walk spec {text!r}") from exc
    if t.startswith("heavy:"):
        try:
            return HeavyStepWalk(float(t.split(":", 1)[1]))
        except ValueError as exc:
            raise ParameterError(f"bad walk spec {text!r}") from exc
    raise ParameterError(f"unknown walk spec {text!r}")


# --- site packing -----------------------------------------------------------

def _pack_layout(dim: int):
    bits = 63 // dim
    offset = 1 << (bits - 1)
    return bits, offset


def pack_sites(coords: np.ndarray, dim: int) -> np.ndarray:
    """Pack integer lattice points into int64 keys (identity for dim=1).

    Keys preserve nothing about ordering between dimensions; they are
    opaque labels except in dim 1 where key == coordinate.
    """
    if dim == 1:
        c = np.asarray(coords, dtype=np.int64)
        return c[:, 0] if c.ndim == 2 else c
    bits, offset = _pack_layout(dim)
    c = np.asarray(coords, dtype=np.int64)
    if c.ndim != 2 or c.shape[1] != dim:
        raise ParameterError("coords must have shape (n, dim)")
    if np.abs(c).max(initial=0) >= offset:
        raise NumericError(
            f"coordinate magnitude exceeds packing range 2^{bits - 1} in dim {dim}"
        )
    key = np.zeros(c.shape[0], dtype=np.int64)
    for k in range(dim):
        key |= (c[:, k] + offset) << np.int64(bits * k)
    return key


def unpack_site(key: int, dim: int):
    """Inverse of pack_sites for a single key; returns a coordinate tuple."""
    if dim == 1:
        return (int(key),)
    bits, offset = _pack_layout(dim)
    mask = (1 << bits) - 1
    return tuple(((int(key) >> (bits * k)) & mask) - offset for k in range(dim))


# --- step generation --------------------------------------------------------

def floor_steps(n: int, t: float) -> int:
    """Number of steps at checkpoint time t for scale n: floor(n*t).

    All code (field construction, mass identities, normalizations) must
    use this single helper so the exact float product rounds identically
    everywhere.
    """
    return int(math.floor(n * t))


def _simple_walk_positions(d0: int, steps: int, rng: np.random.Generator) -> np.ndarray:
    ad = rng.integers(0, 2 * d0, size=steps, dtype=np.int64)
    axis = ad >> 1
    sign = (1 - 2 * (ad & 1)).astype(np.int64)
    disp = np.zeros((steps, d0), dtype=np.int64)
    disp[np.arange(steps), axis] = sign
    return np.cumsum(disp, axis=0)


_HEAVY_TABLE_MAX = 1 << 16


def _heavy_step_tables(alpha: float):
    # cumulative P(|X| <= k) for k = 0..TABLE_MAX
    c = 1.0 / (1.0 + 2.0 * float(_hurwitz_zeta(alpha + 1.0, 1.0)))
    k = np.arange(1, _HEAVY_TABLE_MAX + 1, dtype=np.float64)
    pmf = 2.0 * c * k ** -(alpha + 1.0)
    cdf = np.empty(_HEAVY_TABLE_MAX + 1, dtype=np.float64)
    cdf[0] = c
    np.cumsum(pmf, out=cdf[1:])
    cdf[1:] += c
    return c, cdf


def _heavy_tail_magnitude(alpha: float, c: float, u_excess: float) -> int:
    # Invert P(|X| > k) = 2*c*hurwitz_zeta(alpha+1, k+1) for the rare draws
    # beyond the table; integer bisection on an exactly evaluated tail.
    target = u_excess  # P(|X| > k) must drop below 1 - u
    lo = _HEAVY_TABLE_MAX
    hi = lo * 2
    while 2.0 * c * float(_hurwitz_zeta(alpha + 1.0, hi + 1)) > target:
        lo, hi = hi, hi * 2
        if hi > 1 << 52:
            raise NumericError("heavy step tail inversion exceeded 2^52")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if 2.0 * c * float(_hurwitz_zeta(alpha + 1.0, mid + 1)) > target:
            lo = mid
        else:
            hi = mid
    return hi


def _heavy_walk_positions(alpha: float, steps: int, rng: np.random.Generator) -> np.ndarray:
    c, cdf = _heavy_step_tables(alpha)
    u = rng.random(steps)
    mag = np.searchsorted(cdf, u, side="right").astype(np.int64)
    over = np.nonzero(mag > _HEAVY_TABLE_MAX)[0]
    for idx in over:
        mag[idx] = _heavy_tail_magnitude(alpha, c, 1.0 - u[idx])
    sign = 1 - 2 * rng.integers(0, 2, size=steps, dtype=np.int64)
    return np.cumsum(mag * sign)


def walk_positions(model: WalkModel, steps: int, rng: np.random.Generator) -> np.ndarray:
    """Positions S_1..S_steps; shape (steps,) in dim 1, else (steps, d)."""
    if steps < 0:
        raise ParameterError("steps must be >= 0")
    if isinstance(model, Deterministic):
        return np.arange(1, steps + 1, dtype=np.int64)
    if isinstance(model, SimpleWalk):
        if model.d0 == 1:
            s = 1 - 2 * rng.integers(0, 2, size=steps, dtype=np.int64)
            return np.cumsum(s)
        return _simple_walk_positions(model.d0, steps, rng)
    if isinstance(model, HeavyStepWalk):
        return _heavy_walk_positions(model.alpha, steps, rng)
    raise ParameterError(f"unknown walk model {model!r}")


# --- occupation fields ------------------------------------------------------

@dataclass(frozen=True)
class OccupationField:
    """Visit counts per site at a grid of checkpoint times.

    sites is sorted ascending; checkpoint_counts[i, j] is the number of
    visits to sites[j] among steps 1..checkpoint_steps[i]. Step 0 (the
    origin before the first move) is not counted, so the exact identity
    checkpoint_counts[i].sum() == checkpoint_steps[i] holds.
    """

    model: WalkModel
    n: int
    time_grid: tuple
    checkpoint_steps: tuple
    sites: np.ndarray
    checkpoint_counts: np.ndarray

    @property
    def counts(self) -> np.ndarray:
        """Counts at the last checkpoint."""
        return self.checkpoint_counts[-1]

    @property
    def steps(self) -> int:
        return self.checkpoint_steps[-1]

    @property
    def range_size(self) -> int:
        return int(self.sites.size)

    def increments(self) -> np.ndarray:
        """Per-checkpoint count increments, shape (m, range_size)."""
        out = np.empty_like(self.checkpoint_counts)
        out[0] = self.checkpoint_counts[0]
        if self.checkpoint_counts.shape[0] > 1:
            np.subtract(
                self.checkpoint_counts[1:], self.checkpoint_counts[:-1], out=out[1:]
            )
        return out

    def visit_total(self, index: int = -1) -> int:
        return int(self.checkpoint_counts[index].sum())

    def write_csv(self, path, header_lines=()):
        with open(path, "w") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            fh.write("site,count\n")
            for s, cnt in zip(self.sites, self.counts):
                fh.write(f"{int(s)},{int(cnt)}\n")


def _validate_time_grid(time_grid) -> tuple:
    grid = tuple(float(t) for t in time_grid)
    if not grid:
        raise ParameterError("time grid must be nonempty")
    prev = 0.0
    for t in grid:
        if not math.isfinite(t) or t <= prev:
            raise ParameterError(
                f"time grid must be strictly increasing and positive, got {grid}"
            )
        prev = t
    return grid


def simulate_occupation(
    model: WalkModel,
    n: int,
    time_grid=(1.0,),
    rng: np.random.Generator | None = None,
) -> OccupationField:
    """Run one walk to floor(n * max(time_grid)) steps and bin its visits.

    The Deterministic model consumes no randomness; rng may be None there.
    """
    if n < 1:
        raise ParameterError(f"scale n must be >= 1, got {n}")
    grid = _validate_time_grid(time_grid)
    ckpt = tuple(floor_steps(n, t) for t in grid)
    total = ckpt[-1]
    if rng is None and not isinstance(model, Deterministic):
        raise ParameterError("random walk models need an rng")

    pos = walk_positions(model, total, rng)
    keys = pack_sites(pos, model.dimension)
    if total == 0:
        sites = np.empty(0, dtype=np.int64)
        counts = np.zeros((len(grid), 0), dtype=np.int64)
        return OccupationField(model, int(n), grid, ckpt, sites, counts)

    sites, inv = np.unique(keys, return_inverse=True)
    counts = np.empty((len(grid), sites.size), dtype=np.int64)
    for i, s_i in enumerate(ckpt):
        counts[i] = np.bincount(inv[:s_i], minlength=sites.size)
    counts.setflags(write=False)
    sites.setflags(write=False)
    return OccupationField(model, int(n), grid, ckpt, sites, counts)


# --- transient constants ----------------------------------------------------

@dataclass(frozen=True)
class MonteCarloEstimate:
    value: float
    stderr: float
    replicates: int


def _batch_visits_to_zero(
    model: WalkModel, horizon: int, nreps: int, rng: np.random.Generator
) -> np.ndarray:
    """Visits to the origin during steps 1..horizon, per path (one-sided)."""
    if isinstance(model, Deterministic):
        return np.zeros(nreps, dtype=np.int64)
    if not isinstance(model, SimpleWalk):
        raise RegimeError(f"visit counting implemented for simple walks, got {model!r}")
    d0 = model.d0
    out = np.empty(nreps, dtype=np.int64)
    chunk = max(1, int(16_000_000 // max(horizon, 1)))
    done = 0
    while done < nreps:
        c = min(chunk, nreps - done)
        ad = rng.integers(0, 2 * d0, size=(c, horizon), dtype=np.int8)
        at_zero = np.ones((c, horizon), dtype=bool)
        for k in range(d0):
            delta = np.where(ad >> 1 == k, 1 - 2 * (ad & 1), 0).astype(np.int32)
            np.cumsum(delta, axis=1, out=delta)
            at_zero &= delta == 0
        out[done : done + c] = at_zero.sum(axis=1)
        done += c
    return out


def two_sided_visits_to_zero(
    model: WalkModel, horizon: int, rng: np.random.Generator
) -> int:
    """One draw of the total origin visits of a two-sided path.

    The time-zero visit counts once; each side contributes its visits up
    to the horizon. Truncation at the horizon biases the count low by a
    polynomially small amount (the d0 = 3 return probability after T steps
    decays like T^(-1/2), not exponentially).
    """
    if regime_of(model) is not Regime.TRANSIENT:
        raise RegimeError("two-sided visit counts are a transient-regime quantity")
    v = _batch_visits_to_zero(model, horizon, 2, rng)
    return 1 + int(v[0]) + int(v[1])


def estimate_K_beta_transient(
    model: WalkModel,
    beta: float,
    rng: np.random.Generator | None = None,
    horizon: int = 4000,
    replicates: int = 30000,
) -> MonteCarloEstimate:
    """Monte Carlo estimate of K_beta = E[N_inf^(beta-1)] for transient walks.

    Exact shortcuts: the Deterministic walk has N_inf = 1 identically, and
    beta = 1 gives K = 1 for every model; both return stderr 0 without
    simulation.
    """
    if regime_of(model) is not Regime.TRANSIENT:
        raise RegimeError("K_beta is defined in the transient regime only")
    if not 0.0 < beta < 2.0:
        raise ParameterError(f"beta must be in (0, 2), got {beta}")
    if isinstance(model, Deterministic) or beta == 1.0:
        return MonteCarloEstimate(1.0, 0.0, 0)
    if rng is None:
        raise ParameterError("Monte Carlo path needs an rng")
    if horizon < 1 or replicates < 2:
        raise ParameterError("horizon >= 1 and replicates >= 2 required")
    v1 = _batch_visits_to_zero(model, horizon, replicates, rng)
    v2 = _batch_visits_to_zero(model, horizon, replicates, rng)
    n_inf = (1 + v1 + v2).astype(np.float64)
    vals = n_inf ** (beta - 1.0)
    k = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(replicates))
    return MonteCarloEstimate(k, se, replicates)


def estimate_c3(
    model: WalkModel,
    n: int,
    replicates: int,
    rng: np.random.Generator,
) -> MonteCarloEstimate:
    """Estimate c3 = lim E[R_n] * log(n) / n for the planar simple walk.

    R_n is the range (number of distinct visited sites). Converges slowly,
    with an O(log log n / log n) finite-n bias; n >= 10 is required so the
    log is not degenerate.
    """
    if regime_of(model) is not Regime.RECURRENT_NO_LOCAL_TIME:
        raise RegimeError("c3 is defined for the planar (d0 = 2) walk only")
    if n < 10:
        raise ParameterError(f"n must be >= 10, got {n}")
    if replicates < 1:
        raise ParameterError("replicates must be >= 1")
    vals = np.empty(replicates, dtype=np.float64)
    for r in range(replicates):
        pos = walk_positions(model, n, rng)
        keys = pack_sites(pos, model.dimension)
        vals[r] = np.unique(keys).size * math.log(n) / n
    se = float(vals.std(ddof=1) / math.sqrt(replicates)) if replicates > 1 else 0.0
    return MonteCarloEstimate(float(vals.mean()), se, replicates)

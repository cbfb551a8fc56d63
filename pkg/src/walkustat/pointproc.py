"""Weighted pair point processes and their Poisson limit diagnostics.

The scaled points a_n^(-1) * zeta_{x,y} * h(xi_x, xi_y) over ordered site
pairs x != y converge to a Poisson process whose intensity away from 0 is
written through two one-sided potentials:

    eta([d, inf))   = d^-beta * ((c0+c1)*G+ + (c0-c1)*G-) / 2
    eta((-inf, -d]) = d^-beta * ((c0+c1)*G+ - (c0-c1)*G-) / 2

Exactness device: both potentials are built from d^-beta * S and
d^-beta * D (S = (c0+c1)G+, D = (c0-c1)G-) snapped to one dyadic lattice
with grain 2^(E-44), E the exponent of max(S, |D|). eta of an interval is
a difference of potentials, so splitting intervals telescopes exactly and
the matched-level identity eta([d,inf)) + eta((-inf,-d]) = snap(d^-beta*S)
is an exact float identity. Endpoints so small that the potential leaves
the lattice range raise a parameter error (d^-beta * max(S,|D|) must stay
below 2^9 * max(S,|D|)).

poisson_truncation_limit simulates the limiting Poisson integral directly
(counts by measure inversion, magnitudes by inverse tail) and tracks the
compensated truncated sums toward the stable law as delta -> 0.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import sici

from .errors import NumericError, ParameterError
from .kernels import KernelSpec, SceneryField, pair_values
from .stable import (
    DEFAULT_Z_GRID,
    StableLawParams,
    TailConstants,
    empirical_cf,
    stable_cf,
)
from .ustat import (
    MODE_INCREMENTS,
    MODE_LEVELS,
    ThetaCombination,
    _theta_max_matrix,
    mode_for_regime,
)
from .walks import OccupationField, Regime

_MAX_POINT_SITES = 4000


def _snap(v: float, e: int) -> float:
    scaled = math.ldexp(v, -e)
    if abs(scaled) >= 2 ** 53:
        raise ParameterError(
            "interval endpoint is too close to zero for the exact intensity lattice"
        )
    return math.ldexp(round(scaled), e)


@dataclass(frozen=True)
class IntensitySpec:
    """Limit intensity of the pair point process away from zero."""

    tail: TailConstants
    g_plus: float
    g_minus: float

    def __post_init__(self):
        if not (math.isfinite(self.g_plus) and self.g_plus > 0):
            raise ParameterError("G+ must be positive")
        if not math.isfinite(self.g_minus) or abs(self.g_minus) > self.g_plus:
            raise ParameterError("|G-| <= G+ required")

    @property
    def beta(self) -> float:
        return self.tail.beta

    def _lattice(self):
        s = (self.tail.c0 + self.tail.c1) * self.g_plus
        d = (self.tail.c0 - self.tail.c1) * self.g_minus
        e = math.frexp(max(s, abs(d)))[1] - 44
        return s, d, e

    def _potentials(self, level: float):
        # level = d > 0; returns (eta([d, inf)), eta((-inf, -d]))
        if not level > 0:
            raise ParameterError("level must be > 0")
        x = 0.0 if math.isinf(level) else level ** (-self.beta)
        s, d, e = self._lattice()
        sp = _snap(x * s, e)
        sd = _snap(x * d, e)
        return (sp + sd) / 2.0, (sp - sd) / 2.0

    def upper_potential(self, d: float) -> float:
        """eta([d, inf)) for d > 0 (d = inf gives 0)."""
        return self._potentials(d)[0]

    def lower_potential(self, d: float) -> float:
        """eta((-inf, -d]) for d > 0 (d = inf gives 0)."""
        return self._potentials(d)[1]

    def matched_level_total(self, d: float) -> float:
        """eta([d, inf)) + eta((-inf, -d]); exactly snap(d^-beta*(c0+c1)*G+)."""
        x = 0.0 if math.isinf(d) else float(d) ** (-self.beta)
        s, _, e = self._lattice()
        return _snap(x * s, e)


def expected_count(spec: IntensitySpec, lo: float, hi: float) -> float:
    """eta of one interval: [lo, hi) on the positive side (0 < lo <= hi),
    (lo, hi] on the negative side (lo <= hi < 0). Infinite outer endpoints
    are allowed; lo == hi gives 0.
    """
    if math.isnan(lo) or math.isnan(hi):
        raise ParameterError("interval endpoints must not be NaN")
    if lo > hi:
        raise ParameterError(f"interval endpoints out of order: {lo} > {hi}")
    if lo == hi:
        return 0.0
    if lo > 0:
        return spec.upper_potential(lo) - spec.upper_potential(hi)
    if hi < 0:
        return spec.lower_potential(-hi) - spec.lower_potential(-lo)
    raise ParameterError(
        "interval must lie strictly on one side of zero (the intensity is "
        "not finite across 0)"
    )


# --- building the point set from one replicate --------------------------------

@dataclass(frozen=True)
class WeightedPointSet:
    """Off-diagonal scaled points of one (walk, scenery) replicate."""

    points: np.ndarray
    a_n: float
    n: int

    def count_in(self, lo: float, hi: float) -> int:
        """Points in [lo, hi) for positive intervals, (lo, hi] for negative."""
        if lo > 0:
            return int(np.count_nonzero((self.points >= lo) & (self.points < hi)))
        if hi < 0:
            return int(np.count_nonzero((self.points > lo) & (self.points <= hi)))
        raise ParameterError("interval must lie strictly on one side of zero")


def _zeta_matrix(field: OccupationField, combo: ThetaCombination, mode: str):
    if tuple(field.time_grid) != tuple(combo.time_grid):
        raise ParameterError(
            "theta combination time grid must equal the field's checkpoint grid"
        )
    if mode == MODE_LEVELS:
        dmat = field.checkpoint_counts.T.astype(np.float64)
        vmat = dmat * np.asarray(combo.thetas, dtype=float)[None, :]
    elif mode == MODE_INCREMENTS:
        dmat = field.increments().T.astype(np.float64)
        vmat = dmat @ _theta_max_matrix(combo)
    else:
        raise ParameterError(f"mode must be 'increments' or 'levels', got {mode!r}")
    zeta = dmat @ vmat.T
    # the bilinear form is symmetric but matmul may sum the (x, y) and
    # (y, x) entries in different orders; mirror the upper triangle so the
    # two orderings of a pair carry bit-identical values
    iu = np.triu_indices(zeta.shape[0], k=1)
    zeta[(iu[1], iu[0])] = zeta[iu]
    return zeta


def build_point_set(
    field: OccupationField,
    scenery: SceneryField,
    spec: KernelSpec,
    combo: ThetaCombination,
    a_n: float,
    regime: Regime,
) -> WeightedPointSet:
    """Materialize all off-diagonal points of one replicate.

    Dense O(R^2) construction; guarded to range sizes <= 4000 (the
    point-process experiments run short or deterministic walks).
    """
    if not np.array_equal(field.sites, scenery.sites):
        raise ParameterError("scenery sites do not match occupation sites")
    if not (math.isfinite(a_n) and a_n > 0):
        raise ParameterError("a_n must be positive")
    r = field.range_size
    if r > _MAX_POINT_SITES:
        raise ParameterError(
            f"range size {r} exceeds the dense point-set bound {_MAX_POINT_SITES}"
        )
    if r == 0:
        return WeightedPointSet(np.empty(0), float(a_n), field.n)
    mode = mode_for_regime(regime)
    zeta = _zeta_matrix(field, combo, mode)
    hmat = pair_values(
        spec,
        scenery.coords[:, None, :],
        scenery.signs[:, None],
        scenery.coords[None, :, :],
        scenery.signs[None, :],
    )
    np.fill_diagonal(hmat, 0.0)
    pts = zeta * hmat / a_n
    off = ~np.eye(r, dtype=bool)
    points = pts[off]
    if not np.all(np.isfinite(points)):
        raise NumericError("point set contains non-finite values")
    return WeightedPointSet(points, float(a_n), field.n)


# --- empirical intensity report ------------------------------------------------

@dataclass(frozen=True)
class IntensityRow:
    interval_lo: float
    interval_hi: float
    empirical_mean: float
    eta: float
    ci_halfwidth: float
    void_emp: float
    void_theory: float
    void_ci: float

    @property
    def mean_ok(self) -> bool:
        return abs(self.empirical_mean - self.eta) <= self.ci_halfwidth

    @property
    def void_ok(self) -> bool:
        # binomial 3-sigma around the empirical void frequency, with a
        # 2/R floor so a degenerate 0/1 frequency is not an automatic fail
        return abs(self.void_emp - self.void_theory) <= self.void_ci


@dataclass(frozen=True)
class IntensityReport:
    replicates: int
    rows: tuple

    @property
    def ok(self) -> bool:
        return all(r.mean_ok and r.void_ok for r in self.rows)

    def write_csv(self, path, header_lines=()):
        with open(path, "w") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            fh.write(
                "interval_lo,interval_hi,empirical_mean,eta,ci_halfwidth,"
                "void_emp,void_theory\n"
            )
            for r in self.rows:
                vals = (
                    r.interval_lo,
                    r.interval_hi,
                    r.empirical_mean,
                    r.eta,
                    r.ci_halfwidth,
                    r.void_emp,
                    r.void_theory,
                )
                fh.write(",".join(repr(float(v)) for v in vals) + "\n")


def intensity_report_from_counts(
    counts: np.ndarray, spec: IntensitySpec, intervals
) -> IntensityReport:
    """Build the intensity report from a (replicates, intervals) count matrix.

    Reduction-friendly form of intensity_check: callers that fan replicates
    out across processes can return per-interval counts instead of whole
    point sets.
    """
    counts = np.asarray(counts, dtype=float)
    if counts.ndim != 2 or counts.shape[1] != len(tuple(intervals)):
        raise ParameterError("counts must be a (replicates, intervals) matrix")
    n_rep = counts.shape[0]
    if n_rep < 100:
        raise ParameterError("at least 100 replicates are required")
    rows = []
    for k, (lo, hi) in enumerate(intervals):
        eta = expected_count(spec, lo, hi)
        col = counts[:, k]
        emp = float(col.mean())
        ci = 3.0 * float(col.std(ddof=1)) / math.sqrt(n_rep)
        void_emp = float(np.mean(col == 0))
        void_th = math.exp(-eta)
        void_ci = 3.0 * math.sqrt(void_emp * (1 - void_emp) / n_rep) + 2.0 / n_rep
        rows.append(
            IntensityRow(
                float(lo), float(hi), emp, eta, ci, void_emp, void_th, void_ci
            )
        )
    return IntensityReport(n_rep, tuple(rows))


def intensity_check(point_sets, spec: IntensitySpec, intervals) -> IntensityReport:
    """Compare replicate point counts per interval against the intensity.

    point_sets: sequence of WeightedPointSet (>= 100 replicates).
    intervals: (lo, hi) pairs, each strictly one-sided.
    """
    intervals = tuple(intervals)
    counts = np.array(
        [[ps.count_in(lo, hi) for lo, hi in intervals] for ps in point_sets],
        dtype=float,
    ).reshape(len(point_sets), len(intervals))
    return intensity_report_from_counts(counts, spec, intervals)


# --- compensated truncated sums -------------------------------------------------

def truncation_drift_coefficient(
    tail: TailConstants, delta: float, g_minus: float
) -> float:
    """Drift added to the delta-truncated point sum for beta > 1:
    (c0 - c1) * beta * delta^(1-beta) / (beta - 1) * G-. Zero for beta <= 1.
    """
    if not (math.isfinite(delta) and delta > 0):
        raise ParameterError("delta must be positive")
    b = tail.beta
    if b <= 1.0:
        return 0.0
    return (tail.c0 - tail.c1) * b * delta ** (1.0 - b) / (b - 1.0) * g_minus


def compensated_truncated_sum(
    pset: WeightedPointSet, delta: float, tail: TailConstants, g_minus: float
) -> float:
    """Sum of points with |point| <= delta, plus the beta > 1 drift."""
    if not (math.isfinite(delta) and delta > 0):
        raise ParameterError("delta must be positive")
    small = pset.points[np.abs(pset.points) <= delta]
    return float(small.sum()) + truncation_drift_coefficient(tail, delta, g_minus)


# --- Poisson truncation trend ----------------------------------------------------

@functools.lru_cache(maxsize=256)
def _beta_one_drift_integral(delta: float) -> float:
    # integral_delta^inf sin(x)/x^2 dx = sin(delta)/delta - Ci(delta)
    _, ci = sici(delta)
    return math.sin(delta) / delta - float(ci)


def poisson_drift(a: float, b: float, beta: float, delta: float) -> float:
    """Centering subtracted from the delta-tail Poisson sum.

    0 for beta < 1; (a-b) * integral_delta^inf sin(x)/x^2 dx for beta = 1
    (cached per delta); (a-b)*beta*delta^(1-beta)/(beta-1) for beta > 1.
    """
    if not (math.isfinite(delta) and delta > 0):
        raise ParameterError("delta must be positive")
    if beta < 1.0:
        return 0.0
    if beta == 1.0:
        return (a - b) * _beta_one_drift_integral(float(delta))
    return (a - b) * beta * delta ** (1.0 - beta) / (beta - 1.0)


@dataclass(frozen=True)
class TruncationTrendRow:
    delta: float
    drift: float
    sup_ecf_err: float


@dataclass(frozen=True)
class TruncationTrend:
    a: float
    b: float
    beta: float
    replicates: int
    target: StableLawParams
    rows: tuple

    @property
    def final_sup_err(self) -> float:
        return self.rows[-1].sup_ecf_err

    def write_csv(self, path, header_lines=()):
        with open(path, "w") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            fh.write("delta,drift,sup_ecf_err\n")
            for r in self.rows:
                fh.write(f"{r.delta!r},{r.drift!r},{r.sup_ecf_err!r}\n")


def _poisson_tail_sums(
    rate: float, beta: float, delta: float, replicates: int, rng: np.random.Generator
) -> np.ndarray:
    """Per-replicate sums of the Poisson points of magnitude >= delta.

    Counts are Poisson(rate * delta^-beta); magnitudes invert the tail
    measure: z = delta * U^(-1/beta).
    """
    lam = rate * delta ** (-beta)
    totals = np.zeros(replicates, dtype=np.float64)
    if rate == 0.0:
        return totals
    chunk = max(1, int(4_000_000 // max(lam, 1.0)))
    done = 0
    while done < replicates:
        c = min(chunk, replicates - done)
        counts = rng.poisson(lam, c)
        npts = int(counts.sum())
        if npts:
            idx = np.repeat(np.arange(c), counts)
            mags = delta * rng.random(npts) ** (-1.0 / beta)
            totals[done : done + c] = np.bincount(idx, weights=mags, minlength=c)
        done += c
    return totals


def poisson_truncation_limit(
    a: float,
    b: float,
    beta: float,
    deltas,
    replicates: int = 100_000,
    seed: int = 0,
    z_grid=DEFAULT_Z_GRID,
) -> TruncationTrend:
    """Simulate compensated delta-tail Poisson sums and their ECF distance
    to the stable law with parameters (A, B) = (a+b, a-b) for each delta.

    deltas must be strictly decreasing; the distances should shrink along
    the sequence (the acceptance slack for sampling noise is the caller's
    business).
    """
    if a < 0 or b < 0 or a + b <= 0:
        raise ParameterError("rates must be >= 0 with a + b > 0")
    if not 0.0 < beta < 2.0:
        raise ParameterError(f"beta must be in (0, 2), got {beta}")
    deltas = [float(d) for d in deltas]
    if not deltas or any(
        d2 >= d1 for d1, d2 in zip(deltas, deltas[1:])
    ) or deltas[0] <= 0 or not all(map(math.isfinite, deltas)):
        raise ParameterError("deltas must be a strictly decreasing positive sequence")
    if replicates < 100:
        raise ParameterError("replicates must be >= 100")
    target = StableLawParams(beta, a + b, 0.0 if beta == 1.0 else a - b)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))
    z = np.asarray(z_grid, dtype=float)
    tgt = stable_cf(target, z)
    rows = []
    for delta in deltas:
        pos = _poisson_tail_sums(a, beta, delta, replicates, rng)
        neg = _poisson_tail_sums(b, beta, delta, replicates, rng)
        samples = pos - neg - poisson_drift(a, b, beta, delta)
        sup = float(np.max(np.abs(empirical_cf(samples, z) - tgt)))
        rows.append(TruncationTrendRow(delta, poisson_drift(a, b, beta, delta), sup))
    return TruncationTrend(a, b, beta, replicates, target, tuple(rows))

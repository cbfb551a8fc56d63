"""Batch experiment driver.

One subcommand per experiment family:

  sample-stable       stable sampler vs closed-form CF, ECF suite
  estimate-constants  Monte Carlo normalization constants (k-beta, c3)
  ustat-transient     transient-walk ensembles vs their stable limits
  ustat-planar        planar-walk ensembles (log-corrected normalization)
  ustat-localtime     local-time regime: quenched ensemble vs limit ensemble
  sheet-integrals     step-function sheet integrals vs closed-form laws
  point-process       intensity report + compensated truncation trend
  validate-kernel     kernel tail/symmetry/joint-exceedance validation

Configuration is a flat ``key=value`` text file (--config); command-line
flags override file values. Every CSV starts with ``# key=value`` header
lines carrying the tool version and the full effective configuration, so
stripping the ``# `` prefix of a file's header yields a config that
reproduces it (the ``tool`` and ``subcommand`` keys are ignored on load).

Replicates fan out across --workers processes; every replicate draws its
randomness from (seed, replicate, role) substreams, so results are
byte-identical for any worker count.
"""

from __future__ import annotations

import argparse
import itertools
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from ._rng import (
    ROLE_CONSTANTS,
    ROLE_LIMIT_WALK,
    ROLE_SCENERY,
    ROLE_SHEET,
    ROLE_WALK,
    derive_key,
    substream,
)
from .errors import NumericError, ParameterError, RegimeError
from .kernels import (
    kernel_from_string,
    sample_scenery,
    tail_constants,
    validate_assumptions,
)
from .local_time import estimate_local_time, limit_functional, required_extent
from .pointproc import (
    IntensitySpec,
    build_point_set,
    intensity_report_from_counts,
    poisson_truncation_limit,
)
from .sheet import StepFunction2D, integral_cf_params, integrate_step, simulate_sheet
from .stable import (
    DEFAULT_Z_GRID,
    StableLawParams,
    TailConstants,
    ecf_report,
    ecf_tolerance,
    sample_stable,
    two_sample_ecf_distance,
)
from .ustat import (
    ThetaCombination,
    g_statistic,
    limit_G,
    mode_for_regime,
    normalization_a_n,
    scaled_trajectory,
)
from .walks import (
    Regime,
    estimate_K_beta_transient,
    estimate_c3,
    regime_of,
    simulate_occupation,
    walk_from_string,
)

TOOL_TAG = f"walkustat-v{__version__}"

# header keys that appear in emitted files but are not configuration
_HEADER_ONLY = {"tool", "subcommand"}


# --- configuration ---------------------------------------------------------------

def load_config(path: str) -> dict:
    """Parse a flat key=value config file. Blank lines and # comments skip."""
    cfg = {}
    try:
        fh = open(path)
    except OSError as exc:
        raise ParameterError(f"cannot read config {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            if "=" not in s:
                raise ParameterError(
                    f"{path}:{lineno}: expected key=value, got {s!r}"
                )
            key, val = s.split("=", 1)
            key = key.strip()
            if key in _HEADER_ONLY:
                continue
            cfg[key] = val.strip()
    return cfg


class _Opt:
    def __init__(self, key, default=None, required=False, help=""):
        self.key = key
        self.default = default
        self.required = required
        self.help = help

    @property
    def flag(self):
        return "--" + self.key.replace("_", "-")

    @property
    def attr(self):
        return self.key


_COMMON = [
    _Opt("seed", "0", help="master seed (unsigned 64-bit)"),
    _Opt("out", "out", help="output directory for CSV files"),
    _Opt("workers", "1", help="worker processes for replicate fan-out"),
]

_WALK_HELP = "walk model: deterministic | simple:D | heavy:ALPHA"
_KERNEL_HELP = (
    "kernel: power:p=P,beta=B,density=uniform|gauss | signed-power:... | reciprocal"
)

_SUBCOMMANDS = {
    "sample-stable": [
        _Opt("draws", "100000", help="sample size per parameter triple"),
        _Opt("beta", None, help="stability index; omit to run the default grid"),
        _Opt("scale_a", "1", help="scale parameter A (with --beta)"),
        _Opt("skew_b", "0", help="skew parameter B (with --beta)"),
    ],
    "estimate-constants": [
        _Opt("constant", None, required=True, help="which constant: k-beta | c3"),
        _Opt("walk", "simple:3", help=_WALK_HELP),
        _Opt("beta", "0.8", help="stability index (k-beta)"),
        _Opt("n", "2000", help="walk length (c3)"),
        _Opt("replicates", None, help="Monte Carlo replicates"),
        _Opt("horizon", "4000", help="per-side step horizon (k-beta)"),
    ],
    "ustat-transient": [
        _Opt("walk", "simple:3", help=_WALK_HELP),
        _Opt("kernel", "power:p=1,beta=0.8,density=uniform", help=_KERNEL_HELP),
        _Opt("n", "10000", help="walk length"),
        _Opt("time_grid", "1", help="comma-separated checkpoint times"),
        _Opt("thetas", "1", help="comma-separated checkpoint weights"),
        _Opt("replicates", "200", help="ensemble size"),
        _Opt("k_beta", "estimate", help="limit constant: a number or 'estimate'"),
    ],
    "ustat-planar": [
        _Opt("walk", "simple:2", help=_WALK_HELP),
        _Opt("kernel", "power:p=1,beta=0.8,density=uniform", help=_KERNEL_HELP),
        _Opt("n", "10000", help="walk length"),
        _Opt("time_grid", "1", help="comma-separated checkpoint times"),
        _Opt("thetas", "1", help="comma-separated checkpoint weights"),
        _Opt("replicates", "200", help="ensemble size"),
        _Opt("c3", "estimate", help="range constant: a number or 'estimate'"),
    ],
    "ustat-localtime": [
        _Opt("walk", "simple:1", help=_WALK_HELP),
        _Opt("kernel", "power:p=1,beta=0.8,density=uniform", help=_KERNEL_HELP),
        _Opt("n", "10000", help="walk length"),
        _Opt("time_grid", "1", help="comma-separated checkpoint times"),
        _Opt("replicates", "200", help="ensemble size (each side)"),
    ],
    "sheet-integrals": [
        _Opt("beta", "0.7", help="stability index of the sheet"),
        _Opt("c0", "0.5", help="upper tail weight"),
        _Opt("c1", "0.5", help="lower tail weight"),
        _Opt("cell_size", "0.125", help="sheet cell size (must divide 0.25)"),
        _Opt("replicates", "10000", help="sheets per step function"),
    ],
    "point-process": [
        _Opt("walk", "deterministic", help=_WALK_HELP),
        _Opt("kernel", "power:p=1,beta=0.5,density=uniform", help=_KERNEL_HELP),
        _Opt("n", "200", help="walk length"),
        _Opt("time_grid", "1", help="comma-separated checkpoint times"),
        _Opt("thetas", "1", help="comma-separated checkpoint weights"),
        _Opt("replicates", "500", help="scenery replicates (>= 100)"),
        _Opt("intervals", "1:2,2:4,4:inf", help="intervals LO:HI, comma-separated"),
        _Opt("g_plus", None, help="intensity G+ override (default: replicate 0)"),
        _Opt("g_minus", None, help="intensity G- override (default: replicate 0)"),
        _Opt("ppp_a", "1", help="upper intensity rate for the truncation trend"),
        _Opt("ppp_b", "0", help="lower intensity rate for the truncation trend"),
        _Opt("ppp_beta", None, help="trend stability index (default: kernel's)"),
        _Opt("deltas", "0.3,0.1,0.03,0.01", help="decreasing truncation levels"),
        _Opt("trend_draws", "100000", help="replicates per truncation level"),
    ],
    "validate-kernel": [
        _Opt("kernel", None, required=True, help=_KERNEL_HELP),
        _Opt("samples", "100000", help="mark pairs to draw"),
    ],
}


def _parse_args(argv):
    parser = argparse.ArgumentParser(
        prog="walkustat",
        description="simulation experiments for walk-indexed pair statistics",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, opts in _SUBCOMMANDS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None, help="key=value config file")
        for opt in _COMMON + opts:
            sp.add_argument(opt.flag, dest=opt.attr, default=None, help=opt.help)
    return parser.parse_args(argv)


def _effective_config(args) -> dict:
    """Merge builtin defaults < config file < flags into raw-string form."""
    opts = _COMMON + _SUBCOMMANDS[args.subcommand]
    cfg = load_config(args.config) if args.config else {}
    known = {o.key for o in opts}
    unknown = sorted(set(cfg) - known)
    if unknown:
        raise ParameterError(
            f"unknown config keys for {args.subcommand}: {', '.join(unknown)}"
        )
    eff = {}
    for opt in opts:
        val = getattr(args, opt.attr)
        if val is None:
            val = cfg.get(opt.key, opt.default)
        if val is None and opt.required:
            raise ParameterError(f"missing required parameter {opt.key}")
        if val is not None:
            eff[opt.key] = str(val)
    return eff


# --- typed accessors (all config values live as strings until used) --------------

def _geti(eff, key, minimum=None):
    try:
        val = int(eff[key], 0)
    except ValueError:
        raise ParameterError(f"{key} must be an integer, got {eff[key]!r}") from None
    if minimum is not None and val < minimum:
        raise ParameterError(f"{key} must be >= {minimum}, got {val}")
    return val


def _getf(eff, key):
    try:
        val = float(eff[key])
    except ValueError:
        raise ParameterError(f"{key} must be a number, got {eff[key]!r}") from None
    return val


def _getfs(eff, key):
    parts = [p for p in eff[key].split(",") if p.strip()]
    if not parts:
        raise ParameterError(f"{key} must be a comma-separated list of numbers")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise ParameterError(f"{key} must be numbers, got {eff[key]!r}") from None


def _get_intervals(eff, key):
    out = []
    for part in eff[key].split(","):
        part = part.strip()
        if not part:
            continue
        pieces = part.split(":")
        if len(pieces) != 2:
            raise ParameterError(f"interval must be LO:HI, got {part!r}")
        try:
            lo, hi = (float(p) for p in pieces)
        except ValueError:
            raise ParameterError(f"interval bounds must be numbers: {part!r}") from None
        out.append((lo, hi))
    if not out:
        raise ParameterError(f"{key} must contain at least one interval")
    return tuple(out)


def _header_lines(subcommand: str, eff: dict):
    # workers is an execution detail with no effect on any emitted number;
    # leaving it out keeps files byte-identical across worker counts
    lines = [f"tool={TOOL_TAG}", f"subcommand={subcommand}"]
    lines.extend(f"{k}={eff[k]}" for k in sorted(eff) if k != "workers")
    return lines


def _write_rows(path, header_lines, columns, rows):
    """Write a summary CSV; every numeric cell uses shortest round-trip form."""
    with open(path, "w") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            cells = []
            for v in row:
                if isinstance(v, float):
                    if not math.isfinite(v):
                        raise NumericError(f"non-finite value in {path}: {row}")
                    cells.append(repr(v))
                else:
                    cells.append(str(v))
            fh.write(",".join(cells) + "\n")


def _map_replicates(fn, payload, replicates, workers):
    """Order-preserving replicate map, optionally across processes."""
    if workers <= 1:
        return [fn(payload, r) for r in range(replicates)]
    chunk = max(1, replicates // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(
            pool.map(fn, itertools.repeat(payload), range(replicates), chunksize=chunk)
        )


# --- replicate workers (module level so process pools can import them) -----------

def _traj_worker(payload, replicate):
    walk, kernel, n, grid, seed = payload
    traj = scaled_trajectory(
        walk_from_string(walk), kernel_from_string(kernel), n, grid, seed, replicate
    )
    return traj.raw, traj.scaled, traj.a_n


def _limit_ensemble_worker(payload, replicate):
    walk, kernel, n, grid, seed = payload
    model = walk_from_string(walk)
    tail = tail_constants(kernel_from_string(kernel))
    rng = substream(seed, replicate, ROLE_LIMIT_WALK)
    field = simulate_occupation(model, n, grid, rng)
    # the final checkpoint has the widest support, so one sheet serves all t
    lt_final = estimate_local_time(field, grid[-1])
    extent = required_extent(lt_final)
    sheet = simulate_sheet(
        tail, lt_final.delta_x, extent, substream(seed, replicate, ROLE_SHEET)
    )
    vals = []
    for t in grid:
        ltf = estimate_local_time(field, t)
        vals.append(limit_functional(ltf, sheet))
    return tuple(vals)


def _pointset_counts_worker(payload, replicate):
    walk, kernel, n, grid, thetas, seed, intervals = payload
    model = walk_from_string(walk)
    spec = kernel_from_string(kernel)
    regime = regime_of(model)
    beta = tail_constants(spec).beta
    alpha = model.alpha if regime is Regime.RECURRENT_LOCAL_TIME else None
    a_n = normalization_a_n(regime, n, beta, alpha)
    field = simulate_occupation(model, n, grid, substream(seed, replicate, ROLE_WALK))
    scenery = sample_scenery(
        field.sites, spec, derive_key(seed, replicate, ROLE_SCENERY)
    )
    pts = build_point_set(
        field, scenery, spec, ThetaCombination(thetas, grid), a_n, regime
    )
    return tuple(pts.count_in(lo, hi) for lo, hi in intervals)


def _sheet_worker(payload, replicate):
    beta, c0, c1, cell, seed, functions = payload
    tail = TailConstants(beta, c0, c1)
    streams = substream(seed, replicate, ROLE_SHEET).spawn(len(functions))
    out = []
    for (pieces, extent), stream in zip(functions, streams):
        sheet = simulate_sheet(tail, cell, extent, stream)
        out.append(integrate_step(sheet, StepFunction2D(pieces)))
    return tuple(out)


# --- subcommands ------------------------------------------------------------------

def _cmd_sample_stable(eff, out_dir, headers):
    draws = _geti(eff, "draws", minimum=100)
    if eff.get("beta") is not None:
        triples = [(_getf(eff, "beta"), _getf(eff, "scale_a"), _getf(eff, "skew_b"))]
    else:
        # the skewed corner is dropped at beta = 1 (the law there is
        # symmetric by construction); a second scale stands in for it
        triples = [
            (0.7, 1.0, 0.0),
            (0.7, 1.0, 1.0),
            (1.0, 1.0, 0.0),
            (1.0, 2.0, 0.0),
            (1.3, 1.0, 0.0),
            (1.3, 1.0, 1.0),
        ]
    seed = _geti(eff, "seed", minimum=0)
    rows = []
    for i, (beta, a, b) in enumerate(triples):
        law = StableLawParams(beta, a, b)
        rng = substream(seed, i, ROLE_CONSTANTS)
        samples = sample_stable(law, rng, draws)
        report = ecf_report(samples, law)
        report.write_csv(os.path.join(out_dir, f"stable_ecf_{i}.csv"), headers)
        tol = ecf_tolerance(draws)
        rows.append(
            (beta, a, b, draws, report.sup_abs_err, tol, int(report.sup_abs_err <= tol))
        )
    _write_rows(
        os.path.join(out_dir, "stable_ecf_summary.csv"),
        headers,
        ("beta", "scale_a", "skew_b", "draws", "sup_abs_err", "tolerance", "ok"),
        rows,
    )


def _cmd_estimate_constants(eff, out_dir, headers):
    constant = eff["constant"]
    model = walk_from_string(eff["walk"])
    seed = _geti(eff, "seed", minimum=0)
    rng = substream(seed, 0, ROLE_CONSTANTS)
    if constant == "k-beta":
        replicates = _geti(eff, "replicates", minimum=2) if "replicates" in eff else 30000
        est = estimate_K_beta_transient(
            model,
            _getf(eff, "beta"),
            rng=rng,
            horizon=_geti(eff, "horizon", minimum=1),
            replicates=replicates,
        )
    elif constant == "c3":
        replicates = _geti(eff, "replicates", minimum=2) if "replicates" in eff else 1000
        est = estimate_c3(model, _geti(eff, "n", minimum=10), replicates, rng)
    else:
        raise ParameterError(f"constant must be 'k-beta' or 'c3', got {constant!r}")
    _write_rows(
        os.path.join(out_dir, "constants.csv"),
        headers,
        ("constant", "value", "stderr", "replicates"),
        [(constant, est.value, est.stderr, est.replicates)],
    )


def _resolve_k_beta(eff, model, beta, seed):
    raw = eff["k_beta"]
    if raw == "estimate":
        est = estimate_K_beta_transient(
            model, beta, rng=substream(seed, 0, ROLE_CONSTANTS)
        )
        return est.value
    try:
        value = float(raw)
    except ValueError:
        raise ParameterError(
            f"k_beta must be a number or 'estimate', got {raw!r}"
        ) from None
    if not (math.isfinite(value) and value > 0.0):
        raise ParameterError(f"k_beta must be positive, got {value}")
    return value


def _resolve_c3(eff, model, n, seed):
    raw = eff["c3"]
    if raw == "estimate":
        est = estimate_c3(model, n, 200, substream(seed, 0, ROLE_CONSTANTS))
        return est.value
    try:
        value = float(raw)
    except ValueError:
        raise ParameterError(f"c3 must be a number or 'estimate', got {raw!r}") from None
    if not (math.isfinite(value) and value > 0.0):
        raise ParameterError(f"c3 must be positive, got {value}")
    return value


def _run_ustat_ensemble(eff, out_dir, headers, expected_regime, k_beta_of):
    model = walk_from_string(eff["walk"])
    regime = regime_of(model)
    if regime is not expected_regime:
        raise RegimeError(
            f"walk {eff['walk']!r} is in regime {regime.name}; "
            f"this subcommand needs {expected_regime.name}"
        )
    spec = kernel_from_string(eff["kernel"])
    tail = tail_constants(spec)
    n = _geti(eff, "n", minimum=2)
    grid = _getfs(eff, "time_grid")
    thetas = _getfs(eff, "thetas")
    replicates = _geti(eff, "replicates", minimum=1)
    workers = _geti(eff, "workers", minimum=1)
    seed = _geti(eff, "seed", minimum=0)

    k_beta = k_beta_of(model, n, seed, tail.beta)
    payload = (eff["walk"], eff["kernel"], n, grid, seed)
    results = _map_replicates(_traj_worker, payload, replicates, workers)

    sample_rows = []
    for r, (raw, scaled, _a_n) in enumerate(results):
        for t, rv, sv in zip(grid, raw, scaled):
            sample_rows.append((r, t, rv, sv))
    _write_rows(
        os.path.join(out_dir, "samples.csv"),
        headers,
        ("replicate", "t", "raw", "scaled"),
        sample_rows,
    )

    if replicates < 40:
        return
    scaled = np.array([res[1] for res in results], dtype=float)
    combo_full = ThetaCombination(thetas, grid)
    summary = []
    for k, t in enumerate(grid):
        marginal = ThetaCombination((1.0,), (t,))
        gp, gm = limit_G(regime, marginal, tail.beta, k_beta=k_beta)
        law = StableLawParams(
            tail.beta,
            (tail.c0 + tail.c1) * gp,
            0.0 if tail.beta == 1.0 else (tail.c0 - tail.c1) * gm,
        )
        report = ecf_report(scaled[:, k], law)
        report.write_csv(os.path.join(out_dir, f"ecf_t{k}.csv"), headers)
        summary.append(
            ("marginal", t, report.sup_abs_err, ecf_tolerance(replicates))
        )
    if len(grid) > 1:
        weights = np.asarray(combo_full.thetas, dtype=float)
        increments = np.diff(scaled, axis=1, prepend=0.0)
        combined = increments @ weights
        gp, gm = limit_G(regime, combo_full, tail.beta, k_beta=k_beta)
        law = StableLawParams(
            tail.beta,
            (tail.c0 + tail.c1) * gp,
            0.0 if tail.beta == 1.0 else (tail.c0 - tail.c1) * gm,
        )
        report = ecf_report(combined, law)
        report.write_csv(os.path.join(out_dir, "ecf_combined.csv"), headers)
        summary.append(
            ("combined", grid[-1], report.sup_abs_err, ecf_tolerance(replicates))
        )
    _write_rows(
        os.path.join(out_dir, "ecf_summary.csv"),
        headers,
        ("statistic", "t", "sup_abs_err", "tolerance"),
        summary,
    )


def _cmd_ustat_transient(eff, out_dir, headers):
    def k_beta_of(model, n, seed, beta):
        return _resolve_k_beta(eff, model, beta, seed)

    _run_ustat_ensemble(eff, out_dir, headers, Regime.TRANSIENT, k_beta_of)


def _cmd_ustat_planar(eff, out_dir, headers):
    def k_beta_of(model, n, seed, beta):
        c3 = _resolve_c3(eff, model, n, seed)
        if c3 <= 0:
            raise NumericError(f"estimated c3 must be positive, got {c3}")
        return math.gamma(beta + 1.0) / c3 ** (beta - 1.0)

    _run_ustat_ensemble(eff, out_dir, headers, Regime.RECURRENT_NO_LOCAL_TIME, k_beta_of)


def _cmd_ustat_localtime(eff, out_dir, headers):
    model = walk_from_string(eff["walk"])
    regime = regime_of(model)
    if regime is not Regime.RECURRENT_LOCAL_TIME:
        raise RegimeError(
            f"walk {eff['walk']!r} is in regime {regime.name}; "
            "this subcommand needs RECURRENT_LOCAL_TIME"
        )
    n = _geti(eff, "n", minimum=2)
    grid = _getfs(eff, "time_grid")
    replicates = _geti(eff, "replicates", minimum=1)
    workers = _geti(eff, "workers", minimum=1)
    seed = _geti(eff, "seed", minimum=0)
    payload = (eff["walk"], eff["kernel"], n, grid, seed)

    quenched = _map_replicates(_traj_worker, payload, replicates, workers)
    limits = _map_replicates(_limit_ensemble_worker, payload, replicates, workers)

    _write_rows(
        os.path.join(out_dir, "samples_quenched.csv"),
        headers,
        ("replicate", "t", "scaled"),
        [
            (r, t, sv)
            for r, (_raw, scaled, _a_n) in enumerate(quenched)
            for t, sv in zip(grid, scaled)
        ],
    )
    _write_rows(
        os.path.join(out_dir, "samples_limit.csv"),
        headers,
        ("replicate", "t", "value"),
        [(r, t, v) for r, vals in enumerate(limits) for t, v in zip(grid, vals)],
    )
    if replicates < 40:
        return
    qmat = np.array([res[1] for res in quenched], dtype=float)
    lmat = np.array(limits, dtype=float)
    rows = []
    for k, t in enumerate(grid):
        _z, dist = two_sample_ecf_distance(qmat[:, k], lmat[:, k])
        rows.append((t, float(dist.max()), replicates))
    _write_rows(
        os.path.join(out_dir, "two_sample_summary.csv"),
        headers,
        ("t", "ecf_distance", "replicates"),
        rows,
    )


# the fixed step-function library for sheet-integrals: mixed quadrants,
# disjoint pieces, all bounds multiples of 1/4 and all heights dyadic
_STEP_LIBRARY = (
    ("unit_square", ((0.0, 1.0, 0.0, 1.0, 1.0),)),
    (
        "two_blocks",
        (
            (0.25, 1.25, 0.5, 1.5, 0.5),
            (-1.0, -0.25, -1.0, -0.25, -0.5),
        ),
    ),
    (
        "axis_straddler",
        (
            (-1.5, 0.5, 0.0, 1.0, 0.75),
            (0.5, 1.0, -1.0, -0.25, -1.25),
        ),
    ),
    (
        "three_panels",
        (
            (-2.0, 2.0, -2.0, -1.0, 0.25),
            (-2.0, -1.0, -1.0, 1.0, 0.5),
            (1.0, 2.0, -1.0, 2.0, -0.75),
        ),
    ),
)


def _cmd_sheet_integrals(eff, out_dir, headers):
    beta = _getf(eff, "beta")
    c0 = _getf(eff, "c0")
    c1 = _getf(eff, "c1")
    tail = TailConstants(beta, c0, c1)
    cell = _getf(eff, "cell_size")
    if cell <= 0 or abs(0.25 / cell - round(0.25 / cell)) > 1e-9:
        raise ParameterError(
            f"cell_size must be positive and divide 0.25, got {cell}"
        )
    replicates = _geti(eff, "replicates", minimum=100)
    workers = _geti(eff, "workers", minimum=1)
    seed = _geti(eff, "seed", minimum=0)

    functions = []
    for _name, pieces in _STEP_LIBRARY:
        radius = max(max(abs(p[0]), abs(p[1]), abs(p[2]), abs(p[3])) for p in pieces)
        functions.append((pieces, int(round(radius / cell))))
    payload = (beta, c0, c1, cell, seed, tuple(functions))
    results = _map_replicates(_sheet_worker, payload, replicates, workers)
    values = np.array(results, dtype=float)

    summary = []
    for k, (name, pieces) in enumerate(_STEP_LIBRARY):
        law = integral_cf_params(StepFunction2D(pieces), tail)
        report = ecf_report(values[:, k], law)
        report.write_csv(os.path.join(out_dir, f"sheet_ecf_{name}.csv"), headers)
        summary.append((name, report.sup_abs_err, ecf_tolerance(replicates)))
    _write_rows(
        os.path.join(out_dir, "sheet_summary.csv"),
        headers,
        ("function", "sup_abs_err", "tolerance"),
        summary,
    )


def _cmd_point_process(eff, out_dir, headers):
    model = walk_from_string(eff["walk"])
    spec = kernel_from_string(eff["kernel"])
    tail = tail_constants(spec)
    regime = regime_of(model)
    n = _geti(eff, "n", minimum=2)
    grid = _getfs(eff, "time_grid")
    thetas = _getfs(eff, "thetas")
    replicates = _geti(eff, "replicates", minimum=100)
    workers = _geti(eff, "workers", minimum=1)
    seed = _geti(eff, "seed", minimum=0)
    intervals = _get_intervals(eff, "intervals")

    have_gp = eff.get("g_plus") is not None
    have_gm = eff.get("g_minus") is not None
    if have_gp != have_gm:
        raise ParameterError("g_plus and g_minus must be given together")
    if have_gp:
        g_plus, g_minus = _getf(eff, "g_plus"), _getf(eff, "g_minus")
    else:
        # quenched intensity from the replicate-0 environment
        alpha = model.alpha if regime is Regime.RECURRENT_LOCAL_TIME else None
        a_n = normalization_a_n(regime, n, tail.beta, alpha)
        field = simulate_occupation(model, n, grid, substream(seed, 0, ROLE_WALK))
        g_plus, g_minus = g_statistic(
            field,
            ThetaCombination(thetas, grid),
            a_n,
            tail.beta,
            mode_for_regime(regime),
            regime,
        )
    intensity = IntensitySpec(tail, g_plus, g_minus)

    payload = (eff["walk"], eff["kernel"], n, grid, thetas, seed, intervals)
    counts = np.array(
        _map_replicates(_pointset_counts_worker, payload, replicates, workers),
        dtype=float,
    )
    report = intensity_report_from_counts(counts, intensity, intervals)
    report.write_csv(os.path.join(out_dir, "intensity.csv"), headers)

    trend_beta = _getf(eff, "ppp_beta") if eff.get("ppp_beta") is not None else tail.beta
    trend = poisson_truncation_limit(
        _getf(eff, "ppp_a"),
        _getf(eff, "ppp_b"),
        trend_beta,
        _getfs(eff, "deltas"),
        replicates=_geti(eff, "trend_draws", minimum=100),
        seed=derive_key(seed, 0, ROLE_CONSTANTS),
    )
    trend.write_csv(os.path.join(out_dir, "truncation_trend.csv"), headers)


def _cmd_validate_kernel(eff, out_dir, headers):
    spec = kernel_from_string(eff["kernel"])
    samples = _geti(eff, "samples", minimum=1000)
    seed = _geti(eff, "seed", minimum=0)
    report = validate_assumptions(spec, samples, seed=derive_key(seed, 0, ROLE_CONSTANTS))
    report.write_csv(os.path.join(out_dir, "kernel_validation.csv"), headers)


_DISPATCH = {
    "sample-stable": _cmd_sample_stable,
    "estimate-constants": _cmd_estimate_constants,
    "ustat-transient": _cmd_ustat_transient,
    "ustat-planar": _cmd_ustat_planar,
    "ustat-localtime": _cmd_ustat_localtime,
    "sheet-integrals": _cmd_sheet_integrals,
    "point-process": _cmd_point_process,
    "validate-kernel": _cmd_validate_kernel,
}


def run(argv=None) -> None:
    args = _parse_args(argv)
    eff = _effective_config(args)
    out_dir = eff["out"]
    os.makedirs(out_dir, exist_ok=True)
    headers = _header_lines(args.subcommand, eff)
    _DISPATCH[args.subcommand](eff, out_dir, headers)


def main(argv=None) -> int:
    try:
        run(argv)
    except ParameterError as exc:
        print(f"error code=2 reason={exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"error code=3 reason={exc}", file=sys.stderr)
        return 3
    except RegimeError as exc:
        print(f"error code=4 reason={exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())

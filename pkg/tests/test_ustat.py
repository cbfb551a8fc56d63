import math

import numpy as np
import pytest

import oracles
from walkustat import (
    Deterministic,
    HeavyStepWalk,
    MODE_INCREMENTS,
    MODE_LEVELS,
    ParameterError,
    Regime,
    RegimeError,
    SimpleWalk,
    StableLawParams,
    ThetaCombination,
    compute_U,
    compute_U_at_checkpoints,
    ecf_report,
    ecf_tolerance,
    g_statistic,
    kernel_from_string,
    limit_G,
    local_time_exponent,
    mode_for_regime,
    normalization_a_n,
    sample_scenery,
    scaled_trajectory,
    simulate_occupation,
)
from walkustat._rng import substream
from walkustat.kernels import kernel_value


KERNELS = (
    "power:p=1,beta=0.8,density=uniform",
    "power:p=2,beta=0.5,density=gauss",
    "signed-power:p=1,beta=1.5,density=uniform",
    "reciprocal",
)


def _small_field(model, n, grid=(1.0,), seed=7):
    return simulate_occupation(model, n, grid, substream(seed, 0, 11))


def test_compute_U_matches_brute_force():
    for name in KERNELS:
        spec = kernel_from_string(name)
        for model, n in ((SimpleWalk(3), 120), (SimpleWalk(1), 60)):
            field = _small_field(model, n)
            scen = sample_scenery(field.sites, spec, key=3)
            r = field.range_size
            values = [
                [
                    0.0
                    if i == j
                    else kernel_value(
                        spec,
                        scen.coords[i],
                        scen.coords[j],
                        scen.signs[i],
                        scen.signs[j],
                    )
                    for j in range(r)
                ]
                for i in range(r)
            ]
            expect = oracles.brute_force_pair_sum(field.counts.tolist(), values)
            got = compute_U(field, scen, spec)
            assert got == pytest.approx(expect, rel=1e-10), name


def test_compute_U_checkpoints_last_equals_final():
    spec = kernel_from_string("power:p=1,beta=0.8,density=uniform")
    field = _small_field(SimpleWalk(3), 200, grid=(0.5, 1.0))
    scen = sample_scenery(field.sites, spec, key=1)
    traj = compute_U_at_checkpoints(field, scen, spec)
    assert traj.shape == (2,)
    assert traj[-1] == compute_U(field, scen, spec)


def test_alignment_is_enforced():
    spec = kernel_from_string("power:p=1,beta=0.8,density=uniform")
    field = _small_field(SimpleWalk(3), 100)
    scen = sample_scenery(field.sites[:-1], spec, key=1)
    with pytest.raises(ParameterError):
        compute_U(field, scen, spec)


def test_normalization_forms():
    assert normalization_a_n(Regime.TRANSIENT, 1000, 0.8) == pytest.approx(
        1000.0 ** 2.5
    )
    n = 5000
    assert normalization_a_n(
        Regime.RECURRENT_NO_LOCAL_TIME, n, 0.8
    ) == pytest.approx(n ** 2.5 * math.log(n) ** -0.5)
    delta = local_time_exponent(2.0, 0.8)
    assert delta == pytest.approx(1.0 - 0.5 + 1.0 / 1.6)
    assert normalization_a_n(
        Regime.RECURRENT_LOCAL_TIME, n, 0.8, alpha=2.0
    ) == pytest.approx(float(n) ** (2.0 * delta))
    with pytest.raises(ParameterError):
        normalization_a_n(Regime.RECURRENT_LOCAL_TIME, n, 0.8)  # alpha missing
    with pytest.raises(ParameterError):
        normalization_a_n(Regime.TRANSIENT, 0, 0.8)
    with pytest.raises(ParameterError):
        local_time_exponent(1.0, 0.8)  # alpha must exceed 1


def test_theta_combination_validation():
    combo = ThetaCombination((1.0, -2.0), (0.5, 1.0))
    assert combo.m == 2
    with pytest.raises(ParameterError):
        ThetaCombination((1.0,), (0.5, 1.0))  # length mismatch
    with pytest.raises(ParameterError):
        ThetaCombination((1.0, 1.0), (1.0, 0.5))  # grid not increasing
    with pytest.raises(ParameterError):
        ThetaCombination((0.0,), (1.0,))  # all-zero thetas
    with pytest.raises(ParameterError):
        ThetaCombination((1.0,), (0.0,))  # times must be positive


def test_mode_for_regime():
    assert mode_for_regime(Regime.TRANSIENT) == MODE_INCREMENTS
    assert mode_for_regime(Regime.RECURRENT_NO_LOCAL_TIME) == MODE_INCREMENTS
    assert mode_for_regime(Regime.RECURRENT_LOCAL_TIME) == MODE_LEVELS
    field = _small_field(SimpleWalk(3), 50)
    combo = ThetaCombination((1.0,), (1.0,))
    with pytest.raises(RegimeError):
        g_statistic(field, combo, 10.0, 0.8, MODE_LEVELS, regime=Regime.TRANSIENT)


def test_g_statistic_single_theta_matches_brute_force():
    field = _small_field(SimpleWalk(3), 150)
    combo = ThetaCombination((1.0,), (1.0,))
    for beta in (0.8, 1.5):
        gp, gm = g_statistic(field, combo, 1.0, beta, MODE_INCREMENTS)
        bp, bm = oracles.brute_force_signed_power_sums(field.counts.tolist(), beta)
        assert gp == pytest.approx(bp, rel=1e-12)
        assert gm == pytest.approx(bm, rel=1e-12)
    # negative theta flips the signed sum only
    gp, gm = g_statistic(
        field, ThetaCombination((-1.0,), (1.0,)), 1.0, 0.8, MODE_INCREMENTS
    )
    bp, _ = oracles.brute_force_signed_power_sums(field.counts.tolist(), 0.8)
    assert gp == pytest.approx(bp, rel=1e-12)
    assert gm == pytest.approx(-bp, rel=1e-12)


def _brute_g(dmat, vmat, beta):
    """|zeta|^beta sums with zeta = dmat @ vmat.T over ordered pairs."""
    zeta = dmat @ vmat.T
    plus = float(np.sum(np.abs(zeta) ** beta))
    minus = float(np.sum(np.sign(zeta) * np.abs(zeta) ** beta))
    return plus, minus


def test_g_statistic_multi_theta_increments():
    field = _small_field(SimpleWalk(3), 150, grid=(0.5, 1.0))
    combo = ThetaCombination((2.0, -1.0), (0.5, 1.0))
    beta = 0.8
    gp, gm = g_statistic(field, combo, 2.0, beta, MODE_INCREMENTS)
    d = field.increments().T.astype(float)
    tmax = np.array([[2.0, -1.0], [-1.0, -1.0]])
    bp, bm = _brute_g(d, d @ tmax, beta)
    scale = 2.0 ** -beta
    assert gp == pytest.approx(scale * bp, rel=1e-12)
    assert gm == pytest.approx(scale * bm, rel=1e-12)


def test_g_statistic_multi_theta_levels():
    field = _small_field(SimpleWalk(1), 150, grid=(0.5, 1.0))
    combo = ThetaCombination((1.0, 0.5), (0.5, 1.0))
    beta = 1.3
    gp, gm = g_statistic(field, combo, 3.0, beta, MODE_LEVELS)
    lv = field.checkpoint_counts.T.astype(float)
    bp, bm = _brute_g(lv, lv * np.array([1.0, 0.5])[None, :], beta)
    scale = 3.0 ** -beta
    assert gp == pytest.approx(scale * bp, rel=1e-12)
    assert gm == pytest.approx(scale * bm, rel=1e-12)


def test_g_statistic_grid_must_match():
    field = _small_field(SimpleWalk(3), 50, grid=(1.0,))
    with pytest.raises(ParameterError):
        g_statistic(field, ThetaCombination((1.0,), (2.0,)), 1.0, 0.8, MODE_INCREMENTS)


def test_limit_G_increments_closed_forms():
    k = 1.3
    # single time, theta = 1: K^2 t^2 on both components
    gp, gm = limit_G(
        Regime.TRANSIENT, ThetaCombination((1.0,), (2.0,)), 0.8, k_beta=k
    )
    assert gp == pytest.approx(k * k * 4.0, rel=1e-12)
    assert gm == pytest.approx(gp)
    # negative theta keeps G+ and flips G-
    gp, gm = limit_G(
        Regime.TRANSIENT, ThetaCombination((-2.0,), (1.0,)), 0.5, k_beta=k
    )
    assert gp == pytest.approx(k * k * 2.0 ** 0.5, rel=1e-12)
    assert gm == pytest.approx(-gp)
    # two times, hand-computed theta_max weighting
    beta = 0.8
    combo = ThetaCombination((3.0, -1.0), (1.0, 3.0))
    dt = (1.0, 2.0)
    tm = ((3.0, -1.0), (-1.0, -1.0))
    plus = sum(
        abs(tm[i][j]) ** beta * dt[i] * dt[j] for i in range(2) for j in range(2)
    )
    minus = sum(
        math.copysign(abs(tm[i][j]) ** beta, tm[i][j]) * dt[i] * dt[j]
        for i in range(2)
        for j in range(2)
    )
    gp, gm = limit_G(Regime.RECURRENT_NO_LOCAL_TIME, combo, beta, k_beta=k)
    assert gp == pytest.approx(k * k * plus, rel=1e-12)
    assert gm == pytest.approx(k * k * minus, rel=1e-12)
    with pytest.raises(ParameterError):
        limit_G(Regime.TRANSIENT, combo, beta)  # k_beta required


def test_limit_G_levels_brute_force():
    class Field:
        def __init__(self, idx, vals, dx):
            self.bin_indices = np.asarray(idx, dtype=np.int64)
            self.values = np.asarray(vals, dtype=float)
            self.delta_x = dx

    dx = 0.25
    f1 = Field([-2, 0, 1], [0.5, 2.0, 1.0], dx)
    f2 = Field([0, 1, 3], [1.0, 0.5, 0.25], dx)
    combo = ThetaCombination((1.0, -2.0), (0.5, 1.0))
    beta = 0.7
    gp, gm = limit_G(
        Regime.RECURRENT_LOCAL_TIME, combo, beta, local_time_fields=[f1, f2]
    )
    # dense brute force over the union of bins
    bins = range(-2, 4)
    l1 = {b: 0.0 for b in bins}
    l2 = dict(l1)
    l1.update(dict(zip([-2, 0, 1], [0.5, 2.0, 1.0])))
    l2.update(dict(zip([0, 1, 3], [1.0, 0.5, 0.25])))
    plus = minus = 0.0
    for x in bins:
        for y in bins:
            z = 1.0 * l1[x] * l1[y] - 2.0 * l2[x] * l2[y]
            plus += abs(z) ** beta
            minus += math.copysign(abs(z) ** beta, z) if z else 0.0
    assert gp == pytest.approx(dx * dx * plus, rel=1e-12)
    assert gm == pytest.approx(dx * dx * minus, rel=1e-12)
    with pytest.raises(ParameterError):
        limit_G(Regime.RECURRENT_LOCAL_TIME, combo, beta, local_time_fields=[f1])
    f3 = Field([0], [1.0], 0.5)
    with pytest.raises(ParameterError):
        limit_G(
            Regime.RECURRENT_LOCAL_TIME, combo, beta, local_time_fields=[f1, f3]
        )


def test_scaled_trajectory_determinism_and_scaling():
    spec = kernel_from_string("power:p=1,beta=0.8,density=uniform")
    a = scaled_trajectory(Deterministic(), spec, 200, (0.5, 1.0), 11, replicate=3)
    b = scaled_trajectory(Deterministic(), spec, 200, (0.5, 1.0), 11, replicate=3)
    assert a == b
    c = scaled_trajectory(Deterministic(), spec, 200, (0.5, 1.0), 11, replicate=4)
    assert a.raw != c.raw
    assert a.a_n == pytest.approx(200.0 ** 2.5)
    for r, s in zip(a.raw, a.scaled):
        assert s == pytest.approx(r / a.a_n, rel=1e-15)
    assert a.regime is Regime.TRANSIENT


def test_scaled_trajectory_local_time_regime():
    spec = kernel_from_string("signed-power:p=1,beta=1.5,density=uniform")
    t = scaled_trajectory(HeavyStepWalk(1.5), spec, 300, (1.0,), 5)
    assert t.regime is Regime.RECURRENT_LOCAL_TIME
    delta = local_time_exponent(1.5, 1.5)
    assert t.a_n == pytest.approx(300.0 ** (2 * delta))


def test_power_kernel_truncated_mean_closed_form():
    # For power:p=1,beta=0.8 with uniform scenery, h = |x - y|**(-1.25) and
    # |x - y| has density 2(1 - w) on (0, 1), so
    #   E[h ; h <= M] = 8*M**0.2 - 32/3 + (8/3)*M**(-0.6).
    # The -32/3 term is the per-pair location deficit left behind once the
    # heavy part of the sum has been matched to its limit law.
    import mpmath

    for M in (50.0, 1e4):
        lo = M ** (-0.8)
        quad = mpmath.quad(lambda w: w ** (-1.25) * 2 * (1 - w), [lo, 1])
        closed = 8 * M**0.2 - 32.0 / 3.0 + (8.0 / 3.0) * M ** (-0.6)
        assert float(quad) == pytest.approx(closed, rel=1e-10)


def test_ordered_pair_sum_matches_doubled_atom_law():
    # compute_U sums the symmetric kernel over ordered index pairs, so every
    # unordered pair of visited sites contributes the same heavy value twice.
    # A doubled atom 2*w has the tail of w rescaled by 2**beta, which turns
    # the per-pair law (A, B) into 2**(beta-1) * (A, B) for the sum.  On top
    # of that the kernel is bounded below by 1, leaving the finite-n location
    # lag (32/3) * n**2 / a_n (see the truncated-mean test above).  The
    # scaled sum must match the doubled-atom law after the lag is added back,
    # and must sit far from the single-atom law with the same constants.
    spec = kernel_from_string("power:p=1,beta=0.8,density=uniform")
    n, reps, beta = 500, 3000, 0.8
    vals = np.array(
        [
            scaled_trajectory(Deterministic(), spec, n, (1.0,), 515, r).scaled[0]
            for r in range(reps)
        ]
    )
    a_n = normalization_a_n(Regime.TRANSIENT, n, beta)
    lag = (32.0 / 3.0) * n * n / a_n
    zs = (0.25, 0.5, 1.0, 2.0)
    twin = 2.0 ** (beta - 1.0)
    single = ecf_report(vals, StableLawParams(beta, 2.0, 2.0), z_grid=zs)
    doubled = ecf_report(
        vals + lag, StableLawParams(beta, twin * 2.0, twin * 2.0), z_grid=zs
    )
    tol = ecf_tolerance(reps)
    assert doubled.sup_abs_err <= tol
    assert single.sup_abs_err > 2.0 * tol

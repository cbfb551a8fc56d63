import math

import numpy as np
import pytest

import oracles
from walkustat import (
    ParameterError,
    StableLawParams,
    TailConstants,
    ecf_report,
    ecf_tolerance,
    empirical_cf,
    sample_stable,
    stable_cf,
)
from walkustat._rng import ROLE_CONSTANTS, substream
from walkustat.stable import DEFAULT_Z_GRID, sin_integral_constant


def test_scale_constant_matches_quadrature():
    for beta in (0.3, 0.5, 0.8, 1.3, 1.5, 1.9):
        assert sin_integral_constant(beta) == pytest.approx(
            oracles.sine_integral(beta), rel=1e-9
        )


def test_scale_constant_frozen_corners():
    assert sin_integral_constant(0.5) == pytest.approx(
        oracles.SINE_INTEGRAL_HALF, abs=1e-14
    )
    assert sin_integral_constant(1.0) == pytest.approx(
        oracles.SINE_INTEGRAL_ONE, abs=1e-14
    )
    assert sin_integral_constant(1.5) == pytest.approx(
        oracles.SINE_INTEGRAL_3_HALVES, abs=1e-13
    )


def test_scale_constant_continuous_through_one():
    # the gamma-product form has a removable singularity at beta = 1; the
    # implementation must stay on the curve arbitrarily close to it
    center = math.pi / 2
    for eps in (1e-9, 1e-12):
        assert abs(sin_integral_constant(1.0 + eps) - center) < 1e-8
        assert abs(sin_integral_constant(1.0 - eps) - center) < 1e-8
    # local slope is about 0.906, so a 1e-4 step moves the value ~9.1e-5
    for eps in (1e-4,):
        assert abs(sin_integral_constant(1.0 + eps) - center) < 1.2e-4
        assert abs(sin_integral_constant(1.0 - eps) - center) < 1.2e-4


def test_cf_matches_independent_assembly():
    for beta, a, b in ((0.5, 1.0, 0.5), (0.8, 2.0, -1.0), (1.5, 1.0, 1.0)):
        law = StableLawParams(beta, a, b)
        for z in (-2.0, -0.5, 0.0, 0.25, 1.0, 3.0):
            got = stable_cf(law, np.array([z]))[0]
            want = oracles.stable_cf_reference(z, beta, a, b)
            assert got == pytest.approx(want, abs=1e-9)


def test_cf_beta_one_is_cauchy():
    law = StableLawParams(1.0, 2.0, 0.0)
    z = np.array([-1.0, 0.5, 2.0])
    got = stable_cf(law, z)
    want = np.exp(-np.abs(z) * (math.pi / 2) * 2.0)
    np.testing.assert_allclose(got, want, atol=1e-15)


def test_law_validation():
    with pytest.raises(ParameterError):
        StableLawParams(2.0, 1.0, 0.0)
    with pytest.raises(ParameterError):
        StableLawParams(0.0, 1.0, 0.0)
    with pytest.raises(ParameterError):
        StableLawParams(0.5, 1.0, 2.0)  # |B| > A
    with pytest.raises(ParameterError):
        StableLawParams(1.0, 1.0, 0.5)  # skew forbidden at beta = 1
    with pytest.raises(ParameterError):
        StableLawParams(0.5, -1.0, 0.0)


def test_degenerate_law_samples_zero():
    law = StableLawParams(0.7, 0.0, 0.0)
    rng = substream(1, 0, ROLE_CONSTANTS)
    out = sample_stable(law, rng, 100)
    assert np.all(out == 0.0)
    assert np.all(stable_cf(law, np.array([-1.0, 2.0])) == 1.0)


def test_sampler_matches_cf():
    # the full bridge certification lives in the acceptance suite; this is
    # a fast regression net over the three beta regimes and both skews
    cases = [(0.5, 1.0, 0.0), (0.5, 1.0, 1.0), (1.0, 1.0, 0.0), (1.6, 1.0, -1.0)]
    for i, (beta, a, b) in enumerate(cases):
        law = StableLawParams(beta, a, b)
        rng = substream(7, i, ROLE_CONSTANTS)
        samples = sample_stable(law, rng, 30_000)
        rep = ecf_report(samples, law)
        assert rep.sup_abs_err <= ecf_tolerance(30_000), (beta, a, b)


def test_sampler_skew_direction():
    law = StableLawParams(0.5, 1.0, 1.0)
    rng = substream(11, 0, ROLE_CONSTANTS)
    s = sample_stable(law, rng, 50_000)
    # B = +A pushes all the tail mass to the right
    assert np.mean(s > 10) > 5 * np.mean(s < -10)


def test_sampler_scalar_mode():
    law = StableLawParams(0.8, 1.0, 0.0)
    rng = substream(3, 0, ROLE_CONSTANTS)
    val = sample_stable(law, rng)
    assert np.isscalar(val) or np.ndim(val) == 0


def test_empirical_cf_exact_small_sample():
    z = np.array([0.5, 1.0])
    s = np.array([1.0, -2.0, 0.25])
    got = empirical_cf(s, z)
    want = np.mean(np.exp(1j * z[:, None] * s[None, :]), axis=1)
    np.testing.assert_allclose(got, want, rtol=1e-13)


def test_tail_constants_validation():
    with pytest.raises(ParameterError):
        TailConstants(0.5, 0.0, 0.0)
    with pytest.raises(ParameterError):
        TailConstants(0.5, -0.1, 1.0)
    with pytest.raises(ParameterError):
        TailConstants(1.0, 1.0, 0.5)  # beta = 1 needs matched tails
    tail = TailConstants(1.0, 0.3, 0.3)
    law = tail.law(2.0)
    assert law.A == pytest.approx(1.2)
    assert law.B == 0.0


def test_ecf_report_csv_roundtrip(tmp_path):
    law = StableLawParams(0.8, 1.0, 0.0)
    rng = substream(5, 0, ROLE_CONSTANTS)
    rep = ecf_report(sample_stable(law, rng, 2_000), law)
    path = tmp_path / "ecf.csv"
    rep.write_csv(path, ["seed=5"])
    lines = path.read_text().splitlines()
    assert lines[0] == "# seed=5"
    assert lines[1] == "z,ecf_re,ecf_im,target_re,target_im,abs_err"
    assert len(lines) == 2 + len(DEFAULT_Z_GRID)
    # shortest round-trip representation must parse back bit-exact
    z0, re0 = lines[2].split(",")[:2]
    assert float(z0) == DEFAULT_Z_GRID[0]
    assert float(re0) == rep.ecf[0].real

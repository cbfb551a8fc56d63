"""Reference values computed independently of the package under test.

Everything here uses mpmath quadrature/series or plain Python arithmetic,
never walkustat code, so agreement is evidence rather than tautology.
Frozen literals guard the mpmath computations themselves against silent
environment drift.
"""

import math

import mpmath as mp

mp.mp.dps = 30


# --- oscillatory integrals behind the stable characteristic function ------------

_HEAD = 2 * mp.pi


def sine_integral(beta: float) -> float:
    """int_0^inf sin(u) / u^beta du, 0 < beta < 2.

    The head [0, 2pi] comes from the exact power series of sin (plain
    quadrature loses digits at the u^(1-beta) endpoint singularity); the
    tail is oscillatory quadrature.
    """
    b = mp.mpf(beta)
    head = mp.nsum(
        lambda k: (-1) ** k * _HEAD ** (2 * k + 2 - b)
        / (mp.factorial(2 * k + 1) * (2 * k + 2 - b)),
        [0, mp.inf],
    )
    tail = mp.quadosc(
        lambda u: mp.sin(u) / u ** b, [_HEAD, mp.inf], period=2 * mp.pi
    )
    return float(head + tail)


def cosine_integral(beta: float) -> float:
    """int_0^inf cos(u) / u^beta du, compensated by -1 near zero for beta > 1."""
    if beta == 1.0:
        raise ValueError("divergent at beta = 1")
    b = mp.mpf(beta)
    tail = mp.quadosc(
        lambda u: mp.cos(u) / u ** b, [_HEAD, mp.inf], period=2 * mp.pi
    )
    if beta < 1:
        head = mp.nsum(
            lambda k: (-1) ** k * _HEAD ** (2 * k + 1 - b)
            / (mp.factorial(2 * k) * (2 * k + 1 - b)),
            [0, mp.inf],
        )
        return float(head + tail)
    # integrand (cos u - 1) / u^beta on the head, series starting at k = 1
    head = mp.nsum(
        lambda k: (-1) ** k * _HEAD ** (2 * k + 1 - b)
        / (mp.factorial(2 * k) * (2 * k + 1 - b)),
        [1, mp.inf],
    )
    # the -1 compensation integrated over the tail in closed form
    comp = _HEAD ** (1 - b) / (1 - b)
    return float(head + tail + comp)


# spot values (27+ digit quadrature, frozen)
SINE_INTEGRAL_HALF = 1.2533141373155003  # sqrt(pi/2)
SINE_INTEGRAL_ONE = math.pi / 2
SINE_INTEGRAL_3_HALVES = 2.5066282746310002  # sqrt(2*pi)
COSINE_INTEGRAL_HALF = 1.2533141373155003
COSINE_INTEGRAL_3_HALVES = -2.5066282746310002


# --- transient-walk visit constants ----------------------------------------------

def watson_return_probability() -> float:
    """Return probability of the simple random walk on Z^3 (Watson's value)."""
    u = (mp.sqrt(6) / (32 * mp.pi ** 3)
         * mp.gamma(mp.mpf(1) / 24) * mp.gamma(mp.mpf(5) / 24)
         * mp.gamma(mp.mpf(7) / 24) * mp.gamma(mp.mpf(11) / 24))
    return float(1 - 1 / u)


def k_beta_z3(beta: float) -> float:
    """E[N^(beta-1)] for N = total origin visits of the two-sided Z^3 walk.

    N = 1 + V1 + V2 with V1, V2 independent Geometric(1 - r) return counts,
    so P(N = j + 1) = (j + 1)(1 - r)^2 r^j and the expectation is an exact
    series in r.
    """
    r = mp.mpf(watson_return_probability())
    s = mp.nsum(lambda j: (j + 1) ** mp.mpf(beta) * r ** j, [0, mp.inf])
    return float((1 - r) ** 2 * s)


WATSON_RETURN_PROB = 0.3405373295509991
K_BETA_Z3_08 = 0.9009606610189223
K_BETA_Z3_15 = 1.369176044710027
MEAN_TOTAL_VISITS_Z3 = 2.032772118303956  # (1 + r) / (1 - r)

# planar simple walk: E[range] * log(n) / n -> pi
PLANAR_RANGE_CONSTANT = math.pi

# Brownian local time at the origin at t = 1: E L = sqrt(2 / pi)
MEAN_LOCAL_TIME_AT_ZERO = 0.7978845608028654


# --- brute-force pair statistics -------------------------------------------------

def brute_force_pair_sum(counts, values):
    """sum over ordered site pairs x != y of N(x) N(y) h(x, y).

    counts: length-R visit counts; values: R x R matrix of kernel values.
    Plain Python float accumulation in math.fsum for an independent answer.
    """
    r = len(counts)
    terms = []
    for i in range(r):
        for j in range(r):
            if i != j:
                terms.append(counts[i] * counts[j] * values[i][j])
    return math.fsum(terms)


def brute_force_signed_power_sums(counts, beta):
    """(sum |N(x)N(y)|^beta, sum sgn * |...|^beta) over ordered pairs incl x = y."""
    r = len(counts)
    plus, minus = [], []
    for i in range(r):
        for j in range(r):
            z = counts[i] * counts[j]
            plus.append(abs(z) ** beta)
            minus.append(math.copysign(abs(z) ** beta, z) if z != 0 else 0.0)
    return math.fsum(plus), math.fsum(minus)


# --- sheet integral law ----------------------------------------------------------

def step_function_power_mass(pieces, beta: float):
    """(sum |h|^beta area, sum sgn(h)|h|^beta area) for disjoint rectangles."""
    plus = math.fsum(
        abs(h) ** beta * (b - a) * (d - c) for (a, b, c, d, h) in pieces
    )
    minus = math.fsum(
        math.copysign(abs(h) ** beta, h) * (b - a) * (d - c)
        for (a, b, c, d, h) in pieces
    )
    return plus, minus


# --- compensated truncation drift ------------------------------------------------

def truncation_drift(c0, c1, beta, delta, g_minus):
    """(c0 - c1) * beta * delta^(1-beta) / (beta - 1) * G- for beta > 1."""
    return (c0 - c1) * beta * delta ** (1.0 - beta) / (beta - 1.0) * g_minus


# frozen: c0=2, c1=0, beta=1.5, delta=0.01, G-=1 -> 2 * 1.5 * 10 / 0.5 = 60
TRUNCATION_DRIFT_EXAMPLE = 60.0


def eta_interval(d, dp, c0, c1, g_plus, g_minus, beta, side):
    """Expected limit count on [d, d') (side=+1) or (-d', -d] (side=-1)."""
    w = d ** (-beta) - (0.0 if math.isinf(dp) else dp ** (-beta))
    if side > 0:
        return w * ((c0 + c1) * g_plus + (c0 - c1) * g_minus) / 2.0
    return w * ((c0 + c1) * g_plus - (c0 - c1) * g_minus) / 2.0


def stable_cf_reference(z, beta, a, b):
    """Characteristic function exp(-|z|^beta (I_beta A - i J_beta B sgn z)).

    I and J are evaluated by quadrature (cached per beta), so this is an
    independent check of both the constants and the CF assembly.
    """
    if beta == 1.0:
        if b != 0.0:
            raise ValueError("beta = 1 reference requires b = 0")
        scale, skew = math.pi / 2, 0.0
    else:
        scale, skew = _cf_constants(beta)
    mod = abs(z) ** beta
    re = -mod * scale * a
    im = mod * skew * b * (1.0 if z > 0 else -1.0 if z < 0 else 0.0)
    return complex(mp.exp(complex(re, im)))


_CF_CACHE = {}


def _cf_constants(beta):
    if beta not in _CF_CACHE:
        _CF_CACHE[beta] = (sine_integral(beta), cosine_integral(beta))
    return _CF_CACHE[beta]

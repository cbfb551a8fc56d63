"""Counter-based randomness helpers.

Two needs numpy's Generator API does not cover directly:

* scenery values must be a pure function of (stream key, site, component),
  so a site's value is identical no matter in which order sites are first
  visited and no matter how replicates are partitioned across workers;
* replicate substreams must be derivable from (master seed, replicate,
  role) without advancing or even creating the master stream.

Both are built on the splitmix64 finalizer, a cheap bijective mixer with
full avalanche. Site hashing is vectorized over uint64 arrays; substream
derivation goes through numpy's SeedSequence so the bulk generators stay
PCG64.
"""
from __future__ import annotations

import numpy as np

_MASK = 0xFFFFFFFFFFFFFFFF
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# role tags for substream derivation; fixed numbers, never reordered
ROLE_WALK = 1
ROLE_SCENERY = 2
ROLE_SHEET = 3
ROLE_CONSTANTS = 4
ROLE_LIMIT_WALK = 5


def mix64(x: int) -> int:
    """splitmix64 finalizer on a 64-bit integer (scalar, pure python)."""
    z = (x + _GAMMA) & _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def derive_key(*parts: int) -> int:
    """Chain integers into one 64-bit stream key.

    Order matters; derive_key(a, b) != derive_key(b, a) in general.
    """
    z = 0
    for p in parts:
        z = mix64(z ^ (int(p) & _MASK))
    return z


def _finalize_u64(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(_MIX1)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def site_uniforms(key: int, sites: np.ndarray, ncomp: int) -> np.ndarray:
    """Uniform(0,1) values keyed by (key, site, component).

    sites is an int64 array of site labels; returns shape (len(sites), ncomp)
    float64 in [0, 1). Pure function of its arguments.
    """
    s = np.asarray(sites, dtype=np.int64).view(np.uint64)
    base = _finalize_u64(np.uint64(key & _MASK) ^ (s + np.uint64(_GAMMA)))
    out = np.empty((s.size, ncomp), dtype=np.float64)
    for j in range(ncomp):
        h = _finalize_u64(base ^ np.uint64(mix64(j + 1)))
        out[:, j] = (h >> np.uint64(11)) * (1.0 / (1 << 53))
    return out


def substream(master_seed: int, replicate: int, role: int) -> np.random.Generator:
    """Independent PCG64 stream for (master seed, replicate index, role tag)."""
    ss = np.random.SeedSequence((int(master_seed), int(replicate), int(role)))
    return np.random.Generator(np.random.PCG64(ss))

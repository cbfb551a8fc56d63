"""Compiled O(R^2) pair loops.

These are the only hot loops in the package; everything else is numpy.
All sums are Kahan-compensated and run in ascending site order so results
are bit-reproducible for a given input regardless of how replicates were
scheduled. fastmath stays off: it would license the compiler to fold the
compensation away.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def pair_sum_maxnorm(coords, signs, weights, q):
    """sum over ordered site pairs x != y of
    signs[x]*signs[y]*weights[x]*weights[y] * ||coords[x]-coords[y]||_inf^(-q).

    Returns (value, bad) where bad counts coincident coordinate pairs
    (zero distance, kernel undefined); those pairs are skipped so the
    caller can decide to fail.
    """
    R, p = coords.shape
    total = 0.0
    comp = 0.0
    bad = 0
    for i in range(R):
        row = 0.0
        rowc = 0.0
        for j in range(i + 1, R):
            d = 0.0
            for k in range(p):
                a = abs(coords[i, k] - coords[j, k])
                if a > d:
                    d = a
            if d == 0.0:
                bad += 1
                continue
            term = signs[i] * signs[j] * weights[i] * weights[j] * d ** (-q)
            y = term - rowc
            t = row + y
            rowc = (t - row) - y
            row = t
        y = 2.0 * row - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total, bad


@njit(cache=True)
def pair_sum_reciprocal(values, weights):
    """sum over ordered site pairs x != y of
    weights[x]*weights[y] / (values[x] + values[y]).

    Returns (value, bad); bad counts pairs with values summing to zero.
    """
    R = values.shape[0]
    total = 0.0
    comp = 0.0
    bad = 0
    for i in range(R):
        row = 0.0
        rowc = 0.0
        for j in range(i + 1, R):
            s = values[i] + values[j]
            if s == 0.0:
                bad += 1
                continue
            term = weights[i] * weights[j] / s
            y = term - rowc
            t = row + y
            rowc = (t - row) - y
            row = t
        y = 2.0 * row - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total, bad


@njit(cache=True)
def g_bilinear(dmat, vmat, beta):
    """(sum |zeta|^beta, sum |zeta|^beta * sign(zeta)) over ordered pairs
    including the diagonal, where zeta[x, y] = sum_k dmat[x, k]*vmat[y, k].

    Requires zeta to be symmetric (callers build vmat = dmat @ Theta with a
    symmetric Theta), so the off-diagonal is folded with weight 2.
    """
    R, m = dmat.shape
    gp = 0.0
    gpc = 0.0
    gm = 0.0
    gmc = 0.0
    for i in range(R):
        rp = 0.0
        rpc = 0.0
        rm = 0.0
        rmc = 0.0
        for j in range(i, R):
            z = 0.0
            for k in range(m):
                z += dmat[i, k] * vmat[j, k]
            w = 1.0 if j == i else 2.0
            az = abs(z) ** beta
            sz = az if z > 0.0 else (-az if z < 0.0 else 0.0)
            y = w * az - rpc
            t = rp + y
            rpc = (t - rp) - y
            rp = t
            y = w * sz - rmc
            t = rm + y
            rmc = (t - rm) - y
            rm = t
        y = rp - gpc
        t = gp + y
        gpc = (t - gp) - y
        gp = t
        y = rm - gmc
        t = gm + y
        gmc = (t - gm) - y
        gm = t
    return gp, gm

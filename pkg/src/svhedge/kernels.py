"""Hot loops: path simulation and discrete hedging.

Each kernel exists twice: a numba version that loops per path and a numpy
version vectorised across paths. :func:`simulate` and :func:`hedge` pick one
according to :mod:`svhedge._jit` (env flag ``SVHEDGE_DISABLE_NUMBA``).
Both evaluate the same formulas in the same order.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import erfc

from . import _jit
from ._jit import njit

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


# ---------------------------------------------------------------- simulation

@njit(cache=True, nogil=True)
def _sigma_nb(code, p, y):
    if code == 0:
        return p[4]
    if code == 1:
        return y + p[0]
    if code == 2:
        return y * y + p[0]
    if code == 3:
        return math.sqrt(y * y + p[0])
    if code == 4:
        return math.sqrt(max(y, 0.0) + p[0])
    if code == 5:
        return math.exp(p[3] * y) + p[0]
    s = math.sin(y)
    return s * s + p[0]


@njit(cache=True, nogil=True)
def _step_factor_nb(code, p, y, dt, dz):
    a = p[1]
    b = p[2]
    if code == 0:
        return y
    if code == 1 or code == 6:
        return y + a * y * dt + b * y * dz
    if code == 4:
        yp = max(y, 0.0)
        return y + (a - b * yp) * dt + math.sqrt(yp) * dz
    return y + (a - b * y) * dt + dz


@njit(cache=True, nogil=True)
def _simulate_nb(code, p, s0, y0, corr, times, z):
    P, M = z.shape[0], z.shape[1]
    S = np.empty((P, M + 1))
    Y = np.empty((P, M + 1))
    rc = math.sqrt(1.0 - corr * corr)
    for j in range(P):
        lnS = math.log(s0)
        y = y0
        S[j, 0] = s0
        Y[j, 0] = max(y, 0.0) if code == 4 else y
        for k in range(M):
            dt = times[k + 1] - times[k]
            sq = math.sqrt(dt)
            z1 = z[j, k, 0]
            z2 = z[j, k, 1]
            s = _sigma_nb(code, p, y)
            lnS = lnS + (-0.5 * s * s * dt + s * sq * z1)
            y = _step_factor_nb(code, p, y, dt, sq * (corr * z1 + rc * z2))
            S[j, k + 1] = math.exp(lnS)
            Y[j, k + 1] = max(y, 0.0) if code == 4 else y
    return S, Y


def _simulate_np(model, times, z):
    P, M = z.shape[0], z.shape[1]
    S = np.empty((P, M + 1))
    Y = np.empty((P, M + 1))
    rc = math.sqrt(1.0 - model.corr * model.corr)
    lnS = np.full(P, math.log(model.s0))
    y = np.full(P, float(model.y0))
    S[:, 0] = model.s0
    Y[:, 0] = model.observe(y)
    for k in range(M):
        dt = times[k + 1] - times[k]
        sq = math.sqrt(dt)
        z1 = z[:, k, 0]
        z2 = z[:, k, 1]
        s = model.sigma(y)
        lnS = lnS + (-0.5 * s * s * dt + s * sq * z1)
        y = model.step_factor(times[k], y, dt, sq * (model.corr * z1 + rc * z2))
        S[:, k + 1] = np.exp(lnS)
        Y[:, k + 1] = model.observe(y)
    return S, Y


def simulate(model, times: np.ndarray, z: np.ndarray):
    """Paths on ``times`` driven by normals ``z`` of shape (P, M, 2)."""
    z = np.ascontiguousarray(z, dtype=float)
    if _jit.USE_NUMBA and model.code >= 0:
        return _simulate_nb(model.code, model.params, float(model.s0), float(model.y0),
                            float(model.corr), np.ascontiguousarray(times), z)
    return _simulate_np(model, times, z)


# ------------------------------------------------------------------- hedging

@njit(cache=True, nogil=True)
def _midpoint_weights(lam):
    """Per-substep constants of the midpoint-in-lambda rule.

    With lm the midpoint variance of a substep, the drift increment is
    phi(lx/sqrt(lm) + sqrt(lm)/2) * (lx/(2 lm) - 1/4) * dlam / sqrt(lm).
    """
    m = lam.shape[0] - 1
    inv_sm = np.empty(m)
    half_sm = np.empty(m)
    half_inv_lm = np.empty(m)
    wt = np.empty(m)
    for k in range(m):
        lm = 0.5 * (lam[k] + lam[k + 1])
        sm = math.sqrt(lm)
        inv_sm[k] = 1.0 / sm
        half_sm[k] = 0.5 * sm
        half_inv_lm[k] = 0.5 / lm
        wt[k] = _INV_SQRT_2PI * (lam[k] - lam[k + 1]) / sm
    return inv_sm, half_sm, half_inv_lm, wt


@njit(cache=True, nogil=True)
def _hedge_nb(S, lam, rev, K, lepinette, rate, price_weighted, liquidation, V0):
    P = S.shape[0]
    n = rev.shape[0] - 1
    inv_sm, half_sm, half_inv_lm, wt = _midpoint_weights(lam)
    pos = np.empty((P, n))
    V1 = np.empty(P)
    vol = np.empty(P)
    for j in range(P):
        V = V0
        J = 0.0
        corr = 0.0
        prev = 0.0
        for i in range(n):
            k0 = rev[i]
            k1 = rev[i + 1]
            x = S[j, k0]
            sl = math.sqrt(lam[k0])
            v = math.log(x / K) / sl + 0.5 * sl
            g = 0.5 * math.erfc(-v / _SQRT2)
            if lepinette:
                g = g - corr
            if i > 0:
                tr = abs(g - prev)
                J += x * tr if price_weighted else tr
            V += g * (S[j, k1] - x)
            if lepinette and i < n - 1:
                for k in range(k0, k1):
                    lx = math.log(S[j, k] / K)
                    vm = lx * inv_sm[k] + half_sm[k]
                    qm = lx * half_inv_lm[k] - 0.25
                    corr += math.exp(-0.5 * vm * vm) * qm * wt[k]
            pos[j, i] = g
            prev = g
        if liquidation:
            x = S[j, rev[n]]
            target = 1.0 if x > K else 0.0
            tr = abs(target - prev)
            J += x * tr if price_weighted else tr
        V1[j] = V - rate * J
        vol[j] = J
    return V1, vol, pos


def _hedge_np(S, lam, rev, K, lepinette, rate, price_weighted, liquidation, V0):
    P = S.shape[0]
    n = rev.shape[0] - 1
    inv_sm, half_sm, half_inv_lm, wt = _midpoint_weights(lam)
    pos = np.empty((P, n))
    V = np.full(P, V0)
    J = np.zeros(P)
    corr = np.zeros(P)
    prev = np.zeros(P)
    for i in range(n):
        k0 = rev[i]
        k1 = rev[i + 1]
        x = S[:, k0]
        sl = math.sqrt(lam[k0])
        v = np.log(x / K) / sl + 0.5 * sl
        g = 0.5 * erfc(-v / _SQRT2)
        if lepinette:
            g = g - corr
        if i > 0:
            tr = np.abs(g - prev)
            J += x * tr if price_weighted else tr
        V += g * (S[:, k1] - x)
        if lepinette and i < n - 1:
            for k in range(k0, k1):
                lx = np.log(S[:, k] / K)
                vm = lx * inv_sm[k] + half_sm[k]
                qm = lx * half_inv_lm[k] - 0.25
                corr += np.exp(-0.5 * vm * vm) * qm * wt[k]
        pos[:, i] = g
        prev = g
    if liquidation:
        x = S[:, rev[n]]
        tr = np.abs((x > K).astype(float) - prev)
        J += x * tr if price_weighted else tr
    return V - rate * J, J, pos


def hedge(S, lam, rev, K, lepinette, rate, price_weighted, liquidation, V0):
    """Run the discrete hedge on every row of ``S``.

    Returns terminal wealth, trading volume and the (P, n) position matrix;
    position ``i`` is held on the i-th revision interval.
    """
    S = np.ascontiguousarray(S, dtype=float)
    lam = np.ascontiguousarray(lam, dtype=float)
    rev = np.ascontiguousarray(rev, dtype=np.int64)
    args = (S, lam, rev, float(K), bool(lepinette), float(rate), bool(price_weighted),
            bool(liquidation), float(V0))
    if _jit.USE_NUMBA:
        return _hedge_nb(*args)
    return _hedge_np(*args)

"""Black-Scholes kernel in the cumulated-variance parameterisation.

All functions take the remaining variance ``lam`` (not calendar time) as the
primary argument, so the same code serves every adjusted-volatility profile.
Inputs broadcast like numpy ufuncs; scalar inputs give numpy scalars.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .errors import DomainError
from .schedule import VolatilityProfile, adjusted_vol_sq, lambda_of_t

SQRT2 = math.sqrt(2.0)
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _out(a):
    a = np.asarray(a)
    return a[()] if a.ndim == 0 else a


def norm_cdf(z):
    return _out(0.5 * erfc(-np.asarray(z, dtype=float) / SQRT2))


def norm_pdf(z):
    z = np.asarray(z, dtype=float)
    return _out(INV_SQRT_2PI * np.exp(-0.5 * z * z))


@dataclass(frozen=True)
class OptionSpec:
    """European call with payoff (x - K)^+."""

    strike: float = 1.0

    def __post_init__(self):
        if not self.strike > 0:
            raise DomainError("strike must be positive")

    def payoff(self, x):
        return _out(np.maximum(np.asarray(x, dtype=float) - self.strike, 0.0))


@dataclass(frozen=True)
class Greeks:
    price: float
    delta: float
    gamma: float


def _lam_pos(lam):
    lam = np.asarray(lam, dtype=float)
    if np.any(~(lam > 0)):
        raise DomainError("variance lambda must be positive")
    return lam


def v_value(lam, x, K=1.0):
    """ln(x/K)/sqrt(lam) + sqrt(lam)/2."""
    lam = _lam_pos(lam)
    sl = np.sqrt(lam)
    return _out(np.log(np.asarray(x, dtype=float) / K) / sl + 0.5 * sl)


def phi_tilde(lam, x, K=1.0):
    """Normal density at v(lam, x); extended by continuity to lam = 0."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise DomainError("variance lambda must be non-negative")
    x = np.asarray(x, dtype=float)
    lam, x = np.broadcast_arrays(lam, x)
    out = np.empty(lam.shape)
    pos = lam > 0
    sl = np.sqrt(lam[pos])
    out[pos] = norm_pdf(np.log(x[pos] / K) / sl + 0.5 * sl)
    out[~pos] = np.where(x[~pos] == K, INV_SQRT_2PI, 0.0)
    return _out(out)


def q_factor(lam, x, K=1.0):
    """ln(x/K)/(2 lam) - 1/4, i.e. minus sqrt(lam) times dv/dlam."""
    lam = _lam_pos(lam)
    return _out(np.log(np.asarray(x, dtype=float) / K) / (2.0 * lam) - 0.25)


def p_factor(lam, x, sigma_y, rho, K=1.0):
    sigma_y = np.asarray(sigma_y, dtype=float)
    if np.any(~(sigma_y > 0)):
        raise DomainError("volatility value must be positive")
    if not rho > 0:
        raise DomainError("rho must be positive")
    return _out(rho / sigma_y * q_factor(lam, x, K))


def bs_price(lam, x, K=1.0):
    """Call price with remaining variance lam; the payoff when lam = 0."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise DomainError("variance lambda must be non-negative")
    x = np.asarray(x, dtype=float)
    lam, x = np.broadcast_arrays(lam, x)
    out = np.array(np.maximum(x - K, 0.0), dtype=float)
    pos = lam > 0
    if np.any(pos):
        sl = np.sqrt(lam[pos])
        v = np.log(x[pos] / K) / sl + 0.5 * sl
        out[pos] = x[pos] * norm_cdf(v) - K * norm_cdf(v - sl)
    return _out(out)


def delta(lam, x, K=1.0):
    """Phi(v(lam, x)); at lam = 0 the step 1{x > K} with value 1/2 at K."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise DomainError("variance lambda must be non-negative")
    x = np.asarray(x, dtype=float)
    lam, x = np.broadcast_arrays(lam, x)
    out = np.array(np.where(x > K, 1.0, np.where(x == K, 0.5, 0.0)), dtype=float)
    pos = lam > 0
    if np.any(pos):
        sl = np.sqrt(lam[pos])
        out[pos] = norm_cdf(np.log(x[pos] / K) / sl + 0.5 * sl)
    return _out(out)


def gamma(lam, x, K=1.0):
    lam = _lam_pos(lam)
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("price must be positive")
    return _out(phi_tilde(lam, x, K) / (x * np.sqrt(lam)))


def greeks(lam: float, x: float, K: float = 1.0) -> Greeks:
    return Greeks(float(bs_price(lam, x, K)), float(delta(lam, x, K)), float(gamma(lam, x, K)))


def delta_time_derivative(t, x, profile: VolatilityProfile, K=1.0):
    """Time derivative of the hedge ratio Phi(v(lambda_t, x)).

    Chain rule with dlambda/dt = -sigma_hat_t^2 and dv/dlambda = -q/sqrt(lambda):
    phi_tilde * sigma_hat_t^2 * q / sqrt(lambda_t).
    """
    t = np.asarray(t, dtype=float)
    if np.any(t >= 1) or np.any(t < 0):
        raise DomainError("the delta time-derivative is defined for 0 <= t < 1")
    lam = lambda_of_t(t, profile)
    s2 = adjusted_vol_sq(t, profile)
    return _out(phi_tilde(lam, x, K) * s2 * q_factor(lam, x, K) / np.sqrt(lam))

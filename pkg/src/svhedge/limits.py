"""Limit functionals of the transaction-cost terms.

All cost limits share the integral

    int_0^inf lambda^(-1/2) phi_tilde(lambda, x) w(lambda, x) dlambda

with w = E|a Z + q| (J, J_0), |q| (J*) or 1 (the min identity). With
lambda = u^2 the lambda^(-1/2) factor disappears and the integrand is
2 phi(v(u^2, x)) w(u^2, x).

Two numerical routes are provided: adaptive QUADPACK for scalar arguments
and a vectorised composite Gauss-Legendre rule in log(u) for whole path
batches. They are cross-checked in the test-suite.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import erfc

from .errors import DomainError, NumericalError

SQRT_8_OVER_PI = math.sqrt(8.0 / math.pi)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class QuadratureConfig:
    rtol: float = 1e-9
    lam_max: float = 400.0
    substitution: bool = True

    def __post_init__(self):
        if not self.rtol > 0:
            raise DomainError("quadrature tolerance must be positive")
        if not self.lam_max > 0:
            raise DomainError("lam_max must be positive")


DEFAULT_QUAD = QuadratureConfig()


def _out(a):
    a = np.asarray(a)
    return a[()] if a.ndim == 0 else a


def _phi(z):
    return _INV_SQRT_2PI * np.exp(-0.5 * z * z)


def _excess(a):
    """phi(a) - |a| Phi(-|a|) >= 0, so that G(a) = |a| + 2 * excess."""
    aa = np.abs(a)
    with np.errstate(invalid="ignore", over="ignore"):
        out = _phi(aa) - aa * 0.5 * erfc(aa / math.sqrt(2.0))
    # b / a overflows to inf for subnormal scales; the excess vanishes there
    return np.where(np.isinf(aa), 0.0, out)


def g_func(a):
    """G(a) = E|Z + a| = 2 phi(a) + a (2 Phi(a) - 1)."""
    a = np.asarray(a, dtype=float)
    return _out(np.abs(a) + 2.0 * _excess(a))


def lambda_func(a):
    """Lambda(a) = Var|Z + a| = 1 + a^2 - G(a)^2."""
    a = np.asarray(a, dtype=float)
    d = _excess(a)
    return _out(1.0 - 4.0 * np.abs(a) * d - 4.0 * d * d)


def expected_abs_linear(a, b):
    """E|a Z + b| for a >= 0 (equals a G(b/a), and |b| at a = 0)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a < 0):
        raise DomainError("scale a must be non-negative")
    a, b = np.broadcast_arrays(a, b)
    out = np.array(np.abs(b), dtype=float)
    pos = a > 0
    with np.errstate(over="ignore"):
        ratio = b[pos] / a[pos]
    out[pos] = out[pos] + 2.0 * a[pos] * _excess(ratio)
    return _out(out)


def eta(sigma_y, rho, kappa):
    """Limit coefficient of min(S_1, K) for the corrected Lepinette strategy."""
    return _out(1.0 - kappa * np.asarray(sigma_y, dtype=float) / rho * SQRT_8_OVER_PI)


def eta_zero(sigma_y, rho, s1, kappa=None):
    """Constant-spread analogue of ``eta``.

    With ``kappa=None`` this is sigma(y1) / (rho S_1) * sqrt(8/pi) exactly;
    passing ``kappa`` multiplies by it.
    """
    out = np.asarray(sigma_y, dtype=float) / (rho * np.asarray(s1, dtype=float)) * SQRT_8_OVER_PI
    if kappa is not None:
        out = kappa * out
    return _out(out)


# ------------------------------------------------------------ integrands

def _u_max(logm, cfg: QuadratureConfig):
    # beyond this, v >= 9.5 and phi(v) < 1e-19 whatever the moneyness
    return np.maximum(math.sqrt(cfg.lam_max), 9.5 + np.sqrt(90.25 + 2.0 * np.abs(logm)))


def _weight(kind, q, scale):
    if kind == "one":
        return np.ones_like(q)
    if kind == "abs":
        return np.abs(q)
    return expected_abs_linear(scale, q)


def _integrand_u(u, logm, kind, scale):
    lam = u * u
    v = logm / u + 0.5 * u
    q = logm / (2.0 * lam) - 0.25
    return 2.0 * _phi(v) * _weight(kind, q, scale)


def _integrand_scalar(u, logm, kind, scale):
    if u == 0.0:
        if logm != 0.0:
            return 0.0
        q = -0.25
        dens = _INV_SQRT_2PI
    else:
        v = logm / u + 0.5 * u
        if abs(v) > 40.0:
            return 0.0
        q = logm / (2.0 * u * u) - 0.25
        dens = _INV_SQRT_2PI * math.exp(-0.5 * v * v)
    if kind == "one":
        w = 1.0
    elif kind == "abs":
        w = abs(q)
    elif scale > 0:
        c = abs(q) / scale
        w = abs(q) + 2.0 * scale * (_INV_SQRT_2PI * math.exp(-0.5 * c * c) - c * 0.5 * math.erfc(c / math.sqrt(2.0)))
    else:
        w = abs(q)
    return 2.0 * dens * w


def _check_args(x, sigma_y=None, rho=None, K=1.0):
    if not x > 0:
        raise DomainError("price must be positive")
    if not K > 0:
        raise DomainError("strike must be positive")
    if sigma_y is not None and not sigma_y > 0:
        raise DomainError("volatility value must be positive")
    if rho is not None and not rho > 0:
        raise DomainError("rho must be positive")


def _quad_integral(x, K, kind, scale, cfg: QuadratureConfig) -> float:
    logm = math.log(x / K)
    umax = float(_u_max(logm, cfg))
    if cfg.substitution:
        pts = []
        c = abs(logm)
        if c > 0:
            pts += [c / 8, c / 2, c, 2 * c, math.sqrt(2 * c)]
        pts = sorted({p for p in pts if 0 < p < umax})
        f = lambda u: _integrand_scalar(u, logm, kind, scale)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, err, *rest = integrate.quad(f, 0.0, umax, points=pts or None, epsabs=1e-15,
                                             epsrel=cfg.rtol, limit=1000, full_output=1)
    else:
        lmax = umax * umax

        def g(lam):
            return 0.5 * _integrand_scalar(math.sqrt(lam), logm, kind, scale)

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, err, *rest = integrate.quad(g, 0.0, lmax, weight="alg", wvar=(-0.5, 0.0),
                                             epsabs=1e-15, epsrel=cfg.rtol, limit=1000, full_output=1)
    if err > max(1e-13, 100 * cfg.rtol * abs(val)):
        raise NumericalError(
            "quadrature did not converge",
            {"value": val, "abserr": err, "x": x, "K": K, "kind": kind, "scale": scale},
        )
    return val


def j_limit(x, sigma_y, rho, K=1.0, quad: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Limiting dollar trading volume J(x, y, rho) (sigma_y = sigma(y))."""
    _check_args(x, sigma_y, rho, K)
    return x * _quad_integral(x, K, "ealin", sigma_y / rho, quad)


def j_star(x, K=1.0, quad: QuadratureConfig = DEFAULT_QUAD) -> float:
    """rho -> infinity limit of J; independent of the volatility state."""
    _check_args(x, K=K)
    return x * _quad_integral(x, K, "abs", 0.0, quad)


def j_zero(x, sigma_y, rho, K=1.0, quad: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Limiting share volume for a constant bid-ask spread (J without the factor x)."""
    _check_args(x, sigma_y, rho, K)
    return _quad_integral(x, K, "ealin", sigma_y / rho, quad)


def min_identity_residual(x, K=1.0, quad: QuadratureConfig = DEFAULT_QUAD) -> float:
    """x int lambda^(-1/2) phi_tilde dlambda - 2 min(x, K); zero analytically."""
    _check_args(x, K=K)
    return x * _quad_integral(x, K, "one", 0.0, quad) - 2.0 * min(x, K)


# ------------------------------------------------------------- batch route

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(12)


def _batch_integral(x, K, kind, scale, panels=48, cfg: QuadratureConfig = DEFAULT_QUAD):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(~(x > 0)):
        raise DomainError("price must be positive")
    scale = np.broadcast_to(np.asarray(scale, dtype=float), x.shape)
    logm = np.log(x / K)
    c = np.abs(logm)
    u_lo = np.where(c > 0, np.maximum(0.02 * c, 1e-14), 1e-14)
    u_hi = _u_max(logm, cfg)
    s_lo = np.log(u_lo)
    s_hi = np.log(u_hi)
    # split at the kink of |q| (J*) or at the density peak, both at u = sqrt(2|logm|)
    u_k = np.sqrt(2.0 * c)
    split = (u_k > u_lo * 1.5) & (u_k < u_hi / 1.5)
    s_k = np.where(split, np.log(np.where(split, u_k, 1.0)), 0.5 * (s_lo + s_hi))
    h = panels // 2
    frac = np.linspace(0.0, 1.0, h + 1)
    left = s_lo[:, None] + (s_k - s_lo)[:, None] * frac[None, :]
    right = s_k[:, None] + (s_hi - s_k)[:, None] * frac[None, 1:]
    edges = np.concatenate([left, right], axis=1)  # (N, panels + 1)
    a = edges[:, :-1, None]
    w = (edges[:, 1:] - edges[:, :-1])[:, :, None]
    s = a + 0.5 * w * (_GL_NODES[None, None, :] + 1.0)
    u = np.exp(s)
    lg = logm[:, None, None]
    f = _integrand_u(u, lg, kind, scale[:, None, None]) * u
    return np.sum(f * 0.5 * w * _GL_WEIGHTS[None, None, :], axis=(1, 2))


def j_limit_batch(x, sigma_y, rho, K=1.0, quad: QuadratureConfig = DEFAULT_QUAD) -> np.ndarray:
    """Vectorised :func:`j_limit` over arrays of prices and volatility values."""
    if not rho > 0:
        raise DomainError("rho must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return x * _batch_integral(x, K, "ealin", np.asarray(sigma_y, dtype=float) / rho, cfg=quad)


def j_star_batch(x, K=1.0, quad: QuadratureConfig = DEFAULT_QUAD) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return x * _batch_integral(x, K, "abs", 0.0, cfg=quad)


def j_zero_batch(x, sigma_y, rho, K=1.0, quad: QuadratureConfig = DEFAULT_QUAD) -> np.ndarray:
    if not rho > 0:
        raise DomainError("rho must be positive")
    return _batch_integral(x, K, "ealin", np.asarray(sigma_y, dtype=float) / rho, cfg=quad)


def min_identity_batch(x, K=1.0, quad: QuadratureConfig = DEFAULT_QUAD) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return x * _batch_integral(x, K, "one", 0.0, cfg=quad) - 2.0 * np.minimum(x, K)

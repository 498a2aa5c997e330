"""Revision grids and adjusted-volatility profiles.

Everything downstream is parameterised by the cumulated variance

    lambda_t = int_t^1 sigma_hat_s^2 ds,

which is finite up to maturity even when the instantaneous adjusted variance
blows up there (non-uniform grids, ``mu > 1``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

MU_MAX = 2.0


def _check_mu(mu: float) -> None:
    if not (1.0 <= mu < MU_MAX):
        raise DomainError(f"grid exponent mu must lie in [1, 2), got {mu!r}")


def revision_times(n: int, mu: float) -> np.ndarray:
    """Rebalancing dates ``t_i = 1 - (1 - i/n)**mu`` for ``i = 0..n``."""
    if int(n) != n or n < 1:
        raise DomainError(f"number of revisions must be a positive integer, got {n!r}")
    _check_mu(mu)
    n = int(n)
    s = 1.0 - np.arange(n + 1, dtype=float) / n
    t = 1.0 - s**mu
    t[0] = 0.0
    t[-1] = 1.0
    return t


@dataclass(frozen=True)
class RevisionSchedule:
    """Rebalancing grid plus the fine simulation grid nested inside it.

    Each revision interval ``(t_{i-1}, t_i]`` is cut into ``substeps`` equal
    pieces; revision date ``i`` sits at fine index ``i * substeps``.
    """

    n: int
    mu: float = 1.0
    substeps: int = 5
    times: np.ndarray = field(init=False, repr=False, compare=False)
    fine_times: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.substeps) != self.substeps or self.substeps < 1:
            raise DomainError(f"substeps must be a positive integer, got {self.substeps!r}")
        times = revision_times(self.n, self.mu)
        m = int(self.substeps)
        frac = np.arange(m, dtype=float) / m
        fine = (times[:-1, None] + np.diff(times)[:, None] * frac[None, :]).ravel()
        fine = np.append(fine, 1.0)
        times.setflags(write=False)
        fine.setflags(write=False)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "substeps", m)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "fine_times", fine)

    @property
    def n_fine(self) -> int:
        return self.n * self.substeps

    @property
    def revision_index(self) -> np.ndarray:
        return np.arange(self.n + 1, dtype=np.int64) * self.substeps


@dataclass(frozen=True)
class VolatilityProfile:
    """Deterministic adjusted-volatility schedule.

    ``mode="new"``: sigma_hat_t^2 = rho * sqrt(n f'(t)) with f the inverse of
    the grid map, giving lambda_t = lambda_0 (1 - t)^((mu+1)/(2 mu)) and
    lambda_0 = 2 sqrt(mu)/(mu+1) * rho * sqrt(n).

    ``mode="classic"``: constant sigma_hat^2 = sigma0^2 + rho n^(1/2 - alpha).
    """

    mode: str
    rho: float
    n: int
    mu: float = 1.0
    sigma0: float = 0.0
    alpha: float = 0.0

    def __post_init__(self):
        if self.mode not in ("new", "classic"):
            raise DomainError(f"unknown profile mode {self.mode!r}")
        if self.n < 1:
            raise DomainError("n must be >= 1")
        if self.mode == "new":
            if not self.rho > 0:
                raise DomainError("rho must be positive")
            _check_mu(self.mu)
        else:
            if self.rho < 0 or self.sigma0 < 0:
                raise DomainError("rho and sigma0 must be non-negative")
            if not 0.0 <= self.alpha <= 0.5:
                raise DomainError("alpha must lie in [0, 1/2]")
            if self.mu != 1.0:
                raise DomainError("classic profile is defined on the uniform grid (mu = 1)")
            if self.sigma0**2 + self.rho * self.n ** (0.5 - self.alpha) <= 0:
                raise DomainError("classic adjusted variance must be positive")

    @classmethod
    def new_form(cls, rho: float, n: int, mu: float = 1.0) -> "VolatilityProfile":
        return cls("new", rho, n, mu)

    @classmethod
    def classic(cls, sigma0: float, rho: float, n: int, alpha: float = 0.0) -> "VolatilityProfile":
        return cls("classic", rho, n, 1.0, sigma0, alpha)

    @property
    def mu_tilde(self) -> float:
        return 2.0 * math.sqrt(self.mu) / (self.mu + 1.0)

    @property
    def classic_variance(self) -> float:
        return self.sigma0**2 + self.rho * self.n ** (0.5 - self.alpha)

    @property
    def lambda0(self) -> float:
        if self.mode == "new":
            return self.mu_tilde * self.rho * math.sqrt(self.n)
        return self.classic_variance

    @property
    def beta(self) -> float:
        return self.mu / (2.0 * (self.mu + 1.0))

    @property
    def theta(self) -> float:
        """Normalisation n^beta rho^(2 beta) of the corrected error."""
        return self.n**self.beta * self.rho ** (2.0 * self.beta)

    def lam(self, t):
        return lambda_of_t(t, self)

    def sigma_hat_sq(self, t):
        return adjusted_vol_sq(t, self)


def adjusted_vol_sq(t, profile: VolatilityProfile):
    """Instantaneous adjusted variance sigma_hat_t^2 (undefined at t = 1)."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t >= 1):
        raise DomainError("adjusted variance is defined for 0 <= t < 1")
    if profile.mode == "classic":
        out = np.full_like(t, profile.classic_variance)
    else:
        mu = profile.mu
        out = profile.rho * math.sqrt(profile.n / mu) * (1.0 - t) ** ((1.0 - mu) / (2.0 * mu))
    return out[()] if out.ndim == 0 else out


def lambda_of_t(t, profile: VolatilityProfile):
    """Cumulated adjusted variance from t to maturity; exactly 0 at t = 1."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > 1):
        raise DomainError("lambda_t is defined for 0 <= t <= 1")
    if profile.mode == "classic":
        out = profile.classic_variance * (1.0 - t)
    else:
        out = profile.lambda0 * (1.0 - t) ** ((profile.mu + 1.0) / (2.0 * profile.mu))
    out = np.where(t == 1.0, 0.0, out)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class GridDiagnostics:
    indices: np.ndarray  # revision indices j kept
    ratios: np.ndarray  # dlambda_j / sqrt(dt_j)
    dlam_min: float
    dlam_max: float
    max_deviation: float  # max |ratio / rho - 1|


def grid_diagnostics(
    schedule: RevisionSchedule, profile: VolatilityProfile, lam_floor: float = 1.0
) -> GridDiagnostics:
    """Increment ratios ``dlambda_j / sqrt(dt_j)`` on the revision grid.

    Asymptotically these equal rho. Only intervals whose right-end variance
    ``lambda_{t_j}`` is at least ``lam_floor`` are kept: the last few
    intervals before maturity are O(1) in index space and never enter the
    asymptotic regime. ``lam_floor=0`` keeps every interval.
    """
    if profile.mode != "new":
        raise DomainError("grid diagnostics apply to the new-form profile")
    lam = lambda_of_t(schedule.times, profile)
    dlam = lam[:-1] - lam[1:]
    dt = np.diff(schedule.times)
    j = np.arange(1, schedule.n + 1)
    keep = lam[1:] >= lam_floor
    if lam_floor <= 0:
        keep[:] = True
    ratios = dlam[keep] / np.sqrt(dt[keep])
    if ratios.size == 0:
        return GridDiagnostics(j[keep], ratios, math.nan, math.nan, math.nan)
    return GridDiagnostics(
        indices=j[keep],
        ratios=ratios,
        dlam_min=float(dlam[keep].min()),
        dlam_max=float(dlam[keep].max()),
        max_deviation=float(np.max(np.abs(ratios / profile.rho - 1.0))),
    )

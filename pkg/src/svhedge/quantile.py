"""Quantile pricing: the cheapest capital fraction that hedges with probability 1 - eps."""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError
from .models import MarketModel, make_model, simulate_block

MIN_SAMPLES = 1000


def sin_squared_model(**overrides) -> MarketModel:
    """sigma(y) = sin(y)^2 + 0.1 with a geometric factor (a=-2, b=1, y0=2, corr 0.05)."""
    params = dict(sigma_min=0.1, a=-2.0, b=1.0, y0=2.0, corr=0.05)
    params.update(overrides)
    return make_model("sin_squared", **params)


@dataclass(frozen=True)
class QuantileConfig:
    eps: float = 0.001
    kappa: float = 0.001
    N: int = 100_000
    model: MarketModel = field(default_factory=sin_squared_model)
    seed: int = 0
    steps: int = 500
    K: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.eps < 1.0:
            raise DomainError("eps must lie in (0, 1)")
        if not 0.0 <= self.kappa < 1.0:
            raise DomainError("kappa must lie in [0, 1)")
        if self.N < MIN_SAMPLES:
            raise DomainError(f"need at least {MIN_SAMPLES} samples for a quantile price")
        if self.steps < 1:
            raise DomainError("steps must be positive")


def _hedge_value(S1, kappa, K):
    return (1.0 - kappa) * np.minimum(np.asarray(S1, dtype=float), K)


def upsilon(a, S1, kappa: float, s0: float = 1.0, K: float = 1.0) -> float:
    """Empirical P((1 - kappa) min(S_1, K) > (1 - a) S_0)."""
    if not 0.0 < a <= 1.0:
        raise DomainError("a must lie in (0, 1]")
    X = _hedge_value(S1, kappa, K)
    return float(np.mean(X > (1.0 - a) * s0))


def delta_epsilon(S1, eps: float, kappa: float, s0: float = 1.0, K: float = 1.0) -> float:
    """inf{a : upsilon(a) >= 1 - eps}, read off the sorted sample of X."""
    X = np.sort(_hedge_value(S1, kappa, K))
    N = X.size
    if not 0.0 < eps < 1.0:
        raise DomainError("eps must lie in (0, 1)")
    if eps * N < 1.0:
        raise DomainError(f"eps * N = {eps * N:g} < 1: quantile not resolvable")
    # upsilon(a) >= 1 - eps  iff  #{X <= (1 - a) S0} <= eps N, so the infimum sits at
    # order statistic floor(eps N) + 1; the tolerance absorbs eps * N landing a hair
    # below an integer through rounding
    m = min(N - 1, math.floor(eps * N + 1e-9))
    return float(1.0 - X[m] / s0)


def delta_curve(S1, eps_grid: Sequence[float], kappa: float, s0: float = 1.0, K: float = 1.0) -> np.ndarray:
    return np.array([delta_epsilon(S1, e, kappa, s0, K) for e in eps_grid])


@dataclass
class ReductionSurface:
    eps: np.ndarray
    r: np.ndarray
    values: np.ndarray  # (len(eps), len(r)) of (1 - delta) eps^-r
    one_minus_delta: np.ndarray
    reduced_price: np.ndarray  # (1 - delta) * price

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["eps", "r", "value"])
            for i, e in enumerate(self.eps):
                for j, r in enumerate(self.r):
                    w.writerow([repr(float(e)), repr(float(r)), repr(float(self.values[i, j]))])

    def price_to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["eps", "one_minus_delta", "reduced_price"])
            for e, d, p in zip(self.eps, self.one_minus_delta, self.reduced_price):
                w.writerow([repr(float(e)), repr(float(d)), repr(float(p))])


def reduction_surface(eps_grid, r_grid, S1, kappa: float, s0: float = 1.0, K: float = 1.0,
                      price: Optional[float] = None) -> ReductionSurface:
    """(1 - delta_eps) eps^-r on the grid, plus the reduced option price.

    ``price`` defaults to the frictionless call value estimated on the same sample.
    """
    eps = np.asarray(eps_grid, dtype=float)
    r = np.asarray(r_grid, dtype=float)
    keep = 1.0 - delta_curve(S1, eps, kappa, s0, K)
    vals = keep[:, None] * eps[:, None] ** (-r[None, :])
    if price is None:
        price = float(np.mean(np.maximum(np.asarray(S1, dtype=float) - K, 0.0)))
    return ReductionSurface(eps, r, vals, keep, keep * price)


def simulate_terminal(model: MarketModel, N: int, seed: int, steps: int = 500,
                      threads: int = 1, chunk: int = 2048) -> np.ndarray:
    """Terminal prices S_1 on a uniform grid; ordered by path index."""
    times = np.linspace(0.0, 1.0, steps + 1)

    def work(start):
        S, _ = simulate_block(model, times, seed, range(start, min(N, start + chunk)))
        return S[:, -1].copy()

    starts = list(range(0, N, chunk))
    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(work, starts))
    else:
        parts = [work(s) for s in starts]
    return np.concatenate(parts)


def quantile_price(cfg: QuantileConfig, threads: int = 1):
    """(delta_eps, terminal sample) for a config."""
    S1 = simulate_terminal(cfg.model, cfg.N, cfg.seed, cfg.steps, threads)
    return delta_epsilon(S1, cfg.eps, cfg.kappa, cfg.model.s0, cfg.K), S1

"""Stochastic-volatility market models and correlated path simulation.

Price and factor follow

    dS = sigma(y) S dW1,
    dy = F1(t, y) dt + F2(t, y) (r dW1 + sqrt(1 - r^2) dW2).

Paths are reproducible from ``(seed, path index)`` alone: each path draws its
own normals from a ``SeedSequence`` keyed by the pair, so results do not
depend on chunking or worker count.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from .errors import DomainError
from .schedule import RevisionSchedule

# Model codes shared with the compiled kernels; -1 means "Python callables".
KIND_CODES = {
    "constant": 0,
    "hull_white": 1,
    "uniform_elliptic": 2,
    "stein_stein": 3,
    "heston": 4,
    "scott": 5,
    "sin_squared": 6,
    "custom": -1,
}

# Number of normals drawn per fine substep (price driver, then factor driver).
DRAWS_PER_STEP = 2


@dataclass(frozen=True)
class MarketModel:
    """Price/volatility-factor pair; see :func:`make_model` for the catalog."""

    kind: str
    s0: float = 1.0
    y0: float = 0.0
    corr: float = 0.0
    sigma_min: float = 0.0
    a: float = 0.0
    b: float = 0.0
    delta: float = 0.0
    sigma0: float = 0.0
    sigma_fn: Optional[Callable] = None
    drift_fn: Optional[Callable] = None
    diffusion_fn: Optional[Callable] = None

    @property
    def code(self) -> int:
        return KIND_CODES[self.kind]

    @property
    def params(self) -> np.ndarray:
        return np.array([self.sigma_min, self.a, self.b, self.delta, self.sigma0], dtype=float)

    @property
    def vol_floor(self) -> float:
        """Lower bound of sigma(y) guaranteed by the catalog form."""
        if self.kind == "constant":
            return self.sigma0
        if self.kind in ("stein_stein", "heston"):
            return math.sqrt(self.sigma_min)
        if self.kind == "custom":
            return 0.0
        return self.sigma_min

    def sigma(self, y):
        y = np.asarray(y, dtype=float)
        k = self.kind
        if k == "constant":
            return np.full_like(y, self.sigma0)
        if k == "hull_white":
            return y + self.sigma_min
        if k == "uniform_elliptic":
            return y * y + self.sigma_min
        if k == "stein_stein":
            return np.sqrt(y * y + self.sigma_min)
        if k == "heston":
            return np.sqrt(np.maximum(y, 0.0) + self.sigma_min)
        if k == "scott":
            return np.exp(self.delta * y) + self.sigma_min
        if k == "sin_squared":
            return np.sin(y) ** 2 + self.sigma_min
        return np.asarray(self.sigma_fn(y), dtype=float) * np.ones_like(y)

    def drift(self, t, y):
        y = np.asarray(y, dtype=float)
        k = self.kind
        if k == "constant":
            return np.zeros_like(y)
        if k in ("hull_white", "sin_squared"):
            return self.a * y
        if k == "heston":
            return self.a - self.b * np.maximum(y, 0.0)
        if k in ("uniform_elliptic", "stein_stein", "scott"):
            return self.a - self.b * y
        return np.asarray(self.drift_fn(t, y), dtype=float) * np.ones_like(y)

    def diffusion(self, t, y):
        y = np.asarray(y, dtype=float)
        k = self.kind
        if k == "constant":
            return np.zeros_like(y)
        if k in ("hull_white", "sin_squared"):
            return self.b * y
        if k == "heston":
            return np.sqrt(np.maximum(y, 0.0))
        if k in ("uniform_elliptic", "stein_stein", "scott"):
            return np.ones_like(y)
        return np.asarray(self.diffusion_fn(t, y), dtype=float) * np.ones_like(y)

    def step_factor(self, t: float, y, dt: float, dz):
        """Euler substep of the factor given the correlated increment dz."""
        return y + self.drift(t, y) * dt + self.diffusion(t, y) * dz

    def observe(self, y):
        """Factor value as reported on the path (truncated for Heston)."""
        return np.maximum(y, 0.0) if self.kind == "heston" else y


def make_model(kind: str, **params) -> MarketModel:
    """Build a catalog model.

    ========================  ===========================  ================================
    kind                      sigma(y)                     factor dynamics
    ========================  ===========================  ================================
    ``constant``              sigma0                       frozen
    ``hull_white``            y + sigma_min                dy = y (a dt + b dZ)
    ``uniform_elliptic``      y^2 + sigma_min              dy = (a - b y) dt + dZ
    ``stein_stein``           sqrt(y^2 + sigma_min)        dy = (a - b y) dt + dZ
    ``heston``                sqrt(y + sigma_min)          dy = (a - b y) dt + sqrt(y) dZ
    ``scott``                 exp(delta y) + sigma_min     dy = (a - b y) dt + dZ
    ``sin_squared``           sin(y)^2 + sigma_min         dy = y (a dt + b dZ)
    ``custom``                sigma_fn(y)                  drift_fn(t, y), diffusion_fn(t, y)
    ========================  ===========================  ================================

    Common keywords: ``s0`` (default 1), ``y0``, ``corr``.
    """
    if kind not in KIND_CODES:
        raise DomainError(f"unknown model kind {kind!r}")
    known = {"s0", "y0", "corr", "sigma_min", "a", "b", "delta", "sigma0",
             "sigma_fn", "drift_fn", "diffusion_fn"}
    extra = set(params) - known
    if extra:
        raise DomainError(f"unknown model parameters {sorted(extra)}")
    m = MarketModel(kind=kind, **params)
    if not m.s0 > 0:
        raise DomainError("s0 must be positive")
    if not -1.0 <= m.corr <= 1.0:
        raise DomainError("correlation must lie in [-1, 1]")
    if kind == "constant":
        if not m.sigma0 > 0:
            raise DomainError("constant volatility needs sigma0 > 0")
    elif kind == "custom":
        if m.sigma_fn is None:
            raise DomainError("custom model needs sigma_fn")
        if m.drift_fn is None:
            object.__setattr__(m, "drift_fn", lambda t, y: np.zeros_like(y))
        if m.diffusion_fn is None:
            object.__setattr__(m, "diffusion_fn", lambda t, y: np.zeros_like(y))
    else:
        if not m.sigma_min > 0:
            raise DomainError("sigma_min must be positive")
        if kind in ("uniform_elliptic", "stein_stein", "heston", "scott") and not m.b > 0:
            raise DomainError("mean reversion speed b must be positive")
        if kind in ("hull_white", "sin_squared") and m.y0 < 0:
            raise DomainError("geometric factor needs y0 >= 0")
        if kind == "heston" and m.y0 < 0:
            raise DomainError("Heston variance factor needs y0 >= 0")
        if kind == "scott" and not m.delta >= 0:
            raise DomainError("Scott exponent delta must be non-negative")
    return m


@dataclass(frozen=True)
class PathBundle:
    """One simulated path sampled on the fine grid of a schedule."""

    S: np.ndarray
    y: np.ndarray
    times: np.ndarray
    revision_index: np.ndarray
    seed: int
    index: int

    @property
    def S_revision(self) -> np.ndarray:
        return self.S[self.revision_index]

    @property
    def y_revision(self) -> np.ndarray:
        return self.y[self.revision_index]


def path_generator(seed: int, index: int) -> np.random.Generator:
    """Independent stream for path ``index`` under master ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(int(index),))))


def draw_normals(seed: int, indices: Sequence[int], n_steps: int) -> np.ndarray:
    """Normals of shape (len(indices), n_steps, 2); xi1 then xi2 per substep."""
    out = np.empty((len(indices), n_steps, DRAWS_PER_STEP))
    for row, idx in enumerate(indices):
        out[row] = path_generator(seed, idx).standard_normal((n_steps, DRAWS_PER_STEP))
    return out


def simulate_block(model: MarketModel, fine_times: np.ndarray, seed: int, indices: Sequence[int]):
    """Price and factor arrays of shape (len(indices), len(fine_times))."""
    from . import kernels

    z = draw_normals(seed, indices, len(fine_times) - 1)
    return kernels.simulate(model, np.asarray(fine_times, dtype=float), z)


def simulate_paths(
    model: MarketModel, schedule: RevisionSchedule, N: int, seed: int, chunk: int = 256
) -> Iterator[PathBundle]:
    """Yield ``N`` paths in index order."""
    if N < 1:
        raise DomainError("need at least one path")
    for start in range(0, N, chunk):
        idx = range(start, min(N, start + chunk))
        S, y = simulate_block(model, schedule.fine_times, seed, idx)
        for row, i in enumerate(idx):
            yield PathBundle(S[row], y[row], schedule.fine_times, schedule.revision_index, int(seed), i)


def sigma_path(model: MarketModel, path: PathBundle) -> np.ndarray:
    return np.asarray(model.sigma(path.y), dtype=float)

"""Discrete Leland / Lepinette hedging with proportional transaction costs."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .analytics import bs_price, delta
from .errors import ConfigurationError, DomainError
from .limits import DEFAULT_QUAD, QuadratureConfig, eta, eta_zero, j_limit_batch, j_star_batch, j_zero_batch
from .models import MarketModel, PathBundle, simulate_block
from .schedule import RevisionSchedule, VolatilityProfile, lambda_of_t

STRATEGIES = ("leland", "lepinette")
COST_KINDS = ("dollar", "spread_price", "constant_spread")
CORRECTION_MODES = (
    "leland_fixed_rho",
    "leland_rho_of_n",
    "lepinette",
    "hf_constant_spread_leland",
    "hf_constant_spread_lepinette",
    "classic_const_vol",
)


@dataclass(frozen=True)
class CostModel:
    """Proportional cost regime.

    ``dollar``: kappa n^-alpha S |dgamma|; ``spread_price``: kappa n^-1/2 S |dgamma|;
    ``constant_spread``: kappa |dgamma| (volume counted in shares).
    """

    kind: str = "dollar"
    kappa: float = 0.01
    alpha: float = 0.0

    def __post_init__(self):
        if self.kind not in COST_KINDS:
            raise DomainError(f"unknown cost model {self.kind!r}")
        if self.kappa < 0:
            raise DomainError("kappa must be non-negative")
        if self.kind == "dollar" and not self.kappa < 1:
            raise DomainError("dollar-proportional kappa must be below 1")
        if not 0.0 <= self.alpha <= 0.5:
            raise DomainError("alpha must lie in [0, 1/2]")

    @property
    def price_weighted(self) -> bool:
        return self.kind != "constant_spread"

    def rate(self, n: int) -> float:
        """Multiplier turning trading volume into money."""
        if self.kind == "dollar":
            return self.kappa * n ** (-self.alpha)
        if self.kind == "spread_price":
            return self.kappa / math.sqrt(n)
        return self.kappa


@dataclass(frozen=True)
class HedgeOutcome:
    V0: float
    V1: float
    volume: float
    cost: float
    payoff: float
    raw_error: float
    S1: float
    y1: float
    sigma1: float
    gamma0: float
    positions: np.ndarray


@dataclass
class HedgeBatch:
    """Per-path outcomes of a Monte-Carlo run, ordered by path index."""

    V0: float
    V1: np.ndarray
    volume: np.ndarray
    S1: np.ndarray
    y1: np.ndarray
    sigma1: np.ndarray
    gamma0: float
    K: float
    positions: Optional[np.ndarray] = None

    @property
    def payoff(self) -> np.ndarray:
        return np.maximum(self.S1 - self.K, 0.0)

    @property
    def raw_error(self) -> np.ndarray:
        return self.V1 - self.payoff


def _check_consistent(schedule: RevisionSchedule, profile: VolatilityProfile):
    if schedule.n != profile.n:
        raise ConfigurationError("schedule and profile disagree on n")
    if profile.mode == "new" and schedule.mu != profile.mu:
        raise ConfigurationError("schedule and profile disagree on mu")


def _run_kernel(S, schedule, profile, K, strategy, rate, price_weighted, liquidation):
    if strategy not in STRATEGIES:
        raise DomainError(f"unknown strategy {strategy!r}")
    _check_consistent(schedule, profile)
    lam = lambda_of_t(schedule.fine_times, profile)
    V0 = float(bs_price(profile.lambda0, S[:, 0][0] if S.ndim == 2 else S[0], K))
    S2 = np.atleast_2d(S)
    return kernels.hedge(S2, lam, schedule.revision_index, K, strategy == "lepinette",
                         rate, price_weighted, liquidation, V0), V0


def leland_positions(path: PathBundle, schedule: RevisionSchedule, profile: VolatilityProfile,
                     K: float = 1.0) -> np.ndarray:
    """Hedge ratio Phi(v(lambda_{t_{i-1}}, S_{t_{i-1}})) held on each revision interval."""
    (_, _, pos), _ = _run_kernel(path.S, schedule, profile, K, "leland", 0.0, True, False)
    return pos[0]


def lepinette_positions(path: PathBundle, schedule: RevisionSchedule, profile: VolatilityProfile,
                        K: float = 1.0) -> np.ndarray:
    """Leland positions minus the running time-integral of the delta drift.

    The integral is accumulated per fine substep in the lambda variable
    (midpoint rule), which stays finite where sigma_hat^2 blows up.
    """
    (_, _, pos), _ = _run_kernel(path.S, schedule, profile, K, "lepinette", 0.0, True, False)
    return pos[0]


def apply_costs(positions, path: PathBundle, schedule: RevisionSchedule, cost: CostModel,
                liquidation: bool = False, K: float = 1.0):
    """Costs charged at t_1..t_n and the total volume.

    The position set up at t_0 is free; the trade at t_n is charged only in
    liquidation mode (to the terminal target 1{S_1 > K}).
    """
    positions = np.asarray(positions, dtype=float)
    n = schedule.n
    if positions.shape != (n,):
        raise DomainError("need one position per revision interval")
    S = path.S[schedule.revision_index]
    trades = np.zeros(n)
    trades[: n - 1] = np.abs(np.diff(positions))
    if liquidation:
        trades[n - 1] = abs((1.0 if S[n] > K else 0.0) - positions[-1])
    weights = S[1:] if cost.price_weighted else np.ones(n)
    vol_terms = weights * trades
    return cost.rate(n) * vol_terms, float(vol_terms.sum())


def hedge_path(path: PathBundle, schedule: RevisionSchedule, profile: VolatilityProfile,
               K: float, strategy: str, cost: CostModel, liquidation: bool = False,
               model: Optional[MarketModel] = None) -> HedgeOutcome:
    rate = cost.rate(schedule.n)
    (V1, vol, pos), V0 = _run_kernel(path.S, schedule, profile, K, strategy, rate,
                                     cost.price_weighted, liquidation)
    S1 = float(path.S[-1])
    y1 = float(path.y[-1])
    payoff = max(S1 - K, 0.0)
    sig1 = float(model.sigma(y1)) if model is not None else math.nan
    return HedgeOutcome(
        V0=V0, V1=float(V1[0]), volume=float(vol[0]), cost=rate * float(vol[0]), payoff=payoff,
        raw_error=float(V1[0]) - payoff, S1=S1, y1=y1, sigma1=sig1, gamma0=float(pos[0, 0]),
        positions=pos[0],
    )


def _default_chunk(n_fine: int) -> int:
    return int(max(16, min(1024, 4_000_000 // (n_fine + 1))))


def hedge_paths(model: MarketModel, schedule: RevisionSchedule, profile: VolatilityProfile,
                K: float, strategy: str, cost: CostModel, N: int, seed: int,
                liquidation: bool = False, threads: int = 1, chunk: Optional[int] = None,
                keep_positions: bool = False) -> HedgeBatch:
    """Simulate ``N`` paths and hedge each one; results ordered by path index."""
    if N < 1:
        raise DomainError("need at least one path")
    _check_consistent(schedule, profile)
    chunk = chunk or _default_chunk(schedule.n_fine)
    rate = cost.rate(schedule.n)
    lam = lambda_of_t(schedule.fine_times, profile)
    V0 = float(bs_price(profile.lambda0, model.s0, K))
    rev = schedule.revision_index
    lep = strategy == "lepinette"
    if strategy not in STRATEGIES:
        raise DomainError(f"unknown strategy {strategy!r}")

    def work(start):
        idx = range(start, min(N, start + chunk))
        S, Y = simulate_block(model, schedule.fine_times, seed, idx)
        V1, vol, pos = kernels.hedge(S, lam, rev, K, lep, rate, cost.price_weighted, liquidation, V0)
        return V1, vol, S[:, -1].copy(), Y[:, -1].copy(), (pos if keep_positions else None)

    starts = list(range(0, N, chunk))
    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(work, starts))
    else:
        parts = [work(s) for s in starts]
    y1 = np.concatenate([p[3] for p in parts])
    return HedgeBatch(
        V0=V0,
        V1=np.concatenate([p[0] for p in parts]),
        volume=np.concatenate([p[1] for p in parts]),
        S1=np.concatenate([p[2] for p in parts]),
        y1=y1,
        sigma1=np.asarray(model.sigma(y1), dtype=float),
        gamma0=float(delta(profile.lambda0, model.s0, K)),
        K=K,
        positions=np.concatenate([p[4] for p in parts]) if keep_positions else None,
    )


def check_mode(mode: str, strategy: str, cost: CostModel, profile: VolatilityProfile) -> None:
    """Raise ConfigurationError when a correction mode does not fit the run."""
    if mode not in CORRECTION_MODES:
        raise ConfigurationError(f"unknown correction mode {mode!r}")
    want_strategy = "lepinette" if "lepinette" in mode else "leland"
    if strategy != want_strategy:
        raise ConfigurationError(f"mode {mode} needs the {want_strategy} strategy")
    if mode.startswith("hf_"):
        if cost.kind != "constant_spread":
            raise ConfigurationError(f"mode {mode} needs the constant_spread cost model")
    elif cost.kind != "dollar" or cost.alpha != 0.0:
        raise ConfigurationError(f"mode {mode} needs dollar-proportional costs with alpha = 0")
    want_profile = "classic" if mode == "classic_const_vol" else "new"
    if profile.mode != want_profile:
        raise ConfigurationError(f"mode {mode} needs the {want_profile} volatility profile")


def corrected_errors(V1, S1, sigma1, mode: str, rho: float, kappa: float, K: float = 1.0,
                     quad: QuadratureConfig = DEFAULT_QUAD, eta0_kappa: bool = False) -> np.ndarray:
    """Replication error minus its known limit, vectorised over paths."""
    V1 = np.asarray(V1, dtype=float)
    S1 = np.asarray(S1, dtype=float)
    sigma1 = np.asarray(sigma1, dtype=float)
    h = np.maximum(S1 - K, 0.0)
    m = np.minimum(S1, K)
    raw = V1 - h
    if mode in ("leland_fixed_rho", "classic_const_vol"):
        return raw - m + kappa * j_limit_batch(S1, sigma1, rho, K, quad)
    if mode == "leland_rho_of_n":
        return raw - m + kappa * j_star_batch(S1, K, quad)
    if mode == "lepinette":
        return raw - eta(sigma1, rho, kappa) * m
    if mode == "hf_constant_spread_leland":
        return raw - m + kappa * j_zero_batch(S1, sigma1, rho, K, quad)
    if mode == "hf_constant_spread_lepinette":
        return raw - (1.0 - eta_zero(sigma1, rho, S1, kappa if eta0_kappa else None)) * m
    raise ConfigurationError(f"unknown correction mode {mode!r}")


def corrected_error(outcome: HedgeOutcome, mode: str, rho: float, kappa: float, K: float = 1.0,
                    quad: QuadratureConfig = DEFAULT_QUAD, eta0_kappa: bool = False) -> float:
    if math.isnan(outcome.sigma1):
        raise ConfigurationError("outcome lacks sigma(y_1); pass the model to hedge_path")
    return float(corrected_errors([outcome.V1], [outcome.S1], [outcome.sigma1], mode, rho, kappa,
                                  K, quad, eta0_kappa)[0])

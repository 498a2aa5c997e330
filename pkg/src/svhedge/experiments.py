"""Monte-Carlo harness: hedging tables, convergence-rate fits and super-hedging checks."""
from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy import stats

from . import __version__, _jit
from .errors import ConfigurationError, DomainError, RhoRuleError
from .hedging import CostModel, HedgeBatch, check_mode, corrected_errors, hedge_paths
from .models import MarketModel, make_model
from .schedule import RevisionSchedule, VolatilityProfile

CSV_HEADER = ["n", "gain_loss", "corrected_error", "ci_lo", "ci_hi", "price", "strategy"]
Z95 = 1.96


def c2_bound(mu: float) -> float:
    """Largest admissible exponent k in rho(n) = c n^k."""
    return mu / (2.0 * (mu + 2.0))


@dataclass
class ExperimentConfig:
    model: dict = field(default_factory=lambda: dict(
        kind="hull_white", sigma_min=2.0, a=-2.0, b=1.0, y0=2.0, corr=0.05, s0=1.0))
    n_values: List[int] = field(default_factory=lambda: [10, 50, 100, 500, 1000])
    mu: float = 1.0
    substeps: int = 5
    profile: str = "new"
    rho: float = 2.0
    rho_rule: Optional[dict] = None  # {"c": .., "k": ..}: rho(n) = c n^k
    profile_alpha: float = 0.0
    cost: dict = field(default_factory=lambda: dict(kind="dollar", kappa=0.01, alpha=0.0))
    strategy: str = "lepinette"
    correction: Optional[str] = "lepinette"
    N: int = 500
    seed: int = 0
    K: float = 1.0
    liquidation: bool = False
    eta0_kappa: bool = False

    def __post_init__(self):
        self.n_values = [int(n) for n in self.n_values]
        if not self.n_values or min(self.n_values) < 1:
            raise DomainError("n_values must be positive integers")
        if self.N < 2:
            raise DomainError("need at least two paths for a confidence interval")
        if self.rho_rule is not None:
            mu = self.mu if self.profile == "new" else 1.0
            k = float(self.rho_rule["k"])
            if not self.rho_rule["c"] > 0:
                raise DomainError("rho rule needs c > 0")
            if self.correction == "leland_rho_of_n" and not 0.0 < k < c2_bound(mu):
                raise RhoRuleError(
                    f"exponent k={k:g} violates 0 < k < mu/(2(mu+2)) = {c2_bound(mu):.6g}",
                    "profile.rule.k")
        elif self.correction == "leland_rho_of_n":
            raise RhoRuleError("leland_rho_of_n needs a growing rho(n) rule", "profile.rule")
        if self.correction is not None:
            # validate the pairing once, on the smallest n
            check_mode(self.correction, self.strategy, self.cost_model(), self.profile_at(self.n_values[0]))

    def market(self) -> MarketModel:
        params = dict(self.model)
        return make_model(params.pop("kind"), **params)

    def cost_model(self) -> CostModel:
        return CostModel(**self.cost)

    def rho_at(self, n: int) -> float:
        if self.rho_rule is None:
            return float(self.rho)
        return float(self.rho_rule["c"]) * n ** float(self.rho_rule["k"])

    def schedule_at(self, n: int) -> RevisionSchedule:
        mu = self.mu if self.profile == "new" else 1.0
        return RevisionSchedule(n, mu, self.substeps)

    def profile_at(self, n: int) -> VolatilityProfile:
        if self.profile == "new":
            return VolatilityProfile.new_form(self.rho_at(n), n, self.mu)
        if self.profile == "classic":
            sigma0 = float(self.model.get("sigma0", 0.0))
            return VolatilityProfile.classic(sigma0, self.rho_at(n), n, self.profile_alpha)
        raise DomainError(f"unknown profile mode {self.profile!r}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ReportRow:
    n: int
    gain_loss: float
    corrected_error: float
    ci_lo: float
    ci_hi: float
    price: float
    strategy: float
    N: int
    seed: int
    runtime: float


@dataclass
class ExperimentReport:
    rows: List[ReportRow]
    config: ExperimentConfig

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow([r.n] + [f"{getattr(r, k):.10g}" for k in CSV_HEADER[1:]])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    def format_table(self) -> str:
        head = f"{'n':>6} {'gain/loss':>11} {'corrected':>11} {'ci_lo':>11} {'ci_hi':>11} {'price':>10} {'strategy':>10}"
        lines = [head]
        for r in self.rows:
            lines.append(f"{r.n:>6d} {r.gain_loss:>11.7f} {r.corrected_error:>11.7f} {r.ci_lo:>11.7f} "
                         f"{r.ci_hi:>11.7f} {r.price:>10.7f} {r.strategy:>10.7f}")
        return "\n".join(lines)


def mean_ci(x) -> tuple:
    """Mean and normal-approximation 95% interval."""
    x = np.asarray(x, dtype=float)
    m = float(x.mean())
    half = Z95 * float(x.std(ddof=1)) / math.sqrt(x.size)
    return m, m - half, m + half


def run_batch(cfg: ExperimentConfig, n: int, threads: int = 1, N: Optional[int] = None,
              seed: Optional[int] = None) -> HedgeBatch:
    return hedge_paths(cfg.market(), cfg.schedule_at(n), cfg.profile_at(n), cfg.K, cfg.strategy,
                       cfg.cost_model(), N or cfg.N, cfg.seed if seed is None else seed,
                       liquidation=cfg.liquidation, threads=threads)


def batch_errors(cfg: ExperimentConfig, n: int, batch: HedgeBatch) -> np.ndarray:
    """Corrected errors (raw errors when no correction mode is set)."""
    if cfg.correction is None:
        return batch.raw_error
    return corrected_errors(batch.V1, batch.S1, batch.sigma1, cfg.correction, cfg.rho_at(n),
                            cfg.cost_model().kappa, cfg.K, eta0_kappa=cfg.eta0_kappa)


def run_table(cfg: ExperimentConfig, threads: int = 1) -> ExperimentReport:
    rows = []
    for n in cfg.n_values:
        t0 = time.perf_counter()
        batch = run_batch(cfg, n, threads)
        err = batch_errors(cfg, n, batch)
        m, lo, hi = mean_ci(err)
        rows.append(ReportRow(n, float(batch.raw_error.mean()), m, lo, hi, batch.V0, batch.gamma0,
                              cfg.N, cfg.seed, time.perf_counter() - t0))
    return ExperimentReport(rows, cfg)


@dataclass
class ConvergenceResult:
    n: np.ndarray
    rms: np.ndarray
    slope: float
    slope_se: float
    intercept: float
    metric: str

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "rms"])
        for n, r in zip(self.n, self.rms):
            w.writerow([int(n), f"{r:.10g}"])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


def loglog_fit(n, rms):
    """Least-squares slope of log rms against log n, with its standard error."""
    res = stats.linregress(np.log(np.asarray(n, dtype=float)), np.log(np.asarray(rms, dtype=float)))
    return float(res.slope), float(res.stderr), float(res.intercept)


def convergence_study(cfg: ExperimentConfig, ladder: Optional[Sequence[int]] = None,
                      metric: str = "corrected", threads: int = 1) -> ConvergenceResult:
    """RMS of the (corrected or raw) error along a ladder of n; fits the log-log slope."""
    if metric not in ("corrected", "raw"):
        raise DomainError("metric must be 'corrected' or 'raw'")
    ladder = [int(n) for n in (ladder or cfg.n_values)]
    if len(ladder) < 3:
        raise DomainError("need at least three rungs for a slope with an error bar")
    rms = []
    for n in ladder:
        batch = run_batch(cfg, n, threads)
        err = batch.raw_error if metric == "raw" else batch_errors(cfg, n, batch)
        rms.append(math.sqrt(float(np.mean(err * err))))
    slope, se, icpt = loglog_fit(ladder, rms)
    return ConvergenceResult(np.array(ladder), np.array(rms), slope, se, icpt, metric)


@dataclass
class SuperhedgeResult:
    n: np.ndarray
    fraction: np.ndarray
    mean_raw: np.ndarray
    tol: float

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "fraction", "mean_raw"])
        for n, f, m in zip(self.n, self.fraction, self.mean_raw):
            w.writerow([int(n), f"{f:.10g}", f"{m:.10g}"])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


def superhedge_check(cfg: ExperimentConfig, tol: float = 0.0, threads: int = 1) -> SuperhedgeResult:
    """Fraction of paths with V_1 >= h(S_1) - tol, per n."""
    if cfg.strategy != "leland":
        raise ConfigurationError("the super-hedging check runs Leland's strategy")
    frac, mean_raw = [], []
    for n in cfg.n_values:
        batch = run_batch(cfg, n, threads)
        frac.append(float(np.mean(batch.raw_error >= -tol)))
        mean_raw.append(float(batch.raw_error.mean()))
    return SuperhedgeResult(np.array(cfg.n_values), np.array(frac), np.array(mean_raw), tol)


def manifest(config: dict, seed: int, runtime: float, command: str, extra: Optional[dict] = None) -> dict:
    """Run record; its ``config`` entry can be fed back to the CLI as-is."""
    out = {
        "command": command,
        "version": __version__,
        "backend": _jit.backend(),
        "seed": int(seed),
        "runtime_seconds": round(float(runtime), 6),
        "config": config,
    }
    if extra:
        out.update(extra)
    return out


def write_manifest(path, data: dict) -> None:
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")

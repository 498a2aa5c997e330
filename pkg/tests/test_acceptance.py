"""Acceptance criteria, one pass/fail line each.

Run under pytest (lines appear in the "acceptance criteria" summary section) or
directly with ``python tests/test_acceptance.py``.
"""
import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from _report import record  # noqa: E402
from oracles import j_oracle, jstar_oracle, jzero_oracle  # noqa: E402
from svhedge import kernels  # noqa: E402
from svhedge.analytics import bs_price, delta, delta_time_derivative, gamma  # noqa: E402
from svhedge.config import experiment_config, parse_config, quantile_config  # noqa: E402
from svhedge.experiments import ExperimentConfig, convergence_study, mean_ci, run_batch, run_table  # noqa: E402
from svhedge.limits import (expected_abs_linear, j_limit, j_star, j_zero, lambda_func,  # noqa: E402
                            min_identity_residual)
from svhedge.models import simulate_block  # noqa: E402
from svhedge.quantile import delta_curve, delta_epsilon, simulate_terminal  # noqa: E402
from svhedge.schedule import RevisionSchedule, VolatilityProfile, grid_diagnostics, lambda_of_t  # noqa: E402

SEED = 2024

# published rows: n -> (mean corrected error, lower, upper)
TABLE1 = {
    10: (-0.2225988, -0.2363122, -0.2088854),
    50: (-0.0596194, -0.0670452, -0.0521936),
    100: (-0.0288526, -0.0350141, -0.0226911),
    500: (0.0032387, -0.0005821, 0.0070594),
    1000: (0.0012409, -0.0021596, 0.0046415),
}
TABLE2 = {
    10: (-0.0744180, -0.0813544, -0.0674816),
    100: (0.0007474, -0.0030916, 0.0045864),
    1000: (0.0003996, -0.0020559, 0.0028550),
}
PRICES1 = (0.7914033, 0.9399330, 0.9746527, 0.9991733, 0.9999300)
PRICES2 = (0.9246420, 0.9921661, 0.9984346, 0.9999977, 1.0)
NS = (10, 50, 100, 500, 1000)

_cache = {}


def _table(name):
    if name not in _cache:
        cfg = parse_config(name, seed=SEED)
        exp = experiment_config(cfg)
        if name == "table2":
            exp.n_values = sorted(TABLE2)
        _cache[name] = (exp, run_table(exp))
    return _cache[name]


# ------------------------------------------------------------------ criteria

def criterion_1():
    ok = True
    for rho, want, tag in ((2.0, PRICES1, "table 1"), (4.0, PRICES2, "table 2")):
        got = [float(bs_price(VolatilityProfile.new_form(rho, n, 1.0).lambda0, 1.0, 1.0)) for n in NS]
        worst = max(abs(g - w) for g, w in zip(got, want))
        ok &= record(f"C1 price column ({tag})", worst < 5e-6, f"max |diff| = {worst:.2e} (< 5e-6)")
    return ok


def _table_rows(label, name, published):
    exp, rep = _table(name)
    ok = True
    for row in rep.rows:
        mean, lo, hi = published[row.n]
        band = 3 * (hi - lo) / 2
        dev = abs(row.corrected_error - mean)
        ok &= record(f"{label} n={row.n}", dev <= band,
                     f"ours {row.corrected_error:+.5f} vs {mean:+.5f}, |diff| {dev:.5f} <= {band:.5f}")
    return ok


def criterion_2():
    return _table_rows("C2 table 1", "table1", TABLE1)


def criterion_3():
    return _table_rows("C3 table 2", "table2", TABLE2)


def criterion_4():
    xs = np.linspace(0.2, 5.0, 20)
    worst = max(abs(min_identity_residual(float(x), 1.0)) for x in xs)
    return record("C4 min identity", worst <= 1e-8, f"max |residual| = {worst:.2e} on 20 points (<= 1e-8)")


def criterion_5():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(10):
        x, sy, rho = rng.uniform(0.3, 3.0), rng.uniform(0.5, 3.0), rng.uniform(0.5, 5.0)
        for ours, oracle in ((j_limit(x, sy, rho), j_oracle(x, sy, rho)),
                             (j_star(x), jstar_oracle(x)),
                             (j_zero(x, sy, rho), jzero_oracle(x, sy, rho))):
            worst = max(worst, abs(ours / oracle - 1))
    ok = record("C5 J, J*, J0 vs Riemann oracle", worst <= 1e-6, f"max rel err {worst:.2e} on 10 tuples (<= 1e-6)")

    z = rng.standard_normal(10**6)
    zscores = []
    for a, b in ((1.0, 0.0), (0.5, 1.0), (2.0, -0.7)):
        s = np.abs(a * z + b)
        zscores.append(abs(s.mean() - expected_abs_linear(a, b)) / (s.std() / 1e3))
    for a in (0.0, 0.5, 2.0):
        s = np.abs(z + a)
        d = s - s.mean()
        v = np.mean(d * d)
        se = math.sqrt(np.mean((d * d - v) ** 2) / z.size)
        zscores.append(abs(v - lambda_func(a)) / se)
    worst_z = max(zscores)
    ok &= record("C5 E|aZ+b| and Lambda vs sampling", worst_z < 3, f"max |z| = {worst_z:.2f} (< 3 SE)")
    return ok


def criterion_6():
    ok = True
    for x in (0.5, 1.0, 2.0):
        rel = abs(j_limit(x, 2.0, 1e4) - j_star(x)) / j_star(x)
        ok &= record(f"C6 rho -> inf at x={x:g}", rel <= 1e-3, f"rel gap {rel:.2e} (<= 1e-3)")
    return ok


def criterion_7():
    kap, s0 = 0.01, 0.3
    rho = kap * s0 * math.sqrt(8 / math.pi)
    xs = np.concatenate([np.linspace(0.2, 5.0, 25), [1.0]])
    gaps = [kap * j_limit(x, s0, rho) - min(x, 1.0) for x in xs]
    ok = record("C7 kappa J >= min on x grid", min(gaps) >= 0, f"min gap {min(gaps):.2e} (>= 0)")
    exp = ExperimentConfig(model=dict(kind="constant", sigma0=s0), n_values=[1600], profile="classic",
                           rho=rho, profile_alpha=0.0, cost=dict(kind="dollar", kappa=kap),
                           strategy="leland", correction=None, N=10_000, seed=SEED)
    m, lo, hi = mean_ci(run_batch(exp, 1600).raw_error)
    ok &= record("C7 classic alpha=0 under-hedges", m < 0, f"mean raw {m:+.2e} (95% CI {lo:+.2e}, {hi:+.2e})")
    return ok


def criterion_8():
    res = convergence_study(experiment_config(parse_config("converge", seed=SEED)), metric="corrected")
    ok = record("C8 fixed-rho Leland slope", -0.35 <= res.slope <= -0.15,
                f"{res.slope:.3f} +/- {res.slope_se:.3f} in [-0.35, -0.15]")
    res = convergence_study(experiment_config(parse_config("leland_lott", seed=SEED)), metric="raw")
    ok &= record("C8 Leland-Lott raw slope", -0.65 <= res.slope <= -0.35,
                 f"{res.slope:.3f} +/- {res.slope_se:.3f} in [-0.65, -0.35]")
    return ok


def criterion_9():
    cfg = parse_config("fig2", seed=SEED)
    qc = quantile_config(cfg)
    S1 = simulate_terminal(qc.model, qc.N, qc.seed, qc.steps)
    keep = 1 - delta_epsilon(S1, 0.001, qc.kappa)
    curve = delta_curve(S1, cfg["quantile"]["eps_grid"], qc.kappa)
    mono = bool(np.all(np.diff(curve) <= 0))
    ok = record("C9 delta_eps nonincreasing in eps", mono, f"{np.round(curve, 4).tolist()}")
    ok &= record("C9 1 - delta_0.001 = 0.385 +/- 0.05", abs(keep - 0.385) <= 0.05,
                 f"ours {keep:.4f} (N={qc.N}, {qc.steps} steps)")
    return ok


def criterion_10():
    # wealth accounting: recompute V1 from the kernel's positions on 10^4 paths
    n, mu = 50, 1.3
    sch = RevisionSchedule(n, mu, 5)
    prof = VolatilityProfile.new_form(2.0, n, mu)
    exp = ExperimentConfig()
    S, _ = simulate_block(exp.market(), sch.fine_times, SEED, range(10_000))
    lam = lambda_of_t(sch.fine_times, prof)
    rate, K = 0.01, 1.0
    V0 = float(bs_price(prof.lambda0, 1.0, K))
    V1, _, pos = kernels.hedge(S, lam, sch.revision_index, K, True, rate, True, False, V0)
    Sr = S[:, sch.revision_index]
    gains = pos * np.diff(Sr, axis=1)
    costs = rate * Sr[:, 1:n] * np.abs(np.diff(pos, axis=1))
    ref = V0 + gains.sum(axis=1) - costs.sum(axis=1)
    scale = V0 + np.abs(gains).sum(axis=1) + costs.sum(axis=1)
    worst = float(np.max(np.abs(V1 - ref) / scale))
    ok = record("C10 wealth accounting", worst <= 1e-10, f"max rel residual {worst:.2e} on 10^4 paths")

    rng = np.random.default_rng(SEED)
    g_err = 0.0
    for _ in range(20):
        lam_, x = rng.uniform(0.05, 20), rng.uniform(0.3, 3)
        h = 1e-5 * x
        fd = (delta(lam_, x + h) - delta(lam_, x - h)) / (2 * h)
        g_err = max(g_err, abs(gamma(lam_, x) / fd - 1))
    ok &= record("C10 gamma finite difference", g_err <= 1e-5, f"max rel err {g_err:.2e} (<= 1e-5)")
    c_err = 0.0
    h = 1e-6
    for _ in range(20):
        t, x = rng.uniform(2 * h, 0.97), rng.uniform(0.5, 2.0)
        fd = (delta(lambda_of_t(t + h, prof), x) - delta(lambda_of_t(t - h, prof), x)) / (2 * h)
        c_err = max(c_err, abs(delta_time_derivative(t, x, prof) / fd - 1))
    ok &= record("C10 C_xt finite difference", c_err <= 1e-3, f"max rel err {c_err:.2e} (<= 1e-3)")

    devs = [grid_diagnostics(RevisionSchedule(m, 1.5, 5), VolatilityProfile.new_form(2.0, m, 1.5)).max_deviation
            for m in (100, 1000, 10_000)]
    shrink = devs[0] > devs[1] > devs[2]
    ok &= record("C10 grid diagnostics shrink", shrink, "max deviation " + ", ".join(f"{d:.2e}" for d in devs))

    exp1, rep = _table("table1")
    again = run_table(exp1).to_csv()
    ok &= record("C10 byte-identical rerun", again == rep.to_csv(), "table 1 CSV reproduced")
    return ok


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


@pytest.mark.parametrize("crit", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 11)])
def test_criterion(crit):
    assert crit()


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    print(f"{sum(results)}/{len(results)} criteria pass")
    sys.exit(0 if all(results) else 1)

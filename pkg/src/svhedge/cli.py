"""Command-line front end.

Exit codes: 0 success, 2 invalid config or arguments, 3 rho(n) rule outside
the admissible growth range, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, _jit
from .config import experiment_config, parse_config, quantile_config
from .errors import ConfigError, NumericalError
from .experiments import convergence_study, manifest, run_table, superhedge_check, write_manifest
from .limits import j_limit, j_star, j_zero, min_identity_residual
from .quantile import reduction_surface, simulate_terminal, delta_epsilon
from .schedule import RevisionSchedule, VolatilityProfile, grid_diagnostics

EXIT_OK, EXIT_CONFIG, EXIT_RHO, EXIT_NUMERIC = 0, 2, 3, 4
IDENTITY_TOL = 1e-8

DEFAULT_TEMPLATE = {
    "table": "table1",
    "converge": "converge",
    "quantile": "fig2",
    "superhedge": "superhedge",
    "diag": "table1",
    "limits": None,
}


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _write_rows(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def cmd_table(cfg, out: Path) -> int:
    exp = experiment_config(cfg)
    t0 = time.perf_counter()
    report = run_table(exp, threads=cfg["threads"])
    report.to_csv(out / "table.csv")
    write_manifest(out / "manifest.json", manifest(cfg, cfg["seed"], time.perf_counter() - t0, "table"))
    print(report.format_table())
    return EXIT_OK


def cmd_converge(cfg, out: Path) -> int:
    exp = experiment_config(cfg)
    t0 = time.perf_counter()
    res = convergence_study(exp, metric=cfg["converge"]["metric"], threads=cfg["threads"])
    res.to_csv(out / "converge.csv")
    extra = {"slope": res.slope, "slope_se": res.slope_se}
    write_manifest(out / "manifest.json",
                   manifest(cfg, cfg["seed"], time.perf_counter() - t0, "converge", extra))
    print(f"{'n':>6} {'rms':>12}")
    for n, r in zip(res.n, res.rms):
        print(f"{int(n):>6d} {r:>12.7f}")
    print(f"slope {res.slope:.4f} +/- {res.slope_se:.4f} ({res.metric} error)")
    return EXIT_OK


def cmd_superhedge(cfg, out: Path) -> int:
    exp = experiment_config(cfg)
    t0 = time.perf_counter()
    res = superhedge_check(exp, tol=cfg["superhedge"]["tol"], threads=cfg["threads"])
    res.to_csv(out / "superhedge.csv")
    write_manifest(out / "manifest.json", manifest(cfg, cfg["seed"], time.perf_counter() - t0, "superhedge"))
    print(f"{'n':>6} {'fraction':>10} {'mean raw':>12}")
    for n, f, m in zip(res.n, res.fraction, res.mean_raw):
        print(f"{int(n):>6d} {f:>10.4f} {m:>12.7f}")
    return EXIT_OK


def cmd_quantile(cfg, out: Path) -> int:
    qc = quantile_config(cfg)
    q = cfg["quantile"]
    t0 = time.perf_counter()
    S1 = simulate_terminal(qc.model, qc.N, qc.seed, qc.steps, threads=cfg["threads"])
    d = delta_epsilon(S1, qc.eps, qc.kappa, qc.model.s0, qc.K)
    surf = reduction_surface(q["eps_grid"], q["r_grid"], S1, qc.kappa, qc.model.s0, qc.K)
    surf.to_csv(out / "surface.csv")
    surf.price_to_csv(out / "price.csv")
    extra = {"delta_eps": d, "one_minus_delta": 1.0 - d}
    write_manifest(out / "manifest.json",
                   manifest(cfg, cfg["seed"], time.perf_counter() - t0, "quantile", extra))
    print(f"eps = {qc.eps:g}: delta = {d:.6f}, 1 - delta = {1 - d:.6f}")
    print(f"{'eps':>8} {'1-delta':>10} {'reduced price':>14}")
    for e, k, p in zip(surf.eps, surf.one_minus_delta, surf.reduced_price):
        print(f"{e:>8.4f} {k:>10.6f} {p:>14.6f}")
    return EXIT_OK


def cmd_limits(cfg, out: Path, check_identity: bool) -> int:
    if check_identity:
        xs = np.linspace(0.2, 5.0, 20)
        res = [min_identity_residual(float(x), 1.0) for x in xs]
        _write_rows(out / "identity.csv", ["x", "residual"], [[_fmt(x), _fmt(r)] for x, r in zip(xs, res)])
        print(f"{'x':>8} {'residual':>12}")
        for x, r in zip(xs, res):
            print(f"{x:>8.4f} {r:>12.3e}")
        worst = max(abs(r) for r in res)
        print(f"max |residual| = {worst:.3e} (tolerance {IDENTITY_TOL:g})")
        return EXIT_OK if worst <= IDENTITY_TOL else EXIT_NUMERIC
    lim = cfg["limits"]
    rows = []
    print(f"{'x':>8} {'J':>12} {'J*':>12} {'J0':>12} {'kappa J - min':>14}")
    for x in lim["x_grid"]:
        J = j_limit(x, lim["sigma_y"], lim["rho"], lim["K"])
        Js = j_star(x, lim["K"])
        J0 = j_zero(x, lim["sigma_y"], lim["rho"], lim["K"])
        gap = lim["kappa"] * J - min(x, lim["K"])
        rows.append([_fmt(x), _fmt(J), _fmt(Js), _fmt(J0), _fmt(gap)])
        print(f"{x:>8.4f} {J:>12.7f} {Js:>12.7f} {J0:>12.7f} {gap:>14.7f}")
    _write_rows(out / "limits.csv", ["x", "J", "J_star", "J_zero", "kappa_J_minus_min"], rows)
    return EXIT_OK


def cmd_diag(cfg, out: Path) -> int:
    sch_cfg = cfg["schedule"]
    prof = cfg["profile"]
    floor = cfg["diag"]["lam_floor"]
    rows = []
    print(f"backend: {_jit.backend()}", file=sys.stderr)
    print(f"{'n':>6} {'lambda0':>10} {'kept':>6} {'max dev':>10} {'dlam min':>10} {'dlam max':>10}")
    for n in sch_cfg["n"]:
        rho = prof["rule"]["c"] * n ** prof["rule"]["k"] if "rule" in prof else prof["rho"]
        profile = VolatilityProfile.new_form(rho, n, sch_cfg["mu"])
        d = grid_diagnostics(RevisionSchedule(n, sch_cfg["mu"], sch_cfg["substeps"]), profile, floor)
        rows.append([n, _fmt(profile.lambda0), len(d.indices), _fmt(d.max_deviation),
                     _fmt(d.dlam_min), _fmt(d.dlam_max)])
        print(f"{n:>6d} {profile.lambda0:>10.4f} {len(d.indices):>6d} {d.max_deviation:>10.2e} "
              f"{d.dlam_min:>10.4f} {d.dlam_max:>10.4f}")
    _write_rows(out / "diag.csv", ["n", "lambda0", "kept", "max_deviation", "dlam_min", "dlam_max"], rows)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="svhedge", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"svhedge {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "table": "hedging table: gain/loss, corrected error with 95%% interval, price, initial delta",
        "converge": "log-log slope of the RMS error along the n ladder",
        "limits": "limit functionals J, J*, J0 on an x grid",
        "quantile": "quantile price factor and reduction surface",
        "superhedge": "fraction of paths whose terminal wealth covers the payoff",
        "diag": "revision-grid increment diagnostics",
    }
    for name, text in helps.items():
        sp = sub.add_parser(name, help=text, description=text)
        sp.add_argument("--config", metavar="PATH",
                        help="TOML/JSON config, a run manifest, or a shipped template name "
                             f"(default: {DEFAULT_TEMPLATE[name] or 'built-in defaults'})")
        sp.add_argument("--seed", type=int, metavar="U64", help="override the master seed")
        sp.add_argument("--out", default=".", metavar="DIR", help="output directory (default: .)")
        sp.add_argument("--threads", type=int, metavar="N", help="worker threads for path batches")
        if name == "limits":
            sp.add_argument("--check-identity", action="store_true",
                            help="check x int lambda^-1/2 phi dlambda = 2 min(x, K) on 20 points in [0.2, 5]")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.threads is not None and args.threads < 1:
            raise ConfigError("must be at least 1", "threads")
        source = args.config or DEFAULT_TEMPLATE[args.command]
        if source is None:
            from .config import validate

            cfg = validate({})
            if args.seed is not None:
                cfg["seed"] = args.seed
        else:
            cfg = parse_config(source, seed=args.seed, threads=args.threads)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "table":
            return cmd_table(cfg, out)
        if args.command == "converge":
            return cmd_converge(cfg, out)
        if args.command == "superhedge":
            return cmd_superhedge(cfg, out)
        if args.command == "quantile":
            return cmd_quantile(cfg, out)
        if args.command == "limits":
            return cmd_limits(cfg, out, args.check_identity)
        return cmd_diag(cfg, out)
    except ConfigError as exc:
        _log(f"config error: {exc}")
        return exc.exit_code
    except NumericalError as exc:
        _log(f"numerical failure: {exc}")
        _log(json.dumps(exc.diagnostics, default=str, sort_keys=True))
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

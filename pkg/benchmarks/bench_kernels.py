"""Compare the numba and numpy kernels on path simulation and hedging.

    python benchmarks/bench_kernels.py [--paths 2000] [--n 500] [--repeat 3]
"""
import argparse
import time

import numpy as np

from svhedge import _jit, kernels
from svhedge.models import draw_normals, make_model
from svhedge.schedule import RevisionSchedule, VolatilityProfile, lambda_of_t


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--paths", type=int, default=2000)
    ap.add_argument("--n", type=int, default=500)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    model = make_model("hull_white", sigma_min=2.0, a=-2.0, b=1.0, y0=2.0, corr=0.05)
    sch = RevisionSchedule(args.n, 1.0)
    prof = VolatilityProfile.new_form(2.0, args.n)
    lam = lambda_of_t(sch.fine_times, prof)
    z = draw_normals(1, range(args.paths), sch.n_fine)

    results = {}
    for name in ("numba", "numpy"):
        _jit.set_backend(name)
        # warm-up compiles (or loads the on-disk cache) outside the timing
        S, _ = kernels.simulate(model, sch.fine_times, z[:2])
        kernels.hedge(S, lam, sch.revision_index, 1.0, True, 0.01, True, False, 0.99)
        t_sim, (S, _) = best_of(lambda: kernels.simulate(model, sch.fine_times, z), args.repeat)
        t_hedge, out = best_of(
            lambda: kernels.hedge(S, lam, sch.revision_index, 1.0, True, 0.01, True, False, 0.99),
            args.repeat)
        results[name] = (t_sim, t_hedge, S, out[0])
        print(f"{name:>6}: simulate {t_sim:8.3f}s  hedge (Lepinette) {t_hedge:8.3f}s")

    nb, npy = results["numba"], results["numpy"]
    print(f"speed-up: simulate x{npy[0] / nb[0]:.1f}, hedge x{npy[1] / nb[1]:.1f}")
    print(f"max |S diff| {np.max(np.abs(nb[2] - npy[2])):.2e}, max |V1 diff| {np.max(np.abs(nb[3] - npy[3])):.2e}")


if __name__ == "__main__":
    main()

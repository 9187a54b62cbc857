"""Time the compiled and numpy kernel backends side by side.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--full-run]

``--full-run`` also times the bundled case study end to end under each
backend (one subprocess per backend, selected through ELASTIC_DR_PURE_PYTHON).
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from elastic_dr import kernels


def cases(T=24, n_draws=24 * 235):
    rng = np.random.default_rng(0)
    D0 = rng.uniform(0.5, 20, T)
    E = rng.uniform(0, 0.05, (T, T))
    np.fill_diagonal(E, -rng.uniform(0.1, 0.6, T))
    price = rng.uniform(1, 10, T)
    peak = (rng.random(T) < 0.4).astype(np.uint8)
    out = np.empty(T)
    mean = rng.uniform(0.2, 0.9, n_draws)
    sd = 0.1 * mean
    draws = np.empty(n_draws)

    def truncnorm(mod):
        g = np.random.default_rng(1)
        return lambda: mod.truncnorm_fill(g.bit_generator, mean, sd, mean - sd, mean + sd, draws, 10_000)

    return {
        f"truncnorm_fill ({n_draws} draws)": truncnorm,
        "respond_into (24 h)": lambda mod: lambda: mod.respond_into(D0, E, price, 5.0, 0.1, 0.0, out),
        "psi_at (24 h)": lambda mod: lambda: mod.psi_at(D0, E, price, 5.0, 0.1, 0.0, peak),
        "bisect_lambda (24 h)": lambda mod: lambda: mod.bisect_lambda(D0, E, price, 5.0, 0.0, peak, -40.0, 40.0,
                                                                    1e-9, 200),
    }


def bench(repeat: int):
    found = kernels.backends()
    names = list(found)
    print(f"{'kernel':<34}" + "".join(f"{n:>14}" for n in names) + ("     speedup" if len(names) > 1 else ""))
    for label, factory in cases().items():
        times = []
        for name in names:
            fn = factory(found[name])
            number = max(1, int(0.2 / max(timeit.timeit(fn, number=1), 1e-7)))
            best = min(timeit.repeat(fn, number=number, repeat=repeat)) / number
            times.append(best)
        row = f"{label:<34}" + "".join(f"{t * 1e6:>12.1f}us" for t in times)
        if len(times) > 1:
            row += f"{times[names.index('python')] / times[names.index('cython')]:>11.1f}x"
        print(row)


def full_run():
    code = ("import time; from elastic_dr.scenario import load_scenario, simulate; "
            "from elastic_dr.cli import DEFAULT_CONFIG; s = load_scenario(DEFAULT_CONFIG); "
            "t = time.perf_counter(); simulate(s); print(time.perf_counter() - t)")
    for label, flag in (("cython", "0"), ("python", "1")):
        env = {**os.environ, "ELASTIC_DR_PURE_PYTHON": flag}
        secs = float(subprocess.run([sys.executable, "-c", code], env=env, check=True, capture_output=True,
                                    text=True).stdout)
        print(f"case study, 3 models, 100 SPEM replications [{label}]: {secs:.2f} s")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--full-run", action="store_true")
    args = p.parse_args()
    print(f"selected backend: {kernels.BACKEND}")
    bench(args.repeat)
    if args.full_run:
        full_run()


if __name__ == "__main__":
    main()

"""Wall-clock comparison of the compiled and pure-Python RK4 kernels.

    python3 benchmarks/bench_kernels.py [--T 200] [--repeat 3]
"""
import argparse
import time

import numpy as np

from sdde_stab import _rk4py, kernels
from sdde_stab.integrator import integrate
from sdde_stab.model import DelayFunction, Model, make_admissible


def timed(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--T", type=float, default=200.0)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()

    model = Model(0.5, DelayFunction.rational_bump(1.0))
    phi = make_admissible(model, 0.1)
    run = lambda: integrate(model, phi, args.T)  # noqa: E731

    compiled = kernels.integrate_rk4
    backends = [("python", _rk4py.integrate_rk4)]
    if kernels.BACKEND == "cython":
        backends.insert(0, ("cython", compiled))
    results = {}
    for name, fn in backends:
        kernels.integrate_rk4 = fn
        results[name] = timed(run, args.repeat)
    kernels.integrate_rk4 = compiled

    steps = int(round(args.T / 1e-3))
    for name, (secs, traj) in results.items():
        print(f"{name:>7}: {secs:8.3f} s  ({steps / secs / 1e6:6.2f} M steps/s)  x(T)={traj.xs[-1]:.15g}")
    if len(results) == 2:
        a, b = results["cython"][1], results["python"][1]
        print(f"speedup {results['python'][0] / results['cython'][0]:.1f}x, "
              f"max |difference| {np.max(np.abs(a.xs - b.xs)):.1e}")


if __name__ == "__main__":
    main()

"""Compare the compiled and pure-Python cycle kernels.

    python3 benchmarks/bench_kernels.py [--cycles N] [--repeat R]
"""

import argparse
import time

from concrete_fatigue import kernels
from concrete_fatigue.loading import CycleDiscretization
from concrete_fatigue.material import MaterialParameters
from concrete_fatigue.simulator import _kargs


def timed(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cycles", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    p = MaterialParameters()
    disc = CycleDiscretization()
    const, ka = p.constants(), _kargs(p, disc)
    backends = {"python": kernels.python_backend}
    if kernels.compiled_backend is not None:
        backends["compiled"] = kernels.compiled_backend
    else:
        print("compiled extension not built; timing the Python kernels only")

    results = {}
    for name, k in backends.items():
        n = args.cycles if name == "compiled" else max(args.cycles // 10, 1)
        dt, out = timed(lambda: k.run_cycles(const, 0.0, 20.0, 75.0, disc.substeps, n, *ka),
                        args.repeat)
        results[name] = (n, dt, out)
        print(f"{name:9s} {n:7d} cycles  {dt:8.4f} s  {dt / n * 1e6:9.2f} us/cycle")

    if len(results) == 2:
        n_c, dt_c, _ = results["compiled"]
        n_p, dt_p, out_p = results["python"]
        speedup = (dt_p / n_p) / (dt_c / n_c)
        same = kernels.compiled_backend.run_cycles(const, 0.0, 20.0, 75.0, disc.substeps, n_p, *ka) == out_p
        print(f"speedup   {speedup:.1f}x   identical results: {same}")


if __name__ == "__main__":
    main()

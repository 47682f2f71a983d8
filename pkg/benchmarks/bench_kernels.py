"""Compare the compiled and pure-Python kernel backends.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``. Each kernel is
timed on both backends with the same inputs and the outputs are compared.
"""

import argparse
import timeit

import numpy as np

from bfklab import _kernels_py

try:
    from bfklab import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None


def cases():
    rng = np.random.default_rng(0)
    lam = np.sort(rng.uniform(1.0, 1e6, 20000))
    ts = np.geomspace(4e-5, 0.05, 240)
    vals = rng.standard_normal(200000)
    return {
        "heat_trace (20k eigenvalues x 240 t)": ("heat_trace", (lam, ts)),
        "compensated_sum (200k terms)": ("compensated_sum", (vals,)),
        "bessel_i_ratio_all (n <= 20000, x = 17.3)": ("bessel_i_ratio_all", (20000, 17.3)),
    }


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    backends = {"python": _kernels_py}
    if _compiled is not None:
        backends["cython"] = _compiled
    else:
        print("compiled backend not built; timing the fallback only")
    print(f"{'kernel':<44} " + " ".join(f"{b:>12}" for b in backends) + "    speedup  max rel diff")
    for label, (name, arg) in cases().items():
        times, outs = [], []
        for impl in backends.values():
            fn = getattr(impl, name)
            outs.append(np.atleast_1d(fn(*arg)))
            times.append(min(timeit.repeat(lambda: fn(*arg), number=1, repeat=args.repeat)))
        diff = 0.0
        if len(outs) == 2:
            diff = float(np.max(np.abs(outs[0] - outs[1]) / np.maximum(np.abs(outs[0]), 1e-300)))
        speed = f"{times[0] / times[-1]:>9.1f}x" if len(times) == 2 else " " * 10
        print(f"{label:<44} " + " ".join(f"{t * 1e3:>10.2f}ms" for t in times) + f"  {speed}  {diff:.1e}")


if __name__ == "__main__":
    main()

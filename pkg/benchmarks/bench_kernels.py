"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--scale 1.0] [--repeat 3]
"""

import argparse
import time

import numpy as np

from sotadc import _kernels
from sotadc.device import ideal_devices


def _best(fn, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def cases(scale=1.0):
    n = max(10, int(40_000 * scale))
    devices = ideal_devices()
    thresholds = np.array([d.i_crit_p for d in devices])
    gains = np.ones(len(devices))
    inputs = np.linspace(0.0, 1.1 * thresholds.max(), n)
    codes, _ = _kernels.sweep_codes(inputs, thresholds, gains)
    tri = np.concatenate([np.linspace(0, 0.06, n // 4), np.linspace(0.06, -0.06, n // 2), np.linspace(-0.06, 0, n // 4)])
    d = devices[0]
    return {
        "sweep_codes": (inputs, thresholds, gains),
        "hysteresis_trace": (tri, d.i_crit_p, d.i_crit_ap, d.r_p, d.r_ap, True),
        "first_reach": (inputs, codes, len(devices)),
    }


def run(scale=1.0, repeat=3):
    rows = []
    for name, args in cases(scale).items():
        py = _best(getattr(_kernels.python, name), args, repeat)
        c = _best(getattr(_kernels.compiled, name), args, repeat) if _kernels.compiled else None
        rows.append((name, len(args[0]), py, c))
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scale", type=float, default=1.0)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    print(f"{'kernel':<18}{'samples':>9}{'python (ms)':>14}{'compiled (ms)':>15}{'speedup':>10}")
    for name, n, py, c in run(args.scale, args.repeat):
        if c is None:
            print(f"{name:<18}{n:>9}{py * 1e3:>14.2f}{'n/a':>15}{'n/a':>10}")
        else:
            print(f"{name:<18}{n:>9}{py * 1e3:>14.2f}{c * 1e3:>15.3f}{py / c:>9.0f}x")


if __name__ == "__main__":
    main()

"""Time the compiled kernels against the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--size N] [--repeats R]
"""

import argparse
import json

from sramyield.bench import run_bench


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=100_000)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()
    report, timings = run_bench(args.size, args.repeats)
    print(json.dumps(report, indent=2))
    print(f"{'kernel':14s} {'numpy ms':>10s} {'cython ms':>10s} {'speedup':>8s}")
    for name, t in timings.items():
        c = t.get("cython_s")
        c_ms = "-" if c is None else f"{c * 1e3:.2f}"
        sp = "-" if c is None else f"{t['speedup']:.2f}x"
        print(f"{name:14s} {t['python_s'] * 1e3:10.2f} {c_ms:>10s} {sp:>8s}")

if __name__ == "__main__":
    main()

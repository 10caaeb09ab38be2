#!/usr/bin/env python3
"""Benchmark the compiled digest kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--sizes 4096,65536,1048576]

Times bucket accumulation (the per-byte inner loop of digest
computation) and body distance scoring (the per-pair inner loop of
clustering and scanning) through both backends, then prints a table.
"""

from __future__ import annotations

import argparse
import random
import time

from maskwatch import _pykernels

try:
    from maskwatch import _speedups
except ImportError:
    _speedups = None


def _time(fn, *args, repeat: int = 5, min_time: float = 0.05) -> float:
    """Best-of wall time for one call, amortized over inner loops."""
    best = float("inf")
    for _ in range(repeat):
        loops = 1
        while True:
            start = time.perf_counter()
            for _ in range(loops):
                fn(*args)
            elapsed = time.perf_counter() - start
            if elapsed >= min_time:
                break
            loops *= 4
        best = min(best, elapsed / loops)
    return best


def bench_accumulate(sizes: list[int]) -> None:
    rng = random.Random(1)
    print(f"{'accumulate_buckets':<24}{'pure':>12}{'compiled':>12}{'speedup':>9}")
    for size in sizes:
        data = rng.randbytes(size)
        pure = _time(_pykernels.accumulate_buckets, data)
        row = f"{size:>10} bytes{'':<8}{size / pure / 1e6:>9.1f} MB/s"
        if _speedups is not None:
            fast = _time(_speedups.accumulate_buckets, data)
            row += f"{size / fast / 1e6:>10.1f} MB/s{pure / fast:>8.0f}x"
        else:
            row += f"{'n/a':>14}{'':>9}"
        print(row)


def bench_distance(pairs: int = 2000) -> None:
    rng = random.Random(2)
    bodies = [bytes(rng.randrange(4) for _ in range(128)) for _ in range(2 * pairs)]

    def run(fn):
        for i in range(pairs):
            fn(bodies[2 * i], bodies[2 * i + 1])

    print()
    print(f"{'body_distance':<24}{'pure':>12}{'compiled':>12}{'speedup':>9}")
    pure = _time(run, _pykernels.body_distance)
    row = f"{pairs:>10} pairs{'':<8}{pairs / pure / 1e6:>9.2f} M/s"
    if _speedups is not None:
        fast = _time(run, _speedups.body_distance)
        row += f"{pairs / fast / 1e6:>10.2f} M/s{pure / fast:>8.0f}x"
    else:
        row += f"{'n/a':>14}{'':>9}"
    print(row)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="4096,65536,1048576")
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    if _speedups is None:
        print("compiled kernels not built; showing pure-Python numbers only\n")
    bench_accumulate(sizes)
    bench_distance()


if __name__ == "__main__":
    main()

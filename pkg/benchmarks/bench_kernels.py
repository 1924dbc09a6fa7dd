"""Timing comparison of the compiled kernels against the pure fallback.

Usage: python benchmarks/bench_kernels.py [--rows N] [--cols M]

Exercises the three hot paths on synthetic code arrays: per-value
multiplicity counts (risk scoring), row grouping (equivalence classes),
and the per-cell log-loss sum (non-uniform entropy).
"""

import argparse
import time

import numpy as np

from anonpipe.kernels import pure

try:
    from anonpipe.kernels import _speedups
except ImportError:
    _speedups = None


def _time(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - started)
    return best


def group_rows_with(impl, columns, cards):
    ids = columns[0]
    for codes, card in zip(columns[1:], cards[1:]):
        ids, _ = impl.combine_and_compact(ids, codes, int(card))
    return ids


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--rows", type=int, default=1_000_000)
    parser.add_argument("--cols", type=int, default=4)
    parser.add_argument("--cardinality", type=int, default=50)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    columns = [rng.integers(0, args.cardinality, size=args.rows,
                            dtype=np.int64) for _ in range(args.cols)]
    cards = [args.cardinality] * args.cols
    counts = rng.integers(1, 200, size=args.rows, dtype=np.int64)
    trans = counts * rng.integers(1, 4, size=args.rows, dtype=np.int64)

    backends = [("pure", pure)]
    if _speedups is not None:
        backends.append(("compiled", _speedups))
    else:
        print("compiled backend not built; showing pure only")

    cases = {
        "value_counts": lambda impl: impl.value_counts(columns[0],
                                                       args.cardinality),
        "group_rows": lambda impl: group_rows_with(impl, columns, cards),
        "coarsen_loss_sum": lambda impl: impl.coarsen_loss_sum(counts, trans),
    }

    print(f"rows={args.rows:,} cols={args.cols} "
          f"cardinality={args.cardinality}")
    header = f"{'kernel':<20}" + "".join(f"{name:>12}" for name, _ in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for case, runner in cases.items():
        times = [_time(lambda impl=impl: runner(impl))
                 for _, impl in backends]
        row = f"{case:<20}" + "".join(f"{t * 1000:>10.1f}ms" for t in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()

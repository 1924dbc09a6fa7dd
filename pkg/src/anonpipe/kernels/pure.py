"""Pure-Python fallback for the counting kernels.

Same contract as the compiled backend in ``_speedups.pyx``; used when the
extension was not built. Plain dict/loop code on purpose, so the benchmark
comparison between backends measures the real interpreter cost.
"""

import math

import numpy as np


def value_counts(codes, n_codes):
    counts = [0] * n_codes
    for c in codes.tolist():
        counts[c] += 1
    return np.array(counts, dtype=np.int64)


def combine_and_compact(ids, codes, card):
    seen = {}
    new_ids = [0] * len(ids)
    for i, (a, b) in enumerate(zip(ids.tolist(), codes.tolist())):
        key = a * card + b
        gid = seen.get(key)
        if gid is None:
            gid = len(seen)
            seen[key] = gid
        new_ids[i] = gid
    return np.array(new_ids, dtype=np.int64), len(seen)


def inv_count_sum(counts):
    return sum(1.0 / g for g in counts.tolist())


def coarsen_loss_sum(orig_counts, trans_counts):
    total = 0.0
    for i, (o, t) in enumerate(zip(orig_counts.tolist(), trans_counts.tolist())):
        if o > t:
            return 0.0, i
        total += math.log2(t / o)
    return total, -1

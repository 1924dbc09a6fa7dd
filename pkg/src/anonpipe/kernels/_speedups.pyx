# distutils: language = c++
# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled counting kernels.

Hot loops behind the risk, partition, and information-loss computations.
Inputs are dense int64 code arrays produced by ``kernels.factorize``; the
string-to-code step stays in Python where the hashing cost is unavoidable.
"""

from cython.operator cimport dereference
from libc.math cimport log2
from libcpp.unordered_map cimport unordered_map

import numpy as np


def value_counts(long long[::1] codes, Py_ssize_t n_codes):
    """Multiplicity of each code in [0, n_codes)."""
    out = np.zeros(n_codes, dtype=np.int64)
    cdef long long[::1] counts = out
    cdef Py_ssize_t i, n = codes.shape[0]
    for i in range(n):
        counts[codes[i]] += 1
    return out


def combine_and_compact(long long[::1] ids, long long[::1] codes, long long card):
    """Merge a code column into running group ids.

    Keys ``ids[i] * card + codes[i]`` are renumbered densely in order of
    first occurrence, so group identity stays deterministic and the key
    domain never grows past n_rows * card between steps.
    """
    cdef Py_ssize_t i, n = ids.shape[0]
    out = np.empty(n, dtype=np.int64)
    cdef long long[::1] new_ids = out
    cdef unordered_map[long long, long long] seen
    cdef long long key, next_id = 0
    cdef unordered_map[long long, long long].iterator it
    for i in range(n):
        key = ids[i] * card + codes[i]
        it = seen.find(key)
        if it == seen.end():
            seen[key] = next_id
            new_ids[i] = next_id
            next_id += 1
        else:
            new_ids[i] = dereference(it).second
    return out, <Py_ssize_t> next_id


def inv_count_sum(long long[::1] counts):
    """Sum of 1/g over multiplicities g (the uniqueness mass of a column)."""
    cdef double total = 0.0
    cdef Py_ssize_t i, n = counts.shape[0]
    for i in range(n):
        total += 1.0 / counts[i]
    return total


def coarsen_loss_sum(long long[::1] orig_counts, long long[::1] trans_counts):
    """Per-cell information loss sum(log2(trans/orig)) in bits.

    Returns (total, first_bad) where first_bad is the first index with
    orig > trans (a non-coarsening transform), or -1 when valid.
    """
    cdef double total = 0.0
    cdef Py_ssize_t i, n = orig_counts.shape[0]
    for i in range(n):
        if orig_counts[i] > trans_counts[i]:
            return 0.0, i
        total += log2(<double> trans_counts[i] / <double> orig_counts[i])
    return total, <Py_ssize_t> -1

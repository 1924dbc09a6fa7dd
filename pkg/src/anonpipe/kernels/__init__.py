"""Counting kernels with a compiled core and a pure-Python fallback.

The compiled backend (``anonpipe.kernels._speedups``, Cython/C++) is picked
at import time when it was built; otherwise ``anonpipe.kernels.pure`` serves
the identical API. ``BACKEND`` names the active one. All kernels operate on
dense int64 code arrays; :func:`factorize` maps cell strings to codes.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

try:
    from . import _speedups as _impl
    BACKEND = "compiled"
except ImportError:  # extension not built
    from . import pure as _impl
    BACKEND = "pure"

value_counts = _impl.value_counts
combine_and_compact = _impl.combine_and_compact
inv_count_sum = _impl.inv_count_sum
coarsen_loss_sum = _impl.coarsen_loss_sum


def factorize(values: Iterable[str]) -> tuple[np.ndarray, list[str]]:
    """Map values to dense int64 codes in order of first occurrence."""
    table: dict[str, int] = {}
    codes = []
    for v in values:
        code = table.get(v)
        if code is None:
            code = len(table)
            table[v] = code
        codes.append(code)
    return np.array(codes, dtype=np.int64), list(table)


def group_rows(code_columns: Sequence[np.ndarray],
               cardinalities: Sequence[int]) -> tuple[np.ndarray, int]:
    """Group ids for row tuples across columns, by first occurrence.

    Each step folds one column into the running ids and renumbers densely,
    so intermediate keys stay within int64 for any realistic table.
    """
    if not code_columns:
        raise ValueError("at least one column required")
    ids = code_columns[0]
    n_groups = int(cardinalities[0])
    for codes, card in zip(code_columns[1:], cardinalities[1:]):
        ids, n_groups = combine_and_compact(ids, codes, int(card))
    return ids, n_groups

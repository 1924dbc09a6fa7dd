"""Stage 3 kernel: equivalence classes, privacy metrics, and utility metrics.

Partitioning groups records on their QID tuple, with "missing" matching
"missing" like any other value (extended match). k-anonymity is the
smallest class; distinct l-diversity the smallest number of sensitive
values inside a class; t-closeness the largest earth-mover distance
between a class's sensitive-value distribution and the global one.

Utility is the non-uniform entropy loss: each cell costs
-log2(count_original(v) / count_transformed(v')) bits, normalised by the
cost of fully suppressing the same attributes, so the identity transform
scores 0% and full suppression 100%.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import EmptyTableError, MetricsError
from .render import round_half_up
from .table import MISSING, Table


@dataclass(frozen=True)
class EquivalenceClass:
    signature: tuple[str, ...]
    members: tuple[int, ...]  # row indices

    @property
    def size(self) -> int:
        return len(self.members)


def partition(table: Table, qid_set: list[str]) -> list[EquivalenceClass]:
    """Exact group-by on the QID tuple, classes ordered by first occurrence."""
    if not qid_set:
        raise MetricsError("QID set must be nonempty")
    if table.row_count == 0:
        raise EmptyTableError("cannot partition an empty table")
    columns = []
    cards = []
    for name in qid_set:
        codes, uniques = kernels.factorize(table.column(name))
        columns.append(codes)
        cards.append(len(uniques))
    ids, n_groups = kernels.group_rows(columns, cards)
    members: list[list[int]] = [[] for _ in range(n_groups)]
    for row, gid in enumerate(ids.tolist()):
        members[gid].append(row)
    idx = [table.index_of(name) for name in qid_set]
    classes = []
    for rows in members:
        first = table.rows[rows[0]]
        signature = tuple(first[i] for i in idx)
        classes.append(EquivalenceClass(signature, tuple(rows)))
    return classes


def k_anonymity(classes: list[EquivalenceClass]) -> int:
    if not classes:
        raise MetricsError("no equivalence classes")
    return min(c.size for c in classes)


def l_diversity(classes: list[EquivalenceClass], table: Table,
                sa: str) -> int:
    """Distinct l-diversity: minimum count of distinct SA values per class."""
    column = table.column(sa)
    if not classes:
        raise MetricsError("no equivalence classes")
    return min(len({column[i] for i in c.members}) for c in classes)


def _distribution(values: list[str], support: list[str]) -> np.ndarray:
    counts = {v: 0 for v in support}
    for v in values:
        counts[v] += 1
    total = len(values)
    return np.array([counts[v] / total for v in support])


def _ordered_support(table: Table, sa: str, observed: list[str],
                     ) -> list[str] | None:
    """Rank order for the SA's observed values, or None for categorical.

    Numeric and year attributes order by parsed value; generalised labels
    order by the declared value_order on the attribute. Any observed value
    outside the declared order (typically "missing") forces the equal
    ground distance instead.
    """
    meta = table.meta(sa)
    distinct = sorted(set(observed))
    if meta.kind in ("numeric", "year"):
        try:
            return sorted(distinct, key=float)
        except ValueError:
            return None
    if meta.value_order:
        if set(distinct) <= set(meta.value_order):
            return [v for v in meta.value_order if v in set(distinct)]
    return None


def emd(class_dist: np.ndarray, global_dist: np.ndarray,
        ordered: bool) -> float:
    """Earth-mover distance between two distributions on a shared support.

    Equal ground distance reduces to total variation (half the L1
    difference); ordered supports use unit adjacent-rank distance
    normalised by (ranks - 1), so both forms stay in [0, 1].
    """
    diff = class_dist - global_dist
    if not ordered:
        return float(np.abs(diff).sum()) / 2.0
    m = len(diff)
    if m == 1:
        return 0.0
    return float(np.abs(np.cumsum(diff)[:-1]).sum()) / (m - 1)


def t_closeness(classes: list[EquivalenceClass], table: Table,
                sa: str) -> float:
    """Maximum distance between any class's SA distribution and the global one."""
    column = table.column(sa)
    if not classes:
        raise MetricsError("no equivalence classes")
    order = _ordered_support(table, sa, column)
    ordered = order is not None
    support = order if ordered else sorted(set(column))
    global_dist = _distribution(column, support)
    worst = 0.0
    for c in classes:
        class_dist = _distribution([column[i] for i in c.members], support)
        worst = max(worst, emd(class_dist, global_dist, ordered))
    return worst


@dataclass(frozen=True)
class NueResult:
    nue_percent: float
    inverse_nue_percent: float
    total_loss_bits: float
    max_loss_bits: float


def nue(original: Table, transformed: Table,
        attributes: list[str]) -> NueResult:
    """Non-uniform entropy information loss over the listed attributes.

    Requires identical row count and order. A transformed blank cell
    (suppression output) is charged as if its group were the whole table.
    A cell whose original group is larger than its transformed group means
    the transform was not a coarsening, which is invalid input.
    """
    n = original.row_count
    if transformed.row_count != n:
        raise MetricsError(
            f"row count mismatch: original {n}, "
            f"transformed {transformed.row_count}")
    if n == 0:
        raise EmptyTableError("cannot score an empty table")
    total = 0.0
    max_loss = 0.0
    for name in attributes:
        orig_col = original.column(name)
        trans_col = transformed.column(name)
        o_codes, o_uniques = kernels.factorize(orig_col)
        o_counts = kernels.value_counts(o_codes, len(o_uniques))
        t_codes, t_uniques = kernels.factorize(trans_col)
        t_counts = kernels.value_counts(t_codes, len(t_uniques))
        # blank transformed cells take the whole table as their group
        t_counts = t_counts.copy()
        for i, v in enumerate(t_uniques):
            if v == "":
                t_counts[i] = n
        per_cell_orig = o_counts[o_codes]
        per_cell_trans = t_counts[t_codes]
        loss, bad = kernels.coarsen_loss_sum(per_cell_orig, per_cell_trans)
        if bad >= 0:
            raise MetricsError(
                f"attribute {name!r} row {bad + 1}: transformed group "
                f"({int(per_cell_trans[bad])}) smaller than original group "
                f"({int(per_cell_orig[bad])}); not a coarsening")
        total += loss
        # full suppression: every cell's group becomes all n rows
        max_loss += float(np.sum(np.log2(n / o_counts) * o_counts))
    if max_loss == 0.0:
        return NueResult(0.0, 100.0, 0.0, 0.0)
    percent = 100.0 * total / max_loss
    return NueResult(percent, 100.0 - percent, total, max_loss)


def privacy_gain(k_before: int, k_after: int) -> int:
    if k_before < 1 or k_after < 1:
        raise MetricsError("k values must be >= 1")
    return k_after - k_before


@dataclass(frozen=True)
class MetricsReport:
    k: int
    l_per_sa: dict[str, int]
    t: float
    nue_percent: float
    inverse_nue_percent: float
    privacy_gain: int
    t_per_sa: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "l_per_sa": self.l_per_sa,
            "t": self.t,
            "t_per_sa": self.t_per_sa,
            "nue_percent": round_half_up(self.nue_percent, 2),
            "inverse_nue_percent": round_half_up(self.inverse_nue_percent, 2),
            "privacy_gain": self.privacy_gain,
        }


def evaluate(original: Table, transformed: Table, qids: list[str],
             sas: list[str], k_before: int | None = None) -> MetricsReport:
    """All metrics for one transformed table against its original.

    ``t`` is the maximum over the sensitive attributes (0.0 when there are
    none); ``privacy_gain`` is relative to ``k_before`` (defaults to the
    table's own k, i.e. zero gain).
    """
    for name in qids + sas:
        transformed.index_of(name)  # raises UnknownAttributeError
    classes = partition(transformed, qids)
    k = k_anonymity(classes)
    l_per_sa = {sa: l_diversity(classes, transformed, sa) for sa in sas}
    t_per_sa = {sa: t_closeness(classes, transformed, sa) for sa in sas}
    t = max(t_per_sa.values()) if t_per_sa else 0.0
    utility = nue(original, transformed, qids + sas)
    if k_before is None:
        k_before = k
    return MetricsReport(
        k=k,
        l_per_sa=l_per_sa,
        t=t,
        t_per_sa=t_per_sa,
        nue_percent=utility.nue_percent,
        inverse_nue_percent=utility.inverse_nue_percent,
        privacy_gain=privacy_gain(k_before, k),
    )

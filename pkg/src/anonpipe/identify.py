"""Stage 1: per-attribute re-identification risk and DID/QID/SA/NSA labels.

The risk rate of an attribute is 100 times the mean of 1/g over its
distinct values, where g is the number of records sharing a value. Every
value unique gives 100%; a constant column of n rows gives 100/n. The rate
is reported rounded to two decimals, but threshold comparisons always use
full precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from . import kernels
from .errors import EmptyTableError, UnknownAttributeError
from .render import render_text_table, round_half_up
from .table import Table


@dataclass(frozen=True)
class GDistinctHistogram:
    """Multiplicity g of every distinct value of one attribute."""

    attribute: str
    entries: dict[str, int]

    @property
    def row_count(self) -> int:
        return sum(self.entries.values())


@dataclass(frozen=True)
class RiskProfile:
    attribute: str
    risk_rate_percent: float  # full precision; round only for reporting
    distinct_count: int
    row_count: int

    @property
    def reported_risk(self) -> float:
        return round_half_up(self.risk_rate_percent, 2)


@dataclass(frozen=True)
class Thresholds:
    alpha_percent: float
    beta_percent: float

    def __post_init__(self):
        if not (0 <= self.beta_percent <= self.alpha_percent <= 100):
            raise ValueError(
                f"thresholds must satisfy 0 <= beta <= alpha <= 100, "
                f"got alpha={self.alpha_percent}, beta={self.beta_percent}")


@dataclass(frozen=True)
class Classification:
    attribute: str
    label: str  # DID | QID | SA | NSA
    risk_rate_percent: float
    source: str = "automatic"  # automatic | manual-override


def g_distinct(table: Table, attribute: str) -> GDistinctHistogram:
    """Exact multiplicities of an attribute's values, "missing" included."""
    if table.row_count == 0:
        raise EmptyTableError(f"cannot compute g-distinct of empty table "
                              f"for {attribute!r}")
    codes, uniques = kernels.factorize(table.column(attribute))
    counts = kernels.value_counts(codes, len(uniques))
    return GDistinctHistogram(attribute,
                              dict(zip(uniques, counts.tolist())))


def risk_rate(hist: GDistinctHistogram) -> RiskProfile:
    if not hist.entries:
        raise EmptyTableError(f"empty histogram for {hist.attribute!r}")
    distinct = len(hist.entries)
    uniqueness = sum(1.0 / g for g in hist.entries.values())
    return RiskProfile(
        attribute=hist.attribute,
        risk_rate_percent=100.0 * uniqueness / distinct,
        distinct_count=distinct,
        row_count=hist.row_count,
    )


def profile_table(table: Table) -> list[RiskProfile]:
    return [risk_rate(g_distinct(table, name))
            for name in table.attribute_names]


def classify(profiles: Sequence[RiskProfile], thresholds: Thresholds,
             overrides: Mapping[str, str] | None = None,
             ) -> list[Classification]:
    """Label each profile by the threshold rule.

    Automatic rule: an attribute whose every value is unique is a DID
    candidate; otherwise risk strictly above alpha is an SA, risk in
    [beta, alpha] a QID, and risk strictly below beta an NSA. Overrides
    replace the automatic label and are marked manual-override.
    """
    overrides = dict(overrides or {})
    known = {p.attribute for p in profiles}
    for name in overrides:
        if name not in known:
            raise UnknownAttributeError(name)
    out = []
    for p in profiles:
        if p.attribute in overrides:
            out.append(Classification(p.attribute, overrides[p.attribute],
                                      p.risk_rate_percent,
                                      source="manual-override"))
            continue
        if p.distinct_count == p.row_count and p.row_count > 0:
            label = "DID"
        elif p.risk_rate_percent > thresholds.alpha_percent:
            label = "SA"
        elif p.risk_rate_percent >= thresholds.beta_percent:
            label = "QID"
        else:
            label = "NSA"
        out.append(Classification(p.attribute, label, p.risk_rate_percent))
    return out


LABEL_TEXT = {
    "DID": "Direct identifier",
    "QID": "Quasi-identifier",
    "SA": "Sensitive attribute",
    "NSA": "Non-sensitive attribute",
}


def sort_by_risk(items, risk_key, name_key):
    """Descending risk; ties broken by attribute name ascending."""
    return sorted(items, key=lambda x: (-risk_key(x), name_key(x)))


@dataclass(frozen=True)
class IdentificationReport:
    rows: list[dict]
    thresholds: Thresholds | None = None

    def to_dict(self) -> dict:
        doc: dict = {}
        if self.thresholds is not None:
            doc["thresholds"] = {
                "alpha_percent": self.thresholds.alpha_percent,
                "beta_percent": self.thresholds.beta_percent,
            }
        doc["attributes"] = self.rows
        return doc

    def to_text(self) -> str:
        header = ["Attribute", "Re-identification risk (%)", "Classification"]
        body = [[r["attribute"], f"{r['risk_rate_percent']:.2f}",
                 LABEL_TEXT[r["label"]] +
                 (" (manual override)" if r["source"] == "manual-override" else "")]
                for r in self.rows]
        title = "Classification of attributes"
        if self.thresholds is not None:
            title += (f" (alpha = {self.thresholds.alpha_percent:g}, "
                      f"beta = {self.thresholds.beta_percent:g})")
        return render_text_table(title, header, body)


def identification_report(classifications: Sequence[Classification],
                          profiles: Sequence[RiskProfile],
                          thresholds: Thresholds | None = None,
                          ) -> IdentificationReport:
    """Attributes sorted by risk descending, with the rounded report rate."""
    by_name = {c.attribute: c for c in classifications}
    ordered = sort_by_risk(profiles,
                           risk_key=lambda p: p.risk_rate_percent,
                           name_key=lambda p: p.attribute)
    rows = []
    for p in ordered:
        c = by_name[p.attribute]
        rows.append({
            "attribute": p.attribute,
            "risk_rate_percent": round_half_up(p.risk_rate_percent, 2),
            "distinct_count": p.distinct_count,
            "label": c.label,
            "source": c.source,
        })
    return IdentificationReport(rows, thresholds)

"""Stage 2: suppression, masking, generalisation, and aggregation.

Every strategy is per-attribute and per-cell: row count and unruled cells
are never touched. "missing" cells pass through masking, generalisation,
and aggregation unchanged; only suppression overwrites them. Rules are
applied one attribute at a time in descending-risk order, and every step
lands in an audit log.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .errors import ApplyError, AnonError, CoverageError, RuleError
from .identify import Classification, profile_table, sort_by_risk
from .table import MISSING, AttributeMeta, Table

STRATEGIES = ("suppress", "mask", "generalize_numeric", "generalize_year",
              "aggregate_map")


@dataclass(frozen=True)
class Bin:
    """One numeric range with its replacement label.

    Bounds are inclusive by default; exclusivity is declared per bound in
    the rule file because published range labels disagree (bands like
    "0.0-4.5"/"5.0-10.0" are closed, weight categories are half-open).
    An absent upper bound means unbounded above.
    """

    lower: float
    upper: float | None
    label: str
    lower_inclusive: bool = True
    upper_inclusive: bool = True

    def contains(self, value: float) -> bool:
        if self.lower_inclusive:
            if value < self.lower:
                return False
        elif value <= self.lower:
            return False
        if self.upper is None:
            return True
        if self.upper_inclusive:
            return value <= self.upper
        return value < self.upper

    def upper_key(self) -> float:
        return math.inf if self.upper is None else self.upper


@dataclass(frozen=True)
class Rule:
    attribute: str
    strategy: str
    # strategy-specific parameters
    placeholder: str = "xxxx"                      # mask
    drop_column: bool = False                      # suppress
    bins: tuple[Bin, ...] = ()                     # generalize_numeric
    width: int = 5                                 # generalize_year
    top: int | None = None                         # generalize_year
    top_label: str | None = None                   # generalize_year
    base: int = 0                                  # generalize_year
    mapping: Mapping[str, str] = field(default_factory=dict)  # aggregate_map
    default_group: str | None = None               # aggregate_map

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise RuleError(f"unknown strategy {self.strategy!r} "
                            f"for {self.attribute!r}")
        if self.strategy == "mask" and not self.placeholder:
            raise RuleError(f"empty mask placeholder for {self.attribute!r}")
        if self.strategy == "generalize_numeric":
            if not self.bins:
                raise RuleError(f"no bins for {self.attribute!r}")
            _check_bins(self.attribute, self.bins)
        if self.strategy == "generalize_year" and self.width < 1:
            raise RuleError(f"year bin width must be >= 1 "
                            f"for {self.attribute!r}")
        if self.strategy == "aggregate_map" and self.default_group is None:
            raise RuleError(f"aggregate_map for {self.attribute!r} "
                            "needs a default group")

    def parameters(self) -> dict:
        """Strategy parameters as a plain document (for the audit log)."""
        if self.strategy == "suppress":
            return {"drop_column": self.drop_column}
        if self.strategy == "mask":
            return {"placeholder": self.placeholder}
        if self.strategy == "generalize_numeric":
            return {"bins": [_bin_to_dict(b) for b in self.bins]}
        if self.strategy == "generalize_year":
            return {"width": self.width, "top": self.top,
                    "top_label": self.top_label, "base": self.base}
        return {"mapping": dict(self.mapping),
                "default_group": self.default_group}


def _check_bins(attribute: str, bins: Sequence[Bin]) -> None:
    ordered = sorted(bins, key=lambda b: (b.lower, b.upper_key()))
    for a, b in zip(ordered, ordered[1:]):
        if a.upper is None:
            raise RuleError(f"unbounded bin {a.label!r} of {attribute!r} "
                            "must be the last bin")
        overlap = (b.lower < a.upper or
                   (b.lower == a.upper and a.upper_inclusive and
                    b.lower_inclusive))
        if overlap:
            raise RuleError(f"bins {a.label!r} and {b.label!r} of "
                            f"{attribute!r} overlap")


def _bin_to_dict(b: Bin) -> dict:
    doc: dict = {"lower": b.lower, "upper": b.upper, "label": b.label}
    if not b.lower_inclusive:
        doc["lower_inclusive"] = False
    if not b.upper_inclusive:
        doc["upper_inclusive"] = False
    return doc


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[Rule, ...]

    def __post_init__(self):
        names = [r.attribute for r in self.rules]
        dupes = {n for n in names if names.count(n) > 1}
        if dupes:
            raise RuleError("more than one rule for: " + ", ".join(sorted(dupes)))

    def rule_for(self, attribute: str) -> Rule | None:
        for r in self.rules:
            if r.attribute == attribute:
                return r
        return None

    def application_order(self, classifications: Sequence[Classification],
                          ) -> list[str]:
        """Ruled attributes, riskiest first (ties by name)."""
        risk = {c.attribute: c.risk_rate_percent for c in classifications}
        ruled = [r.attribute for r in self.rules]
        unknown = [a for a in ruled if a not in risk]
        if unknown:
            raise RuleError("no classification for ruled attribute(s): "
                            + ", ".join(sorted(unknown)))
        return sort_by_risk(ruled, risk_key=lambda a: risk[a],
                            name_key=lambda a: a)


@dataclass(frozen=True)
class AuditEntry:
    attribute: str
    strategy: str
    parameters: dict
    cells_changed: int

    def to_dict(self) -> dict:
        return {"attribute": self.attribute, "strategy": self.strategy,
                "parameters": self.parameters,
                "cells_changed": self.cells_changed}


def suppress(table: Table, attribute: str, drop_column: bool = False,
             ) -> Table:
    """Blank every cell of the attribute; optionally drop the column.

    Cell-level blanking keeps the column in the schema (the default, used
    for over-risky QIDs/SAs); the drop flag removes it entirely and is
    reserved for direct identifiers.
    """
    if drop_column:
        return table.drop_column(attribute)
    meta = AttributeMeta(attribute, "categorical")
    return table.replace_column(attribute, [""] * table.row_count, meta)


def mask(table: Table, attribute: str, placeholder: str = "xxxx") -> Table:
    """Replace every non-missing cell with the placeholder."""
    if not placeholder:
        raise RuleError(f"empty mask placeholder for {attribute!r}")
    values = [c if c == MISSING else placeholder
              for c in table.column(attribute)]
    meta = AttributeMeta(attribute, "categorical")
    return table.replace_column(attribute, values, meta)


def generalize_numeric(table: Table, attribute: str,
                       bins: Sequence[Bin]) -> Table:
    """Replace each non-missing cell by the label of the bin containing it.

    A value outside every bin (including a label left over from an earlier
    transform, which no longer parses) is a coverage error naming the value
    and row.
    """
    _check_bins(attribute, bins)
    values = []
    for row_number, cell in enumerate(table.column(attribute), start=1):
        if cell == MISSING:
            values.append(cell)
            continue
        try:
            parsed = float(cell)
        except ValueError:
            raise CoverageError(attribute, row_number, cell)
        for b in bins:
            if b.contains(parsed):
                values.append(b.label)
                break
        else:
            raise CoverageError(attribute, row_number, cell)
    order = []
    for b in sorted(bins, key=lambda b: (b.lower, b.upper_key())):
        if b.label not in order:
            order.append(b.label)
    meta = AttributeMeta(attribute, "categorical", value_order=tuple(order))
    return table.replace_column(attribute, values, meta)


def _year_label(year: int, width: int, base: int, top: int | None) -> str:
    start = base + ((year - base) // width) * width
    end = start + width - 1
    if top is not None:
        end = min(end, top)
    return f"{start}-{end}"


def generalize_year(table: Table, attribute: str, width: int = 5,
                    top: int | None = None, top_label: str | None = None,
                    base: int = 0) -> Table:
    """Bin years into aligned width-year ranges labelled "START-END".

    Years beyond ``top`` collapse into the open-ended ``top_label``
    (default "> TOP").
    """
    if width < 1:
        raise RuleError(f"year bin width must be >= 1 for {attribute!r}")
    if top is not None and top_label is None:
        top_label = f"> {top}"
    values = []
    seen_years = []
    for row_number, cell in enumerate(table.column(attribute), start=1):
        if cell == MISSING:
            values.append(cell)
            continue
        try:
            year = int(cell)
        except ValueError:
            raise CoverageError(attribute, row_number, cell)
        seen_years.append(year)
        if top is not None and year > top:
            values.append(top_label)
        else:
            values.append(_year_label(year, width, base, top))
    order: list[str] = []
    for year in sorted(seen_years):
        label = (top_label if top is not None and year > top
                 else _year_label(year, width, base, top))
        if label not in order:
            order.append(label)
    meta = AttributeMeta(attribute, "categorical", value_order=tuple(order))
    return table.replace_column(attribute, values, meta)


def aggregate(table: Table, attribute: str, mapping: Mapping[str, str],
              default_group: str) -> Table:
    """Replace each non-missing cell by its group, total by construction."""
    values = [c if c == MISSING else mapping.get(c, default_group)
              for c in table.column(attribute)]
    meta = AttributeMeta(attribute, "categorical")
    return table.replace_column(attribute, values, meta)


def apply_rule(table: Table, rule: Rule) -> Table:
    if rule.strategy == "suppress":
        return suppress(table, rule.attribute, rule.drop_column)
    if rule.strategy == "mask":
        return mask(table, rule.attribute, rule.placeholder)
    if rule.strategy == "generalize_numeric":
        return generalize_numeric(table, rule.attribute, rule.bins)
    if rule.strategy == "generalize_year":
        return generalize_year(table, rule.attribute, rule.width, rule.top,
                               rule.top_label, rule.base)
    return aggregate(table, rule.attribute, rule.mapping, rule.default_group)


def _cells_changed(before: Table, after: Table, attribute: str) -> int:
    if attribute not in after.attribute_names:  # column dropped
        return before.row_count
    old = before.column(attribute)
    new = after.column(attribute)
    return sum(1 for a, b in zip(old, new) if a != b)


def apply_ruleset(table: Table, ruleset: RuleSet,
                  classifications: Sequence[Classification] | None = None,
                  ) -> tuple[Table, list[AuditEntry]]:
    """Apply all rules, riskiest attribute first.

    When classifications are omitted the risk order is computed from the
    input table itself. The first failing rule aborts with the audit log of
    the completed steps attached to the error.
    """
    if classifications is None:
        profiles = [p for p in profile_table(table)
                    if ruleset.rule_for(p.attribute)]
        classifications = [Classification(p.attribute, "QID",
                                          p.risk_rate_percent)
                           for p in profiles]
    order = ruleset.application_order(classifications)
    audit: list[AuditEntry] = []
    current = table
    for attribute in order:
        rule = ruleset.rule_for(attribute)
        try:
            transformed = apply_rule(current, rule)
        except AnonError as exc:
            raise ApplyError(exc, audit)
        audit.append(AuditEntry(attribute, rule.strategy, rule.parameters(),
                                _cells_changed(current, transformed,
                                               attribute)))
        current = transformed
    return current, audit


def _bin_from_dict(doc: Mapping) -> Bin:
    return Bin(
        lower=float(doc["lower"]),
        upper=None if doc.get("upper") is None else float(doc["upper"]),
        label=doc["label"],
        lower_inclusive=doc.get("lower_inclusive", True),
        upper_inclusive=doc.get("upper_inclusive", True),
    )


def rule_from_dict(doc: Mapping) -> Rule:
    strategy = doc.get("strategy")
    if strategy not in STRATEGIES:
        raise RuleError(f"unknown strategy {strategy!r} "
                        f"for {doc.get('attribute')!r}")
    kwargs: dict = {"attribute": doc["attribute"], "strategy": strategy}
    if strategy == "suppress":
        kwargs["drop_column"] = bool(doc.get("drop_column", False))
    elif strategy == "mask":
        kwargs["placeholder"] = doc.get("placeholder", "xxxx")
    elif strategy == "generalize_numeric":
        kwargs["bins"] = tuple(_bin_from_dict(b) for b in doc.get("bins", ()))
    elif strategy == "generalize_year":
        kwargs["width"] = int(doc.get("width", 5))
        kwargs["top"] = doc.get("top")
        kwargs["top_label"] = doc.get("top_label")
        kwargs["base"] = int(doc.get("base", 0))
    else:
        kwargs["mapping"] = dict(doc.get("mapping", {}))
        kwargs["default_group"] = doc.get("default_group")
    return Rule(**kwargs)


def ruleset_from_dict(doc: Mapping | Sequence[Mapping]) -> RuleSet:
    if isinstance(doc, Mapping):
        doc = doc["rules"]
    return RuleSet(tuple(rule_from_dict(r) for r in doc))


def ruleset_to_dict(ruleset: RuleSet) -> dict:
    rules = []
    for r in ruleset.rules:
        entry = {"attribute": r.attribute, "strategy": r.strategy}
        entry.update(r.parameters())
        rules.append(entry)
    return {"rules": rules}


def load_rules(path: str | Path) -> RuleSet:
    with open(path, encoding="utf-8") as fh:
        return ruleset_from_dict(json.load(fh))

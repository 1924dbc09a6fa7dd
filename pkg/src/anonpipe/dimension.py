"""Stage 3 controller: enumerate QID dimensions and pick the optimal one.

A dimension d means "de-identify the d riskiest QIDs". For every d the
working table drops direct identifiers, de-identifies all sensitive
attributes, transforms the d riskiest QIDs, and leaves the remaining QIDs
raw. Metrics are always computed over the full QID combination, raw
columns included: partially de-identified QIDs must not hide the raw ones
from the adversary model.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .deidentify import AuditEntry, RuleSet, apply_ruleset, suppress
from .errors import ConfigError, MetricsError
from .identify import Classification, sort_by_risk
from .metrics import MetricsReport, evaluate
from .render import render_text_table, round_half_up
from .table import Table

POLICIES = ("max_nue", "smallest_d")


@dataclass(frozen=True)
class FeasibilityConstraints:
    k_min: int = 2
    l_min: int = 2
    t_max: float = 0.8

    def __post_init__(self):
        if self.k_min < 1 or self.l_min < 1:
            raise ConfigError("k_min and l_min must be >= 1")
        if not (0.0 <= self.t_max <= 1.0):
            raise ConfigError("t_max must lie in [0, 1]")

    def satisfied_by(self, report: MetricsReport) -> bool:
        if report.k < self.k_min:
            return False
        if report.l_per_sa and min(report.l_per_sa.values()) < self.l_min:
            return False
        return report.t <= self.t_max


@dataclass(frozen=True)
class DimensionCandidate:
    d: int
    deidentified_qids: tuple[str, ...]
    report: MetricsReport
    feasible: bool
    table: Table | None = None           # working table (not serialised)
    audit: tuple[AuditEntry, ...] = ()   # transform steps for this candidate


def split_roles(classifications: Sequence[Classification],
                ) -> tuple[list[str], list[str], list[str]]:
    """(dids, qids riskiest-first, sas) from a classification list."""
    by_label = lambda label: [c for c in classifications if c.label == label]
    qids = sort_by_risk(by_label("QID"),
                        risk_key=lambda c: c.risk_rate_percent,
                        name_key=lambda c: c.attribute)
    return ([c.attribute for c in by_label("DID")],
            [c.attribute for c in qids],
            [c.attribute for c in by_label("SA")])


def enumerate_dimensions(table: Table,
                         classifications: Sequence[Classification],
                         ruleset: RuleSet,
                         constraints: FeasibilityConstraints,
                         ) -> list[DimensionCandidate]:
    """Evaluate every dimension d in 0..len(QIDs).

    The table must already be normalised (and sparse attributes dropped).
    Requires at least one QID and a rule for every QID and SA; privacy gain
    is measured against the d = 0 candidate's k.
    """
    dids, qids, sas = split_roles(classifications)
    if not qids:
        raise ConfigError("no QIDs classified; nothing to enumerate")
    unruled = [a for a in qids + sas if ruleset.rule_for(a) is None]
    if unruled:
        raise ConfigError("no rule for: " + ", ".join(sorted(unruled)))

    base = table
    for did in dids:
        base = suppress(base, did, drop_column=True)
    did_audit = tuple(
        AuditEntry(did, "suppress", {"drop_column": True}, table.row_count)
        for did in dids)

    candidates = []
    k_before: int | None = None
    for d in range(len(qids) + 1):
        targets = set(sas) | set(qids[:d])
        subset = RuleSet(tuple(r for r in ruleset.rules
                               if r.attribute in targets))
        working, audit = apply_ruleset(base, subset, classifications)
        report = evaluate(base, working, qids, sas, k_before=k_before)
        if k_before is None:
            k_before = report.k
        candidates.append(DimensionCandidate(
            d=d,
            deidentified_qids=tuple(qids[:d]),
            report=report,
            feasible=constraints.satisfied_by(report),
            table=working,
            audit=did_audit + tuple(audit),
        ))
    return candidates


def select_optimal(candidates: Sequence[DimensionCandidate],
                   policy: str = "max_nue") -> DimensionCandidate:
    """Pick the winning dimension.

    Among feasible candidates, max_nue takes the highest NUE (ties: smaller
    d, then lower t); smallest_d takes the least d. With no feasible
    candidate the best-k one is returned still flagged infeasible, and the
    run counts as non-compliant.
    """
    if not candidates:
        raise ConfigError("no candidates to select from")
    if policy not in POLICIES:
        raise ConfigError(f"unknown policy {policy!r}")
    feasible = [c for c in candidates if c.feasible]
    if not feasible:
        return min(candidates, key=lambda c: (-c.report.k, c.report.t))
    if policy == "smallest_d":
        return min(feasible, key=lambda c: c.d)
    return min(feasible,
               key=lambda c: (-c.report.nue_percent, c.d, c.report.t))


@dataclass(frozen=True)
class DimensionReport:
    rows: list[dict]
    chosen_d: int
    policy: str
    compliant: bool

    def to_dict(self) -> dict:
        return {
            "policy": self.policy,
            "chosen_d": self.chosen_d,
            "compliant": self.compliant,
            "candidates": self.rows,
        }

    def to_text(self) -> str:
        header = ["d", "de-identified QIDs", "k", "l per SA", "t", "NUE %",
                  "inverse NUE %", "privacy gain", "feasible"]
        body = []
        for r in self.rows:
            l_text = ", ".join(f"{sa}={l}" for sa, l in r["l_per_sa"].items())
            body.append([
                str(r["d"]) + (" *" if r["d"] == self.chosen_d else ""),
                ", ".join(r["deidentified_qids"]) or "(none)",
                str(r["k"]),
                l_text or "-",
                f"{r['t']:.4f}",
                f"{r['nue_percent']:.2f}",
                f"{r['inverse_nue_percent']:.2f}",
                str(r["privacy_gain"]),
                "yes" if r["feasible"] else "no",
            ])
        title = (f"QID dimension candidates (policy: {self.policy}; "
                 f"chosen: {self.chosen_d}"
                 + ("" if self.compliant else "; NON-COMPLIANT") + ")")
        return render_text_table(title, header, body)


def dimension_report(candidates: Sequence[DimensionCandidate],
                     chosen: DimensionCandidate,
                     policy: str = "max_nue") -> DimensionReport:
    rows = []
    for c in candidates:
        row = {"d": c.d, "deidentified_qids": list(c.deidentified_qids),
               "feasible": c.feasible}
        row.update(c.report.to_dict())
        rows.append(row)
    return DimensionReport(rows=rows, chosen_d=chosen.d, policy=policy,
                           compliant=chosen.feasible)

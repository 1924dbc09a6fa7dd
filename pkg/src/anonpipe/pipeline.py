"""End-to-end orchestration: table -> identify -> de-identify -> dimension.

The CLI and the HTTP service both run through these helpers, which is what
keeps their emitted documents byte-identical for the same inputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .config import RunConfig
from .deidentify import RuleSet
from .dimension import (DimensionCandidate, DimensionReport,
                        FeasibilityConstraints, dimension_report,
                        enumerate_dimensions, select_optimal)
from .identify import (Classification, IdentificationReport, RiskProfile,
                       Thresholds, classify, identification_report,
                       profile_table)
from .mockgen import generate
from .render import json_bytes
from .table import Table, csv_bytes, drop_sparse_attributes, load_csv, \
    normalize_missing

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 3

ARTIFACT_CSV = "anonymised.csv"
ARTIFACT_IDENTIFICATION = "identification.report"
ARTIFACT_DIMENSION = "dimension.report"
ARTIFACT_AUDIT = "audit.log"
ARTIFACT_REPLAY = "replay.config.json"


@dataclass(frozen=True)
class IdentifyStage:
    table: Table                 # normalised, sparse attributes dropped
    missing_fractions: dict[str, float]
    dropped_sparse: list[str]
    profiles: list[RiskProfile]
    classifications: list[Classification]
    report: IdentificationReport


def run_identify_stage(table: Table, thresholds: Thresholds,
                       overrides: dict[str, str] | None = None,
                       drop_threshold: float = 0.85) -> IdentifyStage:
    """Normalise missing values, drop sparse attributes, classify the rest.

    Schema-declared roles act as overrides; explicit overrides win over
    them when both name the same attribute.
    """
    normalised, fractions = normalize_missing(table)
    working, dropped = drop_sparse_attributes(normalised, drop_threshold)
    merged = {a.name: a.declared_role for a in working.attributes
              if a.declared_role}
    merged.update(overrides or {})
    profiles = profile_table(working)
    classifications = classify(profiles, thresholds, merged)
    report = identification_report(classifications, profiles, thresholds)
    return IdentifyStage(working, fractions, dropped, profiles,
                         classifications, report)


@dataclass(frozen=True)
class DimensionStage:
    candidates: list[DimensionCandidate]
    chosen: DimensionCandidate
    report: DimensionReport


def run_dimension_stage(stage: IdentifyStage, ruleset: RuleSet,
                        constraints: FeasibilityConstraints,
                        policy: str = "max_nue") -> DimensionStage:
    candidates = enumerate_dimensions(stage.table, stage.classifications,
                                      ruleset, constraints)
    chosen = select_optimal(candidates, policy)
    return DimensionStage(candidates, chosen,
                          dimension_report(candidates, chosen, policy))


@dataclass(frozen=True)
class PipelineResult:
    exit_code: int
    identify: IdentifyStage
    dimension: DimensionStage

    @property
    def anonymised(self) -> Table:
        return self.dimension.chosen.table


def load_input(config: RunConfig) -> Table:
    if config.source_csv is not None:
        return load_csv(config.source_csv, list(config.schema),
                        name=config.table_name)
    table = generate(config.generator_spec)
    if config.schema is not None:
        # declared roles from the schema still apply to generated data
        by_name = {a.name: a for a in config.schema}
        metas = tuple(by_name.get(a.name, a) for a in table.attributes)
        table = Table(config.table_name, metas, table.rows)
    return table


def run_pipeline(config: RunConfig) -> PipelineResult:
    table = load_input(config)
    identify_stage = run_identify_stage(table, config.thresholds,
                                        dict(config.overrides),
                                        config.drop_threshold)
    dimension_stage = run_dimension_stage(identify_stage, config.ruleset,
                                          config.constraints, config.policy)
    exit_code = EXIT_OK if dimension_stage.chosen.feasible else EXIT_INFEASIBLE
    return PipelineResult(exit_code, identify_stage, dimension_stage)


def audit_log_bytes(result: PipelineResult) -> bytes:
    """JSON-lines audit trail: sparse drops, then the chosen transform steps."""
    events = []
    for name in result.identify.dropped_sparse:
        events.append({
            "event": "drop_sparse_attribute",
            "attribute": name,
            "missing_fraction": result.identify.missing_fractions[name],
        })
    for entry in result.dimension.chosen.audit:
        doc = {"event": "apply_rule"}
        doc.update(entry.to_dict())
        events.append(doc)
    lines = [json.dumps(e, ensure_ascii=False) for e in events]
    return ("".join(line + "\n" for line in lines)).encode("utf-8")


def write_artifacts(result: PipelineResult, config: RunConfig,
                    output_dir: str | Path | None = None,
                    replay_doc: dict | None = None) -> list[Path]:
    """Write the fixed-name artifact set; returns the paths written."""
    out = Path(output_dir) if output_dir is not None else config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def emit(name: str, payload: bytes):
        path = out / name
        path.write_bytes(payload)
        written.append(path)

    if "csv" in config.emit:
        emit(ARTIFACT_CSV, csv_bytes(result.anonymised))
    if "structured-report" in config.emit:
        emit(ARTIFACT_IDENTIFICATION,
             json_bytes(result.identify.report.to_dict()))
        emit(ARTIFACT_DIMENSION, json_bytes(result.dimension.report.to_dict()))
    if "text-report" in config.emit:
        emit("identification.txt",
             result.identify.report.to_text().encode("utf-8"))
        emit("dimension.txt", result.dimension.report.to_text().encode("utf-8"))
    emit(ARTIFACT_AUDIT, audit_log_bytes(result))
    if replay_doc is not None:
        emit(ARTIFACT_REPLAY, json_bytes(replay_doc))
    return written


def run_and_write(config: RunConfig, output_dir: str | Path | None = None,
                  replay_doc: dict | None = None) -> PipelineResult:
    result = run_pipeline(config)
    write_artifacts(result, config, output_dir, replay_doc)
    return result

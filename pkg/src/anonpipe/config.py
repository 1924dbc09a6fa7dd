"""Run configuration: the batch-mode replacement for interactive prompts.

A config document fully determines a pipeline run, so saving one is enough
to replay any session byte-for-byte. Paths inside a config file resolve
relative to the file's own directory.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .deidentify import RuleSet, load_rules, ruleset_from_dict, ruleset_to_dict
from .dimension import POLICIES, FeasibilityConstraints
from .errors import ConfigError
from .identify import Thresholds
from .mockgen import GeneratorSpec, load_spec, spec_from_dict, spec_to_dict
from .table import AttributeMeta, load_schema, schema_from_dict, schema_to_dict

EMIT_FORMATS = ("csv", "structured-report", "text-report")


@dataclass(frozen=True)
class RunConfig:
    source_csv: Path | None
    generator_spec: GeneratorSpec | None
    schema: tuple[AttributeMeta, ...] | None
    thresholds: Thresholds
    ruleset: RuleSet
    constraints: FeasibilityConstraints = FeasibilityConstraints()
    drop_threshold: float = 0.85
    overrides: Mapping[str, str] = field(default_factory=dict)
    policy: str = "max_nue"
    output_dir: Path = Path(".")
    emit: tuple[str, ...] = ("csv", "structured-report", "text-report")
    table_name: str = "dataset"

    def __post_init__(self):
        if (self.source_csv is None) == (self.generator_spec is None):
            raise ConfigError(
                "config needs exactly one input: a CSV path or a generator spec")
        if self.source_csv is not None and self.schema is None:
            raise ConfigError("a CSV input needs a schema")
        if self.policy not in POLICIES:
            raise ConfigError(f"unknown policy {self.policy!r}")
        for fmt in self.emit:
            if fmt not in EMIT_FORMATS:
                raise ConfigError(f"unknown emit format {fmt!r}")
        if not (0.0 <= self.drop_threshold <= 1.0):
            raise ConfigError("drop_threshold must lie in [0, 1]")


def _resolve(base: Path | None, value: str) -> Path:
    path = Path(value)
    if not path.is_absolute() and base is not None:
        path = base / path
    return path


def config_from_dict(doc: Mapping, base_dir: Path | None = None) -> RunConfig:
    source = doc.get("input", {})
    source_csv = None
    generator_spec = None
    table_name = doc.get("name", "dataset")
    if "csv" in source:
        source_csv = _resolve(base_dir, source["csv"])
        if not source_csv.exists():
            raise ConfigError(f"input CSV not found: {source_csv}")
    if "generator" in source:
        gen = source["generator"]
        spec_doc = gen.get("spec")
        if isinstance(spec_doc, str):
            spec_path = _resolve(base_dir, spec_doc)
            if not spec_path.exists():
                raise ConfigError(f"generator spec not found: {spec_path}")
            spec = load_spec(spec_path)
        else:
            spec = spec_from_dict(spec_doc)
        spec_dict = spec_to_dict(spec)
        if "seed" in gen:
            spec_dict["seed"] = int(gen["seed"])
        if "rows" in gen:
            spec_dict["rows"] = int(gen["rows"])
        generator_spec = spec_from_dict(spec_dict)
        table_name = doc.get("name", generator_spec.name)

    schema = None
    if "schema" in doc:
        schema_doc = doc["schema"]
        if isinstance(schema_doc, str):
            schema_path = _resolve(base_dir, schema_doc)
            if not schema_path.exists():
                raise ConfigError(f"schema not found: {schema_path}")
            schema = tuple(load_schema(schema_path))
        else:
            schema = tuple(schema_from_dict(schema_doc))

    thr = doc.get("thresholds", {})
    try:
        thresholds = Thresholds(float(thr.get("alpha_percent", 25.0)),
                                float(thr.get("beta_percent", 1.0)))
    except ValueError as exc:
        raise ConfigError(str(exc))

    rules_doc = doc.get("rules")
    if rules_doc is None:
        raise ConfigError("config needs a ruleset (path or inline)")
    if isinstance(rules_doc, str):
        rules_path = _resolve(base_dir, rules_doc)
        if not rules_path.exists():
            raise ConfigError(f"rules file not found: {rules_path}")
        ruleset = load_rules(rules_path)
    else:
        ruleset = ruleset_from_dict(rules_doc)

    cons = doc.get("constraints", {})
    constraints = FeasibilityConstraints(
        k_min=int(cons.get("k_min", 2)),
        l_min=int(cons.get("l_min", 2)),
        t_max=float(cons.get("t_max", 0.8)))

    return RunConfig(
        source_csv=source_csv,
        generator_spec=generator_spec,
        schema=schema,
        thresholds=thresholds,
        ruleset=ruleset,
        constraints=constraints,
        drop_threshold=float(doc.get("drop_threshold", 0.85)),
        overrides=dict(doc.get("overrides", {})),
        policy=doc.get("policy", "max_nue"),
        output_dir=_resolve(base_dir, doc.get("output_dir", ".")),
        emit=tuple(doc.get("emit", list(EMIT_FORMATS))),
        table_name=table_name,
    )


def config_to_dict(config: RunConfig) -> dict:
    """Self-contained document (schema/spec/rules inlined) for replay."""
    doc: dict = {"name": config.table_name}
    if config.source_csv is not None:
        doc["input"] = {"csv": str(config.source_csv.resolve())}
    else:
        doc["input"] = {"generator": {"spec": spec_to_dict(config.generator_spec)}}
    if config.schema is not None:
        doc["schema"] = schema_to_dict(config.schema)
    doc["thresholds"] = {"alpha_percent": config.thresholds.alpha_percent,
                         "beta_percent": config.thresholds.beta_percent}
    doc["drop_threshold"] = config.drop_threshold
    if config.overrides:
        doc["overrides"] = dict(config.overrides)
    doc["rules"] = ruleset_to_dict(config.ruleset)
    doc["constraints"] = {"k_min": config.constraints.k_min,
                          "l_min": config.constraints.l_min,
                          "t_max": config.constraints.t_max}
    doc["policy"] = config.policy
    doc["emit"] = list(config.emit)
    return doc


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}")
    return config_from_dict(doc, base_dir=path.parent)

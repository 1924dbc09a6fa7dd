"""Command-line surface for the anonymisation pipeline.

Subcommands: generate, identify, deidentify, evaluate, run, serve. Batch
runs exit 0 on a feasible optimum, 3 when no dimension satisfies the
constraints, and 1 on error. An interactive `run --interactive` session
transcribes every answer into a replayable config so the same artifacts
can be reproduced in batch mode.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .config import (RunConfig, config_from_dict, config_to_dict,
                     load_config)
from .deidentify import Rule, RuleSet, apply_ruleset, load_rules
from .dimension import FeasibilityConstraints, POLICIES
from .errors import AnonError
from .identify import Thresholds
from .mockgen import (default_spec, generate, load_spec, spec_from_dict,
                      spec_to_dict)
from .pipeline import (ARTIFACT_REPLAY, EXIT_ERROR, EXIT_INFEASIBLE, EXIT_OK,
                       load_input, run_and_write, run_dimension_stage,
                       run_identify_stage)
from .render import json_bytes
from .table import csv_bytes, load_csv, load_schema, write_csv


def _policy_arg(value: str) -> str:
    return value.replace("-", "_")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anonpipe",
        description="Risk-driven anonymisation pipeline for tabular microdata.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate a mock dataset CSV")
    gen.add_argument("--spec", help="generator spec file (default: built-in)")
    gen.add_argument("--rows", type=int, help="row count override")
    gen.add_argument("--seed", type=int, help="seed override")
    gen.add_argument("--out", required=True, help="output CSV path")

    ident = sub.add_parser("identify", help="classify attributes by risk")
    ident.add_argument("--input", required=True, help="input CSV")
    ident.add_argument("--schema", required=True, help="schema file")
    ident.add_argument("--alpha", type=float, default=25.0)
    ident.add_argument("--beta", type=float, default=1.0)
    ident.add_argument("--out", help="directory for identification.report")

    deid = sub.add_parser("deidentify", help="apply a rule set to a CSV")
    deid.add_argument("--input", required=True)
    deid.add_argument("--schema", required=True)
    deid.add_argument("--rules", required=True)
    deid.add_argument("--out", required=True, help="output directory")

    ev = sub.add_parser("evaluate",
                        help="enumerate QID dimensions and pick the optimum")
    ev.add_argument("--input", required=True)
    ev.add_argument("--schema", required=True)
    ev.add_argument("--rules", required=True)
    ev.add_argument("--alpha", type=float, default=25.0)
    ev.add_argument("--beta", type=float, default=1.0)
    ev.add_argument("--policy", type=_policy_arg, default="max_nue",
                    choices=POLICIES)
    ev.add_argument("--out", help="directory for dimension.report")

    run = sub.add_parser("run", help="full pipeline from a config document")
    run.add_argument("--config", help="run config JSON")
    run.add_argument("--seed", type=int, help="generator seed override")
    run.add_argument("--alpha", type=float, help="alpha threshold override")
    run.add_argument("--beta", type=float, help="beta threshold override")
    run.add_argument("--policy", type=_policy_arg, choices=POLICIES,
                     help="selection policy override")
    run.add_argument("--out", help="output directory override")
    run.add_argument("--interactive", action="store_true",
                     help="prompt for thresholds, overrides, rules, and policy")

    srv = sub.add_parser("serve", help="start the workbench HTTP service")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8750)
    srv.add_argument("--ui-dir", help="built web UI to serve statically")

    return parser


def _cmd_generate(args) -> int:
    if args.spec:
        spec = load_spec(args.spec)
    else:
        spec = default_spec()
    doc = spec_to_dict(spec)
    if args.rows is not None:
        doc["rows"] = args.rows
    if args.seed is not None:
        doc["seed"] = args.seed
    table = generate(spec_from_dict(doc))
    write_csv(table, args.out)
    print(f"wrote {table.row_count} rows x {len(table.attributes)} "
          f"attributes to {args.out}")
    return EXIT_OK


def _cmd_identify(args) -> int:
    schema = load_schema(args.schema)
    table = load_csv(args.input, schema, name=Path(args.input).stem)
    stage = run_identify_stage(table, Thresholds(args.alpha, args.beta))
    print(stage.report.to_text())
    if stage.dropped_sparse:
        print("dropped (sparse):", ", ".join(stage.dropped_sparse))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "identification.report").write_bytes(
            json_bytes(stage.report.to_dict()))
    return EXIT_OK


def _cmd_deidentify(args) -> int:
    schema = load_schema(args.schema)
    table = load_csv(args.input, schema, name=Path(args.input).stem)
    ruleset = load_rules(args.rules)
    transformed, audit = apply_ruleset(table, ruleset)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(transformed, out / "deidentified.csv")
    lines = [json.dumps(dict(event="apply_rule", **e.to_dict()),
                        ensure_ascii=False) for e in audit]
    (out / "audit.log").write_text("".join(l + "\n" for l in lines),
                                   encoding="utf-8")
    print(f"wrote {out / 'deidentified.csv'} ({len(audit)} rules applied)")
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    schema = load_schema(args.schema)
    table = load_csv(args.input, schema, name=Path(args.input).stem)
    stage = run_identify_stage(table, Thresholds(args.alpha, args.beta))
    dim = run_dimension_stage(stage, load_rules(args.rules),
                              FeasibilityConstraints(), args.policy)
    print(dim.report.to_text())
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "dimension.report").write_bytes(json_bytes(dim.report.to_dict()))
    return EXIT_OK if dim.chosen.feasible else EXIT_INFEASIBLE


def _apply_run_overrides(config: RunConfig, args) -> RunConfig:
    doc = config_to_dict(config)
    if args.seed is not None:
        if "generator" not in doc["input"]:
            raise AnonError("--seed only applies to generator inputs")
        doc["input"]["generator"]["seed"] = args.seed
    if args.alpha is not None:
        doc["thresholds"]["alpha_percent"] = args.alpha
    if args.beta is not None:
        doc["thresholds"]["beta_percent"] = args.beta
    if args.policy is not None:
        doc["policy"] = args.policy
    out = config_from_dict(doc)
    if args.out:
        out = replace(out, output_dir=Path(args.out))
    else:
        out = replace(out, output_dir=config.output_dir)
    return out


def _cmd_run(args) -> int:
    if not args.config:
        raise AnonError("run needs --config")
    config = load_config(args.config)
    config = _apply_run_overrides(config, args)
    if args.interactive:
        return interactive_session(config)
    result = run_and_write(config)
    print(result.identify.report.to_text())
    print(result.dimension.report.to_text())
    print(f"artifacts written to {config.output_dir}")
    return result.exit_code


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    app = create_app(ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def _prompt(stdin, stdout, text: str, default: str = "") -> str:
    suffix = f" [{default}]" if default != "" else ""
    stdout.write(f"{text}{suffix}: ")
    stdout.flush()
    line = stdin.readline()
    if line == "":
        raise EOFError
    line = line.strip()
    return line if line else default


def interactive_session(config: RunConfig, stdin=None, stdout=None) -> int:
    """Prompt-driven run: thresholds, overrides, per-attribute rules, policy.

    Each answer re-renders the affected report before the next prompt. The
    final state is written as replay.config.json; replaying it in batch
    mode reproduces the artifacts byte for byte. EOF aborts with no
    artifacts written.
    """
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    try:
        table = load_input(config)
        thresholds = config.thresholds
        overrides = dict(config.overrides)
        while True:
            alpha = float(_prompt(stdin, stdout, "alpha threshold (%)",
                                  str(thresholds.alpha_percent)))
            beta = float(_prompt(stdin, stdout, "beta threshold (%)",
                                 str(thresholds.beta_percent)))
            thresholds = Thresholds(alpha, beta)
            stage = run_identify_stage(table, thresholds, overrides,
                                       config.drop_threshold)
            stdout.write("\n" + stage.report.to_text() + "\n")
            if _prompt(stdin, stdout, "adjust thresholds? (y/N)", "n").lower() != "y":
                break

        while True:
            answer = _prompt(stdin, stdout,
                             "override as attribute=LABEL (blank to continue)", "")
            if not answer:
                break
            name, _, label = answer.partition("=")
            overrides[name.strip()] = label.strip()
            stage = run_identify_stage(table, thresholds, overrides,
                                       config.drop_threshold)
            stdout.write("\n" + stage.report.to_text() + "\n")

        stage = run_identify_stage(table, thresholds, overrides,
                                   config.drop_threshold)
        rules = {r.attribute: r for r in config.ruleset.rules}
        for c in stage.classifications:
            if c.label not in ("QID", "SA"):
                continue
            current = rules.get(c.attribute)
            default = current.strategy if current else "mask"
            answer = _prompt(
                stdin, stdout,
                f"rule for {c.attribute} ({c.label}) "
                "(keep/suppress/mask[:PLACEHOLDER])", "keep")
            if answer == "keep":
                if current is None:
                    raise AnonError(f"no rule to keep for {c.attribute}; "
                                    f"default was {default}")
                continue
            if answer == "suppress":
                rules[c.attribute] = Rule(c.attribute, "suppress")
            elif answer.startswith("mask"):
                _, _, placeholder = answer.partition(":")
                rules[c.attribute] = Rule(c.attribute, "mask",
                                          placeholder=placeholder or "xxxx")
            else:
                raise AnonError(f"unknown rule answer {answer!r}")
        ruleset = RuleSet(tuple(rules.values()))
        preview = run_dimension_stage(stage, ruleset, config.constraints,
                                      config.policy)
        stdout.write("\n" + preview.report.to_text() + "\n")

        k_min = int(_prompt(stdin, stdout, "minimum k",
                            str(config.constraints.k_min)))
        l_min = int(_prompt(stdin, stdout, "minimum l",
                            str(config.constraints.l_min)))
        t_max = float(_prompt(stdin, stdout, "maximum t",
                              str(config.constraints.t_max)))
        constraints = FeasibilityConstraints(k_min, l_min, t_max)
        policy = _prompt(stdin, stdout, "policy (max_nue/smallest_d)",
                         config.policy)
        if policy not in POLICIES:
            raise AnonError(f"unknown policy {policy!r}")

        dim = run_dimension_stage(stage, ruleset, constraints, policy)
        stdout.write("\n" + dim.report.to_text() + "\n")

        final = replace(config, thresholds=thresholds, overrides=overrides,
                        ruleset=ruleset, constraints=constraints,
                        policy=policy)
        replay_doc = config_to_dict(final)
        result = run_and_write(final, replay_doc=replay_doc)
        stdout.write(f"artifacts written to {final.output_dir}\n")
        return result.exit_code
    except (EOFError, KeyboardInterrupt):
        stdout.write("\naborted; no artifacts written\n")
        return EXIT_ERROR


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "generate": _cmd_generate,
        "identify": _cmd_identify,
        "deidentify": _cmd_deidentify,
        "evaluate": _cmd_evaluate,
        "run": _cmd_run,
        "serve": _cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except AnonError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: check logs, compare executions, generate
fixtures, run the benchmark corpus, aggregate reports.

Exit codes: 0 clean, 1 violations (or benchmark mismatch), 2 usage,
parse, or config error.
"""

from __future__ import annotations

import dataclasses
import os
import sys

import click

from . import report as report_mod
from . import tracegen
from .checkers import CheckDeps, run_all
from .logmodel import LogFormatError, parse_log, serialize_log
from .ruleset import ProcedureKind, RulesetError, RuleId, default_ruleset, load_ruleset
from .tracegen import Category

EXIT_CLEAN = 0
EXIT_VIOLATIONS = 1
EXIT_ERROR = 2


def _load_rules(ruleset_path: str | None):
    path = ruleset_path or os.environ.get("CRYCHECK_RULESET")
    if path:
        return load_ruleset(path)
    return default_ruleset()


def _fail(message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(EXIT_ERROR)


def _read_log(path: str):
    try:
        with open(path, "rb") as fh:
            return parse_log(fh.read(), strict=False)
    except OSError as exc:
        _fail(str(exc))
    except LogFormatError as exc:
        _fail(f"{path}: {exc}")


_shared_options = [
    click.option("--ruleset", "ruleset_path", type=str, default=None,
                 help="Rule configuration file (default: $CRYCHECK_RULESET)."),
    click.option("--nist-alpha", type=float, default=0.01, show_default=True,
                 help="Significance level for the randomness battery."),
    click.option("--min-match-bytes", type=int, default=4, show_default=True,
                 help="Minimum value size considered by the constant-value check."),
]


def _with_shared(func):
    for opt in reversed(_shared_options):
        func = opt(func)
    return func


@click.group()
def main():
    """Crypto-API misuse detection over execution logs."""


def _run_check(log_path, second_log_path, ruleset_path, fmt,
               nist_alpha, min_match_bytes):
    try:
        rules = _load_rules(ruleset_path)
    except (OSError, RulesetError) as exc:
        _fail(str(exc))
    log_a = _read_log(log_path)
    log_b = _read_log(second_log_path) if second_log_path else None
    extra_warnings = []
    if log_b is None:
        disabled = [r.id.value for r in rules
                    if r.enabled and r.kind is ProcedureKind.CONSTANT]
        if disabled:
            rules = [
                dataclasses.replace(r, enabled=False)
                if r.kind is ProcedureKind.CONSTANT else r
                for r in rules
            ]
            extra_warnings.append(
                "constant-value rules disabled (single log given): "
                + ", ".join(disabled)
            )
    deps = CheckDeps(nist_alpha=nist_alpha, min_match_bytes=min_match_bytes)
    report = run_all(log_a, log_b, rules, deps)
    if extra_warnings:
        report = dataclasses.replace(
            report, warnings=report.warnings + tuple(extra_warnings))
    if fmt == "json":
        click.echo(report_mod.render_json(report).decode("utf-8"))
    else:
        click.echo(report_mod.render_text(report), nl=False)
    sys.exit(EXIT_VIOLATIONS if report.violated_rules else EXIT_CLEAN)


@main.command()
@click.argument("log_path", type=str)
@click.argument("second_log_path", type=str, required=False)
@click.option("--format", "fmt", type=click.Choice(["text", "json"]),
              default="text", show_default=True)
@_with_shared
def check(log_path, second_log_path, fmt, ruleset_path,
          nist_alpha, min_match_bytes):
    """Check one or two execution logs against the ruleset."""
    _run_check(log_path, second_log_path, ruleset_path, fmt,
               nist_alpha, min_match_bytes)


@main.command()
@click.argument("log_path", type=str)
@click.argument("second_log_path", type=str)
@click.option("--format", "fmt", type=click.Choice(["text", "json"]),
              default="text", show_default=True)
@_with_shared
def compare(log_path, second_log_path, fmt, ruleset_path,
            nist_alpha, min_match_bytes):
    """Check two executions of the same app (enables constant-value rules)."""
    _run_check(log_path, second_log_path, ruleset_path, fmt,
               nist_alpha, min_match_bytes)


@main.command()
@click.argument("scenario_path", type=str)
@click.argument("out_dir", type=str)
def gen(scenario_path, out_dir):
    """Generate a pair of synthetic logs from a scenario file."""
    try:
        with open(scenario_path, "r", encoding="utf-8") as fh:
            scenario = tracegen.parse_scenario_text(fh.read())
    except OSError as exc:
        _fail(str(exc))
    except tracegen.TracegenError as exc:
        _fail(f"{scenario_path}: {exc}")
    try:
        log_a, log_b = tracegen.generate(scenario)
    except tracegen.TracegenError as exc:
        _fail(str(exc))
    os.makedirs(out_dir, exist_ok=True)
    for suffix, log in (("1", log_a), ("2", log_b)):
        path = os.path.join(out_dir, f"{scenario.name}.{suffix}.log")
        with open(path, "wb") as fh:
            fh.write(serialize_log(log))
        click.echo(path)
    sys.exit(EXIT_CLEAN)


@main.command()
@click.option("--category", "category_name",
              type=click.Choice([c.value for c in Category]), default=None,
              help="Only run scenarios of one category.")
@_with_shared
def bench(category_name, ruleset_path, nist_alpha, min_match_bytes):
    """Run the built-in benchmark corpus and print confusion counts."""
    try:
        rules = _load_rules(ruleset_path)
    except (OSError, RulesetError) as exc:
        _fail(str(exc))
    deps = CheckDeps(nist_alpha=nist_alpha, min_match_bytes=min_match_bytes)
    corpus = tracegen.builtin_corpus()
    category = Category(category_name) if category_name else None
    scenarios = [s for s in corpus.scenarios
                 if category is None or s.category is category]
    per_rule = {rid: [0, 0, 0, 0] for rid in RuleId}  # tp, tn, fn, fp
    expected_totals = [0, 0, 0, 0]
    for scenario in sorted(scenarios, key=lambda s: s.name):
        log_a, log_b = tracegen.generate(scenario)
        report = run_all(log_a, log_b, rules, deps)
        flagged = set(report.violated_rules)
        expected = set(corpus.expected[scenario.name])
        target = corpus.targets[scenario.name]
        triggered = any(t for _, t in scenario.misuses)
        if triggered:
            expected_totals[0] += 1
        elif scenario.category is Category.ARGUMENT_SENSITIVE:
            expected_totals[2] += 1
        else:
            expected_totals[1] += 1
        if flagged - expected:
            per_rule[target][3] += 1
        elif triggered:
            per_rule[target][0 if flagged == expected else 2] += 1
        elif flagged:
            per_rule[target][3] += 1
        elif scenario.category is Category.ARGUMENT_SENSITIVE:
            per_rule[target][2] += 1
        else:
            per_rule[target][1] += 1
    click.echo("rule   tp  tn  fn  fp")
    totals = [0, 0, 0, 0]
    for rid in RuleId:
        counts = per_rule[rid]
        if any(counts):
            click.echo(f"{rid.value}  {counts[0]:3d} {counts[1]:3d} "
                       f"{counts[2]:3d} {counts[3]:3d}")
        for i in range(4):
            totals[i] += counts[i]
    click.echo(f"total  {totals[0]:3d} {totals[1]:3d} {totals[2]:3d} {totals[3]:3d}")
    ok = totals[:3] == expected_totals[:3] and totals[3] == 0
    sys.exit(EXIT_CLEAN if ok else EXIT_VIOLATIONS)


@main.command()
@click.argument("report_dir", type=str)
@click.option("--csv", "csv_path", type=str, default=None,
              help="Also write per-rule counts as CSV.")
@click.option("--figure", "figure_path", type=str, default=None,
              help="Also render a per-rule bar chart to this file.")
def aggregate(report_dir, csv_path, figure_path):
    """Aggregate a directory of JSON reports into per-rule counts."""
    try:
        names = sorted(os.listdir(report_dir))
    except OSError as exc:
        _fail(str(exc))
    reports = []
    for name in names:
        if not name.endswith(".json"):
            continue
        path = os.path.join(report_dir, name)
        try:
            with open(path, "rb") as fh:
                reports.append(report_mod.parse_report(fh.read()))
        except (OSError, report_mod.MalformedReport) as exc:
            _fail(f"{path}: {exc}")
    try:
        stats = report_mod.aggregate(reports)
    except report_mod.DuplicateAppId as exc:
        _fail(f"duplicate app_id: {exc}")
    if csv_path:
        report_mod.write_stats_csv(stats, csv_path)
    if figure_path:
        report_mod.write_stats_figure(stats, figure_path)
    click.echo(report_mod.stats_json(stats).decode("utf-8"))
    sys.exit(EXIT_CLEAN)


if __name__ == "__main__":
    main()

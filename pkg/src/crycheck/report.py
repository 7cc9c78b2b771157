"""Report serialization (text and canonical JSON) and aggregation.

The JSON layout is the machine contract consumed by CI and by the
aggregate command: sorted keys, compact separators, UTF-8 bytes, so
semantically equal reports serialize byte-identically.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from datetime import datetime, timezone

from .checkers import Report, RuleResult, Violation
from .logmodel import ParamValue
from .ruleset import RuleId

SCHEMA = "report/1"
#: Byte values are truncated in reports; full values stay in the log.
MAX_VALUE_HEX_CHARS = 64


class ReportError(Exception):
    pass


class MalformedReport(ReportError):
    pass


class DuplicateAppId(ReportError):
    pass


def _render_value(value: ParamValue) -> str:
    if value.kind == "b":
        hexed = value.value.hex()
        if len(hexed) > MAX_VALUE_HEX_CHARS:
            extra = len(hexed) - MAX_VALUE_HEX_CHARS
            return hexed[:MAX_VALUE_HEX_CHARS] + f"…+{extra}"
        return hexed
    if value.kind == "o":
        return "1" if value.value else "0"
    return str(value.value)


def render_text(report: Report) -> str:
    lines = [f"app {report.app_id}"]
    for result in report.results:
        if not result.enabled:
            status = "disabled"
        elif result.violated:
            status = f"VIOLATED({result.total_violations})"
        else:
            status = "ok"
        lines.append(f"{result.rule.value}  {status}")
    for result in report.results:
        if not result.violated:
            continue
        lines.append("")
        lines.append(f"{result.rule.value}:")
        for v in result.violations:
            refs = ", ".join(f"{eid}#{seq}" for eid, seq in v.evidence)
            lines.append(f"  - {v.message} [{refs}]")
            for value in v.offending_values:
                lines.append(f"    value: {_render_value(value)}")
        hidden = result.total_violations - len(result.violations)
        if hidden > 0:
            lines.append(f"  ({hidden} more not shown)")
    for warning in report.warnings:
        lines.append(f"warning: {warning}")
    return "\n".join(lines) + "\n"


def render_json(report: Report) -> bytes:
    doc = {
        "schema": SCHEMA,
        "app_id": report.app_id,
        "rules": [
            {
                "id": r.rule.value,
                "enabled": r.enabled,
                "violated": r.violated,
                "count": r.total_violations,
                "violations": [
                    {
                        "message": v.message,
                        "evidence": [
                            {"execution_id": eid, "seq": seq}
                            for eid, seq in v.evidence
                        ],
                        "values": [_render_value(val) for val in v.offending_values],
                    }
                    for v in r.violations
                ],
            }
            for r in report.results
        ],
        "warnings": list(report.warnings),
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"),
                      ensure_ascii=False).encode("utf-8")


def parse_report(data: bytes) -> Report:
    """Inverse of render_json up to offending-value truncation: parsed
    reports carry violation messages and evidence but not typed values."""
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedReport(str(exc))
    if not isinstance(doc, dict) or doc.get("schema") != SCHEMA:
        raise MalformedReport(f"unknown schema {doc.get('schema')!r}"
                              if isinstance(doc, dict) else "not an object")
    try:
        results = []
        for entry in doc["rules"]:
            rule = RuleId(entry["id"])
            violations = tuple(
                Violation(
                    rule=rule,
                    message=v["message"],
                    evidence=tuple(
                        (e["execution_id"], int(e["seq"]))
                        for e in v["evidence"]
                    ),
                )
                for v in entry["violations"]
            )
            results.append(RuleResult(
                rule=rule,
                enabled=bool(entry["enabled"]),
                violations=violations,
                total_violations=int(entry["count"]),
            ))
        return Report(
            app_id=doc["app_id"],
            results=tuple(results),
            warnings=tuple(doc.get("warnings", ())),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedReport(f"bad report structure: {exc!r}")


@dataclass(frozen=True)
class AggregateStats:
    total_apps: int
    per_rule: dict[RuleId, tuple[int, float]]  # count, fraction of apps
    generated_at: str


def aggregate(reports: list[Report], generated_at: str | None = None) -> AggregateStats:
    """Per-rule count of apps with at least one violation."""
    seen = set()
    counts = {rid: 0 for rid in RuleId}
    for report in reports:
        if report.app_id in seen:
            raise DuplicateAppId(report.app_id)
        seen.add(report.app_id)
        for rid in report.violated_rules:
            counts[rid] += 1
    total = len(reports)
    per_rule = {
        rid: (count, count / total if total else 0.0)
        for rid, count in counts.items()
    }
    stamp = generated_at if generated_at is not None else \
        datetime.now(timezone.utc).isoformat(timespec="seconds")
    return AggregateStats(total_apps=total, per_rule=per_rule,
                          generated_at=stamp)


def stats_json(stats: AggregateStats) -> bytes:
    doc = {
        "schema": "aggregate/1",
        "total_apps": stats.total_apps,
        "generated_at": stats.generated_at,
        "rules": {
            rid.value: {"count": count, "fraction": fraction}
            for rid, (count, fraction) in stats.per_rule.items()
        },
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")


def write_stats_csv(stats: AggregateStats, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rule", "violating_apps", "fraction"])
        for rid in RuleId:
            count, fraction = stats.per_rule[rid]
            writer.writerow([rid.value, count, f"{fraction:.6f}"])


def write_stats_figure(stats: AggregateStats, path: str) -> None:
    """Bar chart of violating-app counts per rule, written to path."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rules = [rid.value for rid in RuleId]
    counts = [stats.per_rule[rid][0] for rid in RuleId]
    fig, ax = plt.subplots(figsize=(12, 4))
    ax.bar(rules, counts, color="#3465a4")
    ax.set_ylabel("apps with violation")
    ax.set_xlabel("rule")
    ax.set_title(f"Rule violations across {stats.total_apps} apps")
    ax.tick_params(axis="x", rotation=60)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)

"""The four rule-checking procedures and the orchestrator.

Each of the 26 rules is verified by exactly one generic procedure:

* unacceptable values: per-event predicate over logged parameters;
* constant values: a value for the bound parameter appears in the logs
  of two distinct executions of the same app;
* badly-derived values: key/IV randomness judged by provenance (was it
  produced by a logged random generator?) or, failing that, by the
  statistical battery;
* reused values: duplicate values (or (key, IV) pairs) across all
  provided logs.

All functions are pure over immutable logs; run_all assembles a
deterministic per-rule Report.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from . import passwords as pw
from . import randomness
from .logmodel import CryptoClass, CryptoEvent, ExecutionLog, ParamKey, ParamValue
from .ruleset import ProcedureKind, RuleId, RuleSpec

DEFAULT_EVIDENCE_CAP = 20
#: Constant-procedure values shorter than this are ignored as likely
#: coincidental matches.
DEFAULT_MIN_MATCH_BYTES = 4
#: Minimum length for subsequence (truncation/concatenation) provenance
#: matches; exact-equality matches have no minimum.
ORIGIN_MIN_SUBSEQ_BYTES = 8


class CheckerError(Exception):
    pass


class SameExecutionId(CheckerError):
    pass


class MissingSecondLog(CheckerError):
    pass


class ValueOrigin(enum.Enum):
    SECURE_RNG = "secure_rng"
    INSECURE_RNG = "insecure_rng"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Violation:
    rule: RuleId
    message: str
    evidence: tuple[tuple[str, int], ...]  # (execution_id, seq)
    offending_values: tuple[ParamValue, ...] = ()


@dataclass(frozen=True)
class RuleResult:
    rule: RuleId
    enabled: bool
    violations: tuple[Violation, ...]
    total_violations: int

    @property
    def violated(self) -> bool:
        return self.total_violations > 0


@dataclass(frozen=True)
class Report:
    app_id: str
    results: tuple[RuleResult, ...]
    warnings: tuple[str, ...] = ()

    def result(self, rule: RuleId) -> RuleResult:
        return next(r for r in self.results if r.rule is rule)

    @property
    def violated_rules(self) -> tuple[RuleId, ...]:
        return tuple(r.rule for r in self.results if r.violated)


@dataclass
class CheckDeps:
    """Injectable collaborators for the procedures that need them."""

    battery: object = None  # callable bytes -> BatteryResult
    scorer: object = None  # callable str -> PasswordScore
    blacklist: pw.Blacklist | None = None
    nist_alpha: float = randomness.DEFAULT_ALPHA
    min_match_bytes: int = DEFAULT_MIN_MATCH_BYTES
    evidence_cap: int = DEFAULT_EVIDENCE_CAP

    def run_battery(self, value: bytes):
        if self.battery is not None:
            return self.battery(value)
        return randomness.run_battery(value, self.nist_alpha)

    def score(self, password: str) -> int:
        scorer = self.scorer if self.scorer is not None else pw.score
        return scorer(password).score

    def is_blacklisted(self, password: str) -> bool:
        return pw.is_blacklisted(password, self.blacklist)


def _norm(value: ParamValue | None) -> str | None:
    if value is None or value.kind != "t":
        return None
    return value.value.upper()


_NOPADDING = {"NOPADDING", "NOPAD", "RAW"}
_PKCS1_V15 = {"PKCS1-V1.5", "PKCS1V1.5", "PKCS1-V1_5", "PKCS1PADDING", "PKCS#1"}


def effective_params(ev: CryptoEvent) -> dict[ParamKey, ParamValue]:
    """Event params with combined transform strings split up.

    A cipher transform logged whole under ``alg`` (``AES/ECB/PKCS5Padding``)
    is normalized to separate alg/mode/pad entries; explicitly logged
    entries win.
    """
    params = dict(ev.params)
    alg = params.get(ParamKey.ALG)
    if (
        ev.cls in (CryptoClass.SYMM_ENCRYPTION, CryptoClass.ASYMM_ENCRYPTION)
        and alg is not None
        and alg.kind == "t"
        and "/" in alg.value
    ):
        parts = alg.value.split("/")
        params[ParamKey.ALG] = ParamValue.text(parts[0])
        if len(parts) > 1 and ParamKey.MODE not in params and ev.cls is CryptoClass.SYMM_ENCRYPTION:
            params[ParamKey.MODE] = ParamValue.text(parts[1])
        pad_idx = 2 if ev.cls is CryptoClass.SYMM_ENCRYPTION else 1
        if len(parts) > pad_idx and ParamKey.PAD not in params:
            params[ParamKey.PAD] = ParamValue.text(parts[pad_idx])
    return params


def _unacceptable_failure(
    ev: CryptoEvent, spec: RuleSpec, deps: CheckDeps
) -> tuple[str, tuple[ParamValue, ...]] | None:
    """Reason and offending values when ev violates an unacceptable-value
    rule, else None. Missing parameters make a predicate inapplicable."""
    p = effective_params(ev)
    rid = spec.id
    if rid is RuleId.R01 and ev.cls is CryptoClass.MESSAGE_DIGEST:
        alg = _norm(p.get(ParamKey.ALG))
        if alg is not None and alg in spec.broken_hashes:
            return f"broken hash algorithm {alg}", (p[ParamKey.ALG],)
    elif rid is RuleId.R02 and ev.cls is CryptoClass.SYMM_ENCRYPTION:
        alg = _norm(p.get(ParamKey.ALG))
        if alg is not None and alg in spec.broken_ciphers:
            return f"broken cipher {alg}", (p[ParamKey.ALG],)
    elif rid is RuleId.R03 and ev.cls is CryptoClass.SYMM_ENCRYPTION:
        mode = _norm(p.get(ParamKey.MODE))
        blocks = p.get(ParamKey.NUM_BLOCKS)
        if mode == "ECB" and blocks is not None and blocks.kind == "u" \
                and blocks.value > spec.thresholds["max_ecb_blocks"]:
            return f"ECB mode over {blocks.value} data blocks", (blocks,)
    elif rid is RuleId.R04 and ev.cls is CryptoClass.SYMM_ENCRYPTION:
        if _norm(p.get(ParamKey.MODE)) == "CBC":
            return "CBC operation mode", (p.get(ParamKey.MODE),)
    elif rid is RuleId.R11 and ev.cls is CryptoClass.KEY_DERIVATION:
        salt = p.get(ParamKey.SALT)
        if salt is not None and salt.kind == "b" \
                and len(salt.value) * 8 < spec.thresholds["min_salt_bits"]:
            return f"salt of {len(salt.value) * 8} bits", (salt,)
    elif rid is RuleId.R13 and ev.cls is CryptoClass.KEY_DERIVATION:
        iters = p.get(ParamKey.ITER)
        if iters is not None and iters.kind == "u" \
                and iters.value < spec.thresholds["min_iterations"]:
            return f"{iters.value} key-derivation iterations", (iters,)
    elif rid is RuleId.R14 and ev.cls is CryptoClass.KEY_DERIVATION:
        password = p.get(ParamKey.PASS)
        if password is not None and password.kind == "t":
            got = deps.score(password.value)
            if got < spec.thresholds["min_password_score"]:
                return f"password with strength score {got}", (password,)
    elif rid is RuleId.R15 and ev.cls is CryptoClass.KEY_DERIVATION:
        password = p.get(ParamKey.PASS)
        if password is not None and password.kind == "t" \
                and deps.is_blacklisted(password.value):
            return "blacklisted password", (password,)
    elif rid is RuleId.R18 and ev.cls is CryptoClass.RANDOM_GENERATOR:
        alg = _norm(p.get(ParamKey.ALG))
        if alg is not None and alg != "SECURE":
            return "random generator not suited for crypto", (p[ParamKey.ALG],)
    elif rid is RuleId.R19 and ev.cls is CryptoClass.ASYMM_ENCRYPTION:
        key = p.get(ParamKey.KEY)
        if _norm(p.get(ParamKey.ALG)) == "RSA" and key is not None \
                and key.kind == "u" \
                and key.value < spec.thresholds["min_rsa_bits"]:
            return f"RSA key of {key.value} bits", (key,)
    elif rid is RuleId.R20 and ev.cls is CryptoClass.ASYMM_ENCRYPTION:
        pad = _norm(p.get(ParamKey.PAD))
        if _norm(p.get(ParamKey.ALG)) == "RSA" and pad in _NOPADDING:
            return "textbook RSA (no padding)", (p.get(ParamKey.PAD),)
    elif rid is RuleId.R21 and ev.cls is CryptoClass.ASYMM_ENCRYPTION:
        pad = _norm(p.get(ParamKey.PAD))
        if _norm(p.get(ParamKey.ALG)) == "RSA" and pad in _PKCS1_V15:
            return "RSA with PKCS1-v1.5 padding", (p.get(ParamKey.PAD),)
    elif rid is RuleId.R22 and ev.cls is CryptoClass.SSL_TLS_CERT:
        if _norm(p.get(ParamKey.URLPROT)) == "HTTP":
            return "plain HTTP connection", (p.get(ParamKey.URLPROT),)
    elif rid is RuleId.R24 and ev.cls is CryptoClass.SSL_TLS_CERT:
        allhost = p.get(ParamKey.ALLHOST)
        if allhost is not None and allhost.kind == "o" and allhost.value:
            return "hostname verifier accepts any host", (allhost,)
    elif rid is RuleId.R25 and ev.cls is CryptoClass.SSL_TLS_CERT:
        allcert = p.get(ParamKey.ALLCERT)
        if allcert is not None and allcert.kind == "o" and allcert.value:
            return "trust manager accepts any certificate", (allcert,)
    elif rid is RuleId.R26 and ev.cls is CryptoClass.SSL_TLS_CERT:
        sethost = p.get(ParamKey.SETHOST)
        if sethost is not None:
            return "default hostname verifier replaced", (sethost,)
    return None


def check_unacceptable(
    log: ExecutionLog, spec: RuleSpec, deps: CheckDeps | None = None
) -> list[Violation]:
    assert spec.kind is ProcedureKind.UNACCEPTABLE
    deps = deps or CheckDeps()
    violations = []
    for ev in log.events:
        failure = _unacceptable_failure(ev, spec, deps)
        if failure is not None:
            reason, values = failure
            violations.append(Violation(
                rule=spec.id,
                message=f"{spec.description}: {reason}",
                evidence=((log.execution_id, ev.seq),),
                offending_values=tuple(v for v in values if v is not None),
            ))
    return violations


def _comparable(value: ParamValue, min_bytes: int) -> bool:
    if value.kind == "b":
        return len(value.value) >= min_bytes
    if value.kind == "t":
        return len(value.value.encode("utf-8")) >= min_bytes
    return False


def check_constant(
    log_a: ExecutionLog,
    log_b: ExecutionLog,
    spec: RuleSpec,
    deps: CheckDeps | None = None,
) -> list[Violation]:
    """Values of the bound parameter present in both executions' logs."""
    assert spec.kind is ProcedureKind.CONSTANT
    deps = deps or CheckDeps()
    if log_a.execution_id == log_b.execution_id:
        raise SameExecutionId(
            f"both logs claim execution {log_a.execution_id!r}"
        )
    cls, key = spec.binding
    from .logmodel import values_of

    a_pairs = [(s, v) for s, v in values_of(log_a, cls, key)
               if _comparable(v, deps.min_match_bytes)]
    b_pairs = [(s, v) for s, v in values_of(log_b, cls, key)
               if _comparable(v, deps.min_match_bytes)]
    b_values = {v for _, v in b_pairs}
    shared = []
    seen = set()
    for _, v in a_pairs:
        if v in b_values and v not in seen:
            seen.add(v)
            shared.append(v)
    violations = []
    for v in shared:
        evidence = tuple(
            (log.execution_id, s)
            for log, pairs in ((log_a, a_pairs), (log_b, b_pairs))
            for s, val in pairs
            if val == v
        )
        violations.append(Violation(
            rule=spec.id,
            message=f"{spec.description}: value appears in both executions",
            evidence=evidence,
            offending_values=(v,),
        ))
    return violations


def _subseq(needle: bytes, haystack: bytes) -> bool:
    return needle in haystack


def classify_origin(
    value: bytes, log: ExecutionLog, before_seq: int | None = None
) -> ValueOrigin:
    """Provenance of value from the log's random-generator outputs.

    A value matches a generator output if it equals it, or (at 8+ bytes)
    if one is a contiguous subsequence of the other, covering apps that
    truncate or concatenate generator output.
    """
    secure = False
    insecure = False
    for ev in log.events:
        if ev.cls is not CryptoClass.RANDOM_GENERATOR:
            continue
        if before_seq is not None and ev.seq >= before_seq:
            break
        out = ev.params.get(ParamKey.OUT)
        if out is None or out.kind != "b":
            continue
        matches = out.value == value or (
            min(len(value), len(out.value)) >= ORIGIN_MIN_SUBSEQ_BYTES
            and (_subseq(value, out.value) or _subseq(out.value, value))
        )
        if not matches:
            continue
        if _norm(ev.params.get(ParamKey.ALG)) == "SECURE":
            secure = True
        else:
            insecure = True
    if secure:
        return ValueOrigin.SECURE_RNG
    if insecure:
        return ValueOrigin.INSECURE_RNG
    return ValueOrigin.UNKNOWN


def check_badly_derived(
    log: ExecutionLog, spec: RuleSpec, deps: CheckDeps | None = None
) -> list[Violation]:
    assert spec.kind is ProcedureKind.BADLY_DERIVED
    deps = deps or CheckDeps()
    cls, key = spec.binding
    from .logmodel import values_of

    violations = []
    for seq, value in values_of(log, cls, key):
        if value.kind != "b":
            continue
        origin = classify_origin(value.value, log, before_seq=seq)
        if origin is ValueOrigin.SECURE_RNG:
            continue
        if origin is ValueOrigin.INSECURE_RNG:
            reason = "produced by an insecure random generator"
        else:
            result = deps.run_battery(value.value)
            if not result.any_fail:
                continue
            failed = sorted(
                name for name, o in result.outcomes.items() if o.failed
            )
            reason = f"failed randomness tests: {', '.join(failed)}"
        violations.append(Violation(
            rule=spec.id,
            message=f"{spec.description}: {reason}",
            evidence=((log.execution_id, seq),),
            offending_values=(value,),
        ))
    return violations


def check_reused(
    logs: list[ExecutionLog], spec: RuleSpec, deps: CheckDeps | None = None
) -> list[Violation]:
    """Duplicate values (R12 salt, R16 password) or (key, IV) pairs (R09)
    across the events of all provided logs."""
    assert spec.kind is ProcedureKind.REUSED
    assert logs
    occurrences: dict[tuple, list[tuple[str, int]]] = {}
    values_by_group: dict[tuple, tuple[ParamValue, ...]] = {}
    if spec.id is RuleId.R09:
        for log in logs:
            for ev in log.events:
                if ev.cls is not CryptoClass.SYMM_ENCRYPTION:
                    continue
                key = ev.params.get(ParamKey.KEY)
                iv = ev.params.get(ParamKey.IV)
                if key is None or iv is None:
                    continue
                group = (key, iv)
                occurrences.setdefault(group, []).append(
                    (log.execution_id, ev.seq)
                )
                values_by_group[group] = (key, iv)
    else:
        cls, key = spec.binding
        from .logmodel import values_of

        for log in logs:
            for seq, value in values_of(log, cls, key):
                group = (value,)
                occurrences.setdefault(group, []).append(
                    (log.execution_id, seq)
                )
                values_by_group[group] = (value,)
    violations = []
    for group, refs in occurrences.items():
        if len(refs) < 2:
            continue
        violations.append(Violation(
            rule=spec.id,
            message=f"{spec.description}: value used {len(refs)} times",
            evidence=tuple(refs),
            offending_values=values_by_group[group],
        ))
    return violations


def run_all(
    log_a: ExecutionLog,
    log_b: ExecutionLog | None,
    ruleset: list[RuleSpec],
    deps: CheckDeps | None = None,
) -> Report:
    """Dispatch every enabled rule to its procedure and assemble a Report.

    Single-log procedures run over both logs when a second one is given.
    Enabled constant rules require the second log.
    """
    deps = deps or CheckDeps()
    constant_enabled = [
        s for s in ruleset
        if s.enabled and s.kind is ProcedureKind.CONSTANT
    ]
    if constant_enabled and log_b is None:
        raise MissingSecondLog(
            "constant-value rules need logs from two executions: "
            + ", ".join(s.id.value for s in constant_enabled)
        )
    single_logs = [log_a] + ([log_b] if log_b is not None else [])
    results = []
    for spec in ruleset:
        if not spec.enabled:
            results.append(RuleResult(spec.id, False, (), 0))
            continue
        if spec.kind is ProcedureKind.UNACCEPTABLE:
            violations = [
                v for log in single_logs
                for v in check_unacceptable(log, spec, deps)
            ]
        elif spec.kind is ProcedureKind.CONSTANT:
            violations = check_constant(log_a, log_b, spec, deps)
        elif spec.kind is ProcedureKind.BADLY_DERIVED:
            violations = [
                v for log in single_logs
                for v in check_badly_derived(log, spec, deps)
            ]
        else:
            violations = check_reused(single_logs, spec, deps)
        results.append(RuleResult(
            rule=spec.id,
            enabled=True,
            violations=tuple(violations[:deps.evidence_cap]),
            total_violations=len(violations),
        ))
    warnings = tuple(
        f"{log.execution_id}: {w}" for log in single_logs for w in log.warnings
    )
    return Report(app_id=log_a.app_id, results=tuple(results),
                  warnings=warnings)

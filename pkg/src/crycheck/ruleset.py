"""The 26 crypto rules: ids, checking-procedure kinds, bindings, thresholds.

Rules are declared with sensible defaults and can be tuned or disabled
through a plain-text config file (see load_ruleset).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

from .logmodel import CryptoClass, ParamKey


class RuleId(enum.Enum):
    R01 = "R-01"
    R02 = "R-02"
    R03 = "R-03"
    R04 = "R-04"
    R05 = "R-05"
    R06 = "R-06"
    R07 = "R-07"
    R08 = "R-08"
    R09 = "R-09"
    R10 = "R-10"
    R11 = "R-11"
    R12 = "R-12"
    R13 = "R-13"
    R14 = "R-14"
    R15 = "R-15"
    R16 = "R-16"
    R17 = "R-17"
    R18 = "R-18"
    R19 = "R-19"
    R20 = "R-20"
    R21 = "R-21"
    R22 = "R-22"
    R23 = "R-23"
    R24 = "R-24"
    R25 = "R-25"
    R26 = "R-26"


class ProcedureKind(enum.Enum):
    UNACCEPTABLE = "unacceptable"
    CONSTANT = "constant"
    BADLY_DERIVED = "badly_derived"
    REUSED = "reused"


#: Total, fixed map from rule to the procedure that checks it.
PROCEDURE_OF: dict[RuleId, ProcedureKind] = {
    **{r: ProcedureKind.UNACCEPTABLE for r in (
        RuleId.R01, RuleId.R02, RuleId.R03, RuleId.R04, RuleId.R11,
        RuleId.R13, RuleId.R14, RuleId.R15, RuleId.R18, RuleId.R19,
        RuleId.R20, RuleId.R21, RuleId.R22, RuleId.R24, RuleId.R25,
        RuleId.R26,
    )},
    **{r: ProcedureKind.CONSTANT for r in (
        RuleId.R05, RuleId.R07, RuleId.R10, RuleId.R17, RuleId.R23,
    )},
    RuleId.R06: ProcedureKind.BADLY_DERIVED,
    RuleId.R08: ProcedureKind.BADLY_DERIVED,
    RuleId.R09: ProcedureKind.REUSED,
    RuleId.R12: ProcedureKind.REUSED,
    RuleId.R16: ProcedureKind.REUSED,
}

#: (class, parameter) binding for the single-parameter procedures.
BINDING_OF: dict[RuleId, tuple[CryptoClass, ParamKey]] = {
    RuleId.R05: (CryptoClass.SYMM_ENCRYPTION, ParamKey.KEY),
    RuleId.R06: (CryptoClass.SYMM_ENCRYPTION, ParamKey.KEY),
    RuleId.R07: (CryptoClass.SYMM_ENCRYPTION, ParamKey.IV),
    RuleId.R08: (CryptoClass.SYMM_ENCRYPTION, ParamKey.IV),
    RuleId.R10: (CryptoClass.KEY_DERIVATION, ParamKey.SALT),
    RuleId.R12: (CryptoClass.KEY_DERIVATION, ParamKey.SALT),
    RuleId.R16: (CryptoClass.KEY_DERIVATION, ParamKey.PASS),
    RuleId.R17: (CryptoClass.RANDOM_GENERATOR, ParamKey.SEED),
    RuleId.R23: (CryptoClass.KEY_STORAGE, ParamKey.PASS),
}

DEFAULT_BROKEN_HASHES = frozenset({"SHA1", "SHA-1", "MD2", "MD4", "MD5"})
DEFAULT_BROKEN_CIPHERS = frozenset({"DES", "DESEDE", "3DES", "RC2", "RC4",
                                    "IDEA", "BLOWFISH"})

_RULE_DESCRIPTIONS = {
    RuleId.R01: "broken hash function",
    RuleId.R02: "broken symmetric cipher",
    RuleId.R03: "ECB mode with more than one data block",
    RuleId.R04: "CBC mode (client/server scenarios)",
    RuleId.R05: "constant encryption key",
    RuleId.R06: "badly-derived encryption key",
    RuleId.R07: "constant IV",
    RuleId.R08: "badly-derived IV",
    RuleId.R09: "reused (key, IV) pair",
    RuleId.R10: "constant key-derivation salt",
    RuleId.R11: "short key-derivation salt",
    RuleId.R12: "reused key-derivation salt",
    RuleId.R13: "too few key-derivation iterations",
    RuleId.R14: "weak key-derivation password",
    RuleId.R15: "blacklisted key-derivation password",
    RuleId.R16: "reused password",
    RuleId.R17: "constant PRNG seed",
    RuleId.R18: "insecure random generator",
    RuleId.R19: "short RSA key",
    RuleId.R20: "textbook (unpadded) RSA",
    RuleId.R21: "RSA with PKCS1-v1.5 padding",
    RuleId.R22: "plain HTTP URL connection",
    RuleId.R23: "constant key-store password",
    RuleId.R24: "hostname verifier accepts any host",
    RuleId.R25: "trust manager accepts any certificate",
    RuleId.R26: "default hostname verifier replaced",
}

#: Numeric thresholds, attached only to the rules that use them.
_RULE_THRESHOLDS: dict[RuleId, dict[str, float]] = {
    RuleId.R03: {"max_ecb_blocks": 1},
    RuleId.R11: {"min_salt_bits": 64},
    RuleId.R13: {"min_iterations": 1000},
    RuleId.R14: {"min_password_score": 3},
    RuleId.R19: {"min_rsa_bits": 2048},
}


class RulesetError(Exception):
    pass


class ConfigParse(RulesetError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class UnknownRuleId(RulesetError):
    pass


class UnknownThreshold(RulesetError):
    pass


@dataclass(frozen=True)
class RuleSpec:
    id: RuleId
    kind: ProcedureKind
    description: str
    enabled: bool = True
    thresholds: dict[str, float] = field(default_factory=dict)
    broken_hashes: frozenset[str] = DEFAULT_BROKEN_HASHES
    broken_ciphers: frozenset[str] = DEFAULT_BROKEN_CIPHERS

    @property
    def binding(self) -> tuple[CryptoClass, ParamKey] | None:
        return BINDING_OF.get(self.id)


def default_ruleset() -> list[RuleSpec]:
    """All 26 rules, enabled, with default thresholds and algorithm sets."""
    return [
        RuleSpec(
            id=rid,
            kind=PROCEDURE_OF[rid],
            description=_RULE_DESCRIPTIONS[rid],
            thresholds=dict(_RULE_THRESHOLDS.get(rid, {})),
        )
        for rid in RuleId
    ]


def _parse_rule_id(token: str) -> RuleId:
    try:
        return RuleId[token]
    except KeyError:
        pass
    try:
        return RuleId(token)
    except ValueError:
        raise UnknownRuleId(f"unknown rule id {token!r}")


def load_ruleset(path: str) -> list[RuleSpec]:
    """Default ruleset overlaid with per-rule overrides from a config file.

    Config lines (``#`` comments and blank lines ignored)::

        rule.R13.min_iterations=2000
        rule.R04.enabled=false
        set.broken_ciphers.add=GOST
        set.broken_hashes.remove=MD2
    """
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return apply_config(default_ruleset(), text)


def apply_config(rules: list[RuleSpec], text: str) -> list[RuleSpec]:
    by_id = {r.id: r for r in rules}
    hashes = set(next(iter(by_id.values())).broken_hashes)
    ciphers = set(next(iter(by_id.values())).broken_ciphers)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigParse(f"expected key=value, got {line!r}", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        parts = key.split(".")
        if parts[0] == "rule" and len(parts) == 3:
            rid = _parse_rule_id(parts[1])
            spec = by_id[rid]
            if parts[2] == "enabled":
                if value.lower() not in ("true", "false"):
                    raise ConfigParse(f"bad boolean {value!r}", lineno)
                by_id[rid] = replace(spec, enabled=value.lower() == "true")
            else:
                if parts[2] not in spec.thresholds:
                    raise UnknownThreshold(
                        f"rule {rid.value} has no threshold {parts[2]!r}"
                    )
                try:
                    num = float(value)
                except ValueError:
                    raise ConfigParse(f"bad number {value!r}", lineno)
                thresholds = dict(spec.thresholds)
                thresholds[parts[2]] = num
                by_id[rid] = replace(spec, thresholds=thresholds)
        elif parts[0] == "set" and len(parts) == 3:
            target = {"broken_hashes": hashes, "broken_ciphers": ciphers}.get(parts[1])
            if target is None:
                raise ConfigParse(f"unknown set {parts[1]!r}", lineno)
            if parts[2] == "add":
                target.add(value.upper())
            elif parts[2] == "remove":
                target.discard(value.upper())
            else:
                raise ConfigParse(f"unknown set operation {parts[2]!r}", lineno)
        else:
            raise ConfigParse(f"unknown config key {key!r}", lineno)
    fh_frozen = frozenset(hashes)
    fc_frozen = frozenset(ciphers)
    return [
        replace(by_id[rid], broken_hashes=fh_frozen, broken_ciphers=fc_frozen)
        for rid in RuleId
    ]

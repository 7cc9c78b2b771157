"""Deterministic synthetic execution-log generator with declarative
misuse injection, plus the bundled 198-scenario benchmark corpus.

A Scenario names a set of rules to violate (or to exercise compliantly)
plus benign filler; generate() turns it into a pair of logs for two
executions of the same app. Everything is a pure function of the
scenario seed, so the corpus is reproducible byte for byte.
"""

from __future__ import annotations

import enum
import random
import string
from dataclasses import dataclass, field

from . import passwords as pw
from .logmodel import CryptoClass, CryptoEvent, ExecutionLog, ParamKey, ParamValue
from .randomness import run_battery
from .ruleset import RuleId


class TracegenError(Exception):
    pass


class ConflictingMisuses(TracegenError):
    pass


class ScenarioParse(TracegenError):
    pass


class Category(enum.Enum):
    BASIC = "Basic"
    MISCELLANEOUS = "Miscellaneous"
    INTERPROCEDURAL = "Interprocedural"
    PATH_SENSITIVE = "PathSensitive"
    FIELD_SENSITIVE = "FieldSensitive"
    MULTIPLE_CLASSES = "MultipleClasses"
    ARGUMENT_SENSITIVE = "ArgumentSensitive"


#: Log-level behavior of the first six categories is identical; the tag
#: is provenance metadata. ArgumentSensitive changes trigger=False
#: semantics: the misuse API is never called at all.
_STATIC_CATEGORIES = tuple(c for c in Category if c is not Category.ARGUMENT_SENSITIVE)


@dataclass(frozen=True)
class Scenario:
    name: str
    seed: int
    misuses: tuple[tuple[RuleId, bool], ...]
    benign_events: int
    category: Category

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed out of 64-bit range")
        if self.benign_events < 0:
            raise ValueError("negative benign_events")


@dataclass(frozen=True)
class Corpus:
    scenarios: tuple[Scenario, ...]
    expected: dict[str, frozenset[RuleId]]
    #: rule each scenario tests, for per-rule confusion attribution
    targets: dict[str, RuleId] = field(default_factory=dict)


def parse_scenario_text(text: str) -> Scenario:
    """Plain-text scenario: name=, seed=, category=, benign=, misuse=R05:on."""
    fields: dict[str, str] = {}
    misuses: list[tuple[RuleId, bool]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ScenarioParse(f"line {lineno}: expected key=value")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key == "misuse":
            rid_text, sep, state = value.partition(":")
            if not sep or state not in ("on", "off"):
                raise ScenarioParse(f"line {lineno}: misuse needs :on or :off")
            rid_name = rid_text.strip()
            try:
                rid = RuleId(rid_name) if rid_name.startswith("R-") \
                    else RuleId[rid_name]
            except (KeyError, ValueError):
                raise ScenarioParse(f"line {lineno}: unknown rule {rid_name!r}")
            misuses.append((rid, state == "on"))
        elif key in ("name", "seed", "category", "benign"):
            fields[key] = value
        else:
            raise ScenarioParse(f"line {lineno}: unknown key {key!r}")
    if "name" not in fields:
        raise ScenarioParse("missing name=")
    try:
        seed = int(fields.get("seed", "0"))
        benign = int(fields.get("benign", "0"))
        category = Category(fields.get("category", "Basic"))
    except ValueError as exc:
        raise ScenarioParse(str(exc))
    return Scenario(
        name=fields["name"],
        seed=seed,
        misuses=tuple(misuses),
        benign_events=benign,
        category=category,
    )


def scenario_text(scenario: Scenario) -> str:
    lines = [
        f"name={scenario.name}",
        f"seed={scenario.seed}",
        f"category={scenario.category.value}",
        f"benign={scenario.benign_events}",
    ]
    lines += [
        f"misuse={rid.name}:{'on' if trigger else 'off'}"
        for rid, trigger in scenario.misuses
    ]
    return "\n".join(lines) + "\n"


class _Builder:
    def __init__(self, app_id: str, execution_id: str):
        self.app_id = app_id
        self.execution_id = execution_id
        self.events: list[CryptoEvent] = []

    def add(self, cls: CryptoClass, api: str, **params) -> None:
        converted = {}
        for name, value in params.items():
            key = ParamKey(name)
            if isinstance(value, ParamValue):
                converted[key] = value
            elif isinstance(value, bytes):
                converted[key] = ParamValue.data(value)
            elif isinstance(value, bool):
                converted[key] = ParamValue.flag(value)
            elif isinstance(value, int):
                converted[key] = ParamValue.uint(value)
            else:
                converted[key] = ParamValue.text(value)
        self.events.append(CryptoEvent(len(self.events), cls, api, converted))

    def done(self) -> ExecutionLog:
        return ExecutionLog(
            app_id=self.app_id,
            execution_id=self.execution_id,
            platform="synthetic",
            events=tuple(self.events),
        )


def _random_looking(rng: random.Random, n: int = 16) -> bytes:
    # rejection-sample so hard-coded constants do not also trip the
    # key/IV randomness battery at the default significance level
    while True:
        value = rng.randbytes(n)
        if not run_battery(value).any_fail:
            return value


_PASS_ALPHABET = string.ascii_letters + string.digits


def _strong_pass(rng: random.Random) -> str:
    while True:
        candidate = "".join(rng.choices(_PASS_ALPHABET, k=14))
        if pw.score(candidate).score >= 3 and not pw.is_blacklisted(candidate):
            return candidate


def _provenanced(builder: _Builder, value: bytes) -> None:
    builder.add(CryptoClass.RANDOM_GENERATOR, "SecureRandom.nextBytes",
                alg="Secure", out=value)


_BROKEN_HASH_POOL = ("SHA1", "MD5", "MD2", "MD4")
_BROKEN_CIPHER_POOL = ("DES", "RC2", "RC4", "BLOWFISH", "IDEA", "DESEDE")
_SMALL_RSA_POOL = (512, 768, 1024, 1536, 2047)


def _emit_misuse(rule: RuleId, a: _Builder, b: _Builder,
                 rng: random.Random) -> None:
    both = (a, b)
    if rule is RuleId.R01:
        alg = rng.choice(_BROKEN_HASH_POOL)
        for builder in both:
            builder.add(CryptoClass.MESSAGE_DIGEST, "MessageDigest.digest", alg=alg)
    elif rule is RuleId.R02:
        alg = rng.choice(_BROKEN_CIPHER_POOL)
        for builder in both:
            builder.add(CryptoClass.SYMM_ENCRYPTION, "Cipher.doFinal",
                        alg=f"{alg}/CTR/NoPadding", numBlocks=rng.randrange(1, 6))
    elif rule is RuleId.R03:
        blocks = rng.randrange(2, 9)
        for builder in both:
            builder.add(CryptoClass.SYMM_ENCRYPTION, "Cipher.doFinal",
                        alg="AES/ECB/PKCS5Padding", numBlocks=blocks)
    elif rule is RuleId.R04:
        for builder in both:
            builder.add(CryptoClass.SYMM_ENCRYPTION, "Cipher.doFinal",
                        alg="AES/CBC/PKCS5Padding", numBlocks=rng.randrange(2, 6))
    elif rule is RuleId.R05:
        key = _random_looking(rng)
        for builder in both:
            builder.add(CryptoClass.SYMM_ENCRYPTION, "Cipher.init",
                        alg="AES", mode="GCM", key=key)
    elif rule is RuleId.R06:
        base = rng.randrange(256)
        for i, builder in enumerate(both):
            # low-entropy, fails the battery; distinct per execution so
            # only the derivation rule fires, not the constant-key rule
            builder.add(CryptoClass.SYMM_ENCRYPTION, "Cipher.init",
                        alg="AES", mode="GCM",
                        key=bytes([(base + i) % 256] * 16))
    elif rule is RuleId.R07:
        iv = _random_looking(rng)
        for builder in both:
            builder.add(CryptoClass.SYMM_ENCRYPTION, "Cipher.init",
                        alg="AES", mode="GCM", iv=iv)
    elif rule is RuleId.R08:
        base = rng.randrange(256)
        for i, builder in enumerate(both):
            builder.add(CryptoClass.SYMM_ENCRYPTION, "Cipher.init",
                        alg="AES", mode="GCM",
                        iv=bytes([(base + i) % 256] * 16))
    elif rule is RuleId.R09:
        for builder in both:
            key, iv = rng.randbytes(16), rng.randbytes(16)
            _provenanced(builder, key)
            _provenanced(builder, iv)
            for _ in range(2):
                builder.add(CryptoClass.SYMM_ENCRYPTION, "Cipher.init",
                            alg="AES", mode="GCM", key=key, iv=iv)
    elif rule is RuleId.R10:
        salt = rng.randbytes(16)
        for builder in both:
            builder.add(CryptoClass.KEY_DERIVATION, "PBEKeySpec",
                        alg="PBKDF2WithHmacSHA256", salt=salt, iter=10_000)
    elif rule is RuleId.R11:
        length = rng.randrange(1, 8)
        for builder in both:
            builder.add(CryptoClass.KEY_DERIVATION, "PBEKeySpec",
                        alg="PBKDF2WithHmacSHA256",
                        salt=rng.randbytes(length), iter=10_000)
    elif rule is RuleId.R12:
        for builder in both:
            salt = rng.randbytes(16)
            for _ in range(2):
                builder.add(CryptoClass.KEY_DERIVATION, "PBEKeySpec",
                            alg="PBKDF2WithHmacSHA256", salt=salt, iter=10_000)
    elif rule is RuleId.R13:
        iters = rng.randrange(1, 1000)
        for builder in both:
            builder.add(CryptoClass.KEY_DERIVATION, "PBEKeySpec",
                        alg="PBKDF2WithHmacSHA256",
                        salt=rng.randbytes(16), iter=iters)
    elif rule is RuleId.R14:
        # weak (score < 3) but not on the bundled blacklist, so only the
        # strength rule fires
        pool = [c for c in ("bluehouse7", "silver77", "coffee2016",
                            "tigerlily1", "puppy1234", "garden55")
                if pw.score(c).score < 3 and not pw.is_blacklisted(c)]
        weak = rng.choice(pool)
        for builder in both:
            builder.add(CryptoClass.KEY_DERIVATION, "PBEKeySpec",
                        **{"alg": "PBKDF2WithHmacSHA256", "pass": weak,
                           "salt": rng.randbytes(16), "iter": 10_000})
    elif rule is RuleId.R15:
        listed = rng.choice(("password", "changeit", "123456", "letmein"))
        for builder in both:
            builder.add(CryptoClass.KEY_DERIVATION, "PBEKeySpec",
                        **{"alg": "PBKDF2WithHmacSHA256", "pass": listed,
                           "salt": rng.randbytes(16), "iter": 10_000})
    elif rule is RuleId.R16:
        shared = _strong_pass(rng)
        for builder in both:
            for _ in range(2):
                builder.add(CryptoClass.KEY_DERIVATION, "PBEKeySpec",
                            **{"alg": "PBKDF2WithHmacSHA256", "pass": shared,
                               "salt": rng.randbytes(16), "iter": 10_000})
    elif rule is RuleId.R17:
        seed = rng.randbytes(16)
        for builder in both:
            builder.add(CryptoClass.RANDOM_GENERATOR, "SecureRandom.setSeed",
                        alg="Secure", seed=seed)
    elif rule is RuleId.R18:
        for builder in both:
            builder.add(CryptoClass.RANDOM_GENERATOR, "Random.nextBytes",
                        alg="NotSecure")
    elif rule is RuleId.R19:
        bits = rng.choice(_SMALL_RSA_POOL)
        for builder in both:
            builder.add(CryptoClass.ASYMM_ENCRYPTION, "Cipher.init",
                        alg="RSA", key=bits,
                        pad="OAEPWithSHA-256AndMGF1Padding")
    elif rule is RuleId.R20:
        for builder in both:
            builder.add(CryptoClass.ASYMM_ENCRYPTION, "Cipher.init",
                        alg="RSA", key=3072, pad="NoPadding")
    elif rule is RuleId.R21:
        for builder in both:
            builder.add(CryptoClass.ASYMM_ENCRYPTION, "Cipher.init",
                        alg="RSA", key=3072, pad="PKCS1Padding")
    elif rule is RuleId.R22:
        for builder in both:
            builder.add(CryptoClass.SSL_TLS_CERT, "URL", urlprot="http")
    elif rule is RuleId.R23:
        shared = _strong_pass(rng)
        for builder in both:
            builder.add(CryptoClass.KEY_STORAGE, "KeyStore.load",
                        **{"pass": shared})
    elif rule is RuleId.R24:
        for builder in both:
            builder.add(CryptoClass.SSL_TLS_CERT,
                        "HttpsURLConnection.setHostnameVerifier", allhost=True)
    elif rule is RuleId.R25:
        for builder in both:
            builder.add(CryptoClass.SSL_TLS_CERT, "SSLContext.init",
                        allcert=True)
    elif rule is RuleId.R26:
        for builder in both:
            builder.add(CryptoClass.SSL_TLS_CERT,
                        "HttpsURLConnection.setDefaultHostnameVerifier",
                        sethost="com.example.LaxVerifier")
    else:
        raise TracegenError(f"no misuse emitter for {rule}")


def _emit_compliant(rule: RuleId, a: _Builder, b: _Builder,
                    rng: random.Random) -> None:
    """Events exercising the same API surface as rule, with compliant
    parameters and per-execution fresh values."""
    both = (a, b)
    if rule is RuleId.R01:
        alg = rng.choice(("SHA-256", "SHA-512"))
        for builder in both:
            builder.add(CryptoClass.MESSAGE_DIGEST, "MessageDigest.digest", alg=alg)
    elif rule in (RuleId.R02, RuleId.R03, RuleId.R04):
        blocks = 1 if rule is RuleId.R03 else rng.randrange(1, 6)
        mode = "ECB" if rule is RuleId.R03 else "GCM"
        for builder in both:
            builder.add(CryptoClass.SYMM_ENCRYPTION, "Cipher.doFinal",
                        alg=f"AES/{mode}/NoPadding", numBlocks=blocks)
    elif rule in (RuleId.R05, RuleId.R06, RuleId.R09):
        for builder in both:
            key, iv = rng.randbytes(16), rng.randbytes(16)
            _provenanced(builder, key)
            _provenanced(builder, iv)
            builder.add(CryptoClass.SYMM_ENCRYPTION, "Cipher.init",
                        alg="AES", mode="GCM", key=key, iv=iv)
    elif rule in (RuleId.R07, RuleId.R08):
        for builder in both:
            iv = rng.randbytes(16)
            _provenanced(builder, iv)
            builder.add(CryptoClass.SYMM_ENCRYPTION, "Cipher.init",
                        alg="AES", mode="GCM", iv=iv)
    elif rule in (RuleId.R10, RuleId.R11, RuleId.R12, RuleId.R13):
        for builder in both:
            builder.add(CryptoClass.KEY_DERIVATION, "PBEKeySpec",
                        alg="PBKDF2WithHmacSHA256",
                        salt=rng.randbytes(16), iter=10_000)
    elif rule in (RuleId.R14, RuleId.R15, RuleId.R16):
        for builder in both:
            builder.add(CryptoClass.KEY_DERIVATION, "PBEKeySpec",
                        **{"alg": "PBKDF2WithHmacSHA256",
                           "pass": _strong_pass(rng),
                           "salt": rng.randbytes(16), "iter": 10_000})
    elif rule in (RuleId.R17, RuleId.R18):
        for builder in both:
            builder.add(CryptoClass.RANDOM_GENERATOR, "SecureRandom.nextBytes",
                        alg="Secure", out=rng.randbytes(16))
    elif rule in (RuleId.R19, RuleId.R20, RuleId.R21):
        bits = rng.choice((2048, 3072, 4096))
        for builder in both:
            builder.add(CryptoClass.ASYMM_ENCRYPTION, "Cipher.init",
                        alg="RSA", key=bits,
                        pad="OAEPWithSHA-256AndMGF1Padding")
    elif rule is RuleId.R23:
        for builder in both:
            builder.add(CryptoClass.KEY_STORAGE, "KeyStore.load",
                        **{"pass": _strong_pass(rng)})
    else:  # the TLS rules: a well-behaved connection
        for builder in both:
            builder.add(CryptoClass.SSL_TLS_CERT, "URL",
                        urlprot="https", allhost=False, allcert=False)


_FILLER_RULES = (RuleId.R01, RuleId.R17, RuleId.R05, RuleId.R10,
                 RuleId.R19, RuleId.R22, RuleId.R23)


def generate(scenario: Scenario) -> tuple[ExecutionLog, ExecutionLog]:
    seen = set()
    for rid, _ in scenario.misuses:
        if rid in seen:
            raise ConflictingMisuses(f"{rid.value} listed twice")
        seen.add(rid)
    rng = random.Random(scenario.seed)
    a = _Builder(scenario.name, "e1")
    b = _Builder(scenario.name, "e2")
    for rid, trigger in scenario.misuses:
        if trigger:
            _emit_misuse(rid, a, b, rng)
        elif scenario.category is not Category.ARGUMENT_SENSITIVE:
            _emit_compliant(rid, a, b, rng)
        # ArgumentSensitive without trigger: the API is never reached
    for i in range(scenario.benign_events):
        _emit_compliant(_FILLER_RULES[i % len(_FILLER_RULES)], a, b, rng)
    return a.done(), b.done()


#: Per-rule (true positives, true negatives, false negatives) the
#: bundled corpus must reproduce under the default ruleset.
CORPUS_TABLE: dict[RuleId, tuple[int, int, int]] = {
    RuleId.R01: (24, 5, 4),
    RuleId.R02: (30, 6, 5),
    RuleId.R03: (6, 6, 1),
    RuleId.R05: (7, 3, 1),
    RuleId.R07: (8, 2, 1),
    RuleId.R10: (7, 2, 1),
    RuleId.R13: (7, 2, 1),
    RuleId.R16: (8, 3, 1),
    RuleId.R17: (14, 3, 1),
    RuleId.R18: (1, 1, 0),
    RuleId.R19: (5, 1, 1),
    RuleId.R22: (6, 3, 1),
    RuleId.R23: (7, 3, 1),
    RuleId.R24: (1, 1, 0),
    RuleId.R25: (3, 0, 0),
    RuleId.R26: (4, 0, 0),
}

#: Rules whose injected misuse necessarily trips a second rule: a salt
#: constant across executions is also a reused salt.
_COUPLED_EXPECTED: dict[RuleId, frozenset[RuleId]] = {
    RuleId.R10: frozenset({RuleId.R10, RuleId.R12}),
}


def builtin_corpus() -> Corpus:
    scenarios: list[Scenario] = []
    expected: dict[str, frozenset[RuleId]] = {}
    targets: dict[str, RuleId] = {}
    counter = 0

    def push(name, category, misuses, exp, target):
        nonlocal counter
        scenario = Scenario(
            name=name,
            seed=0xC0FFEE + counter * 1009,
            misuses=misuses,
            benign_events=3 + counter % 5,
            category=category,
        )
        counter += 1
        scenarios.append(scenario)
        expected[name] = frozenset(exp)
        targets[name] = target

    static_idx = 0
    for rule, (tp, tn, fn) in CORPUS_TABLE.items():
        for i in range(tp):
            category = _STATIC_CATEGORIES[static_idx % len(_STATIC_CATEGORIES)]
            static_idx += 1
            push(f"{rule.name.lower()}-misuse-{i:02d}", category,
                 ((rule, True),),
                 _COUPLED_EXPECTED.get(rule, frozenset({rule})), rule)
        for i in range(tn):
            category = _STATIC_CATEGORIES[static_idx % len(_STATIC_CATEGORIES)]
            static_idx += 1
            push(f"{rule.name.lower()}-clean-{i:02d}", category,
                 ((rule, False),), frozenset(), rule)
        for i in range(fn):
            push(f"{rule.name.lower()}-notrigger-{i:02d}",
                 Category.ARGUMENT_SENSITIVE,
                 ((rule, False),), frozenset(), rule)
    return Corpus(scenarios=tuple(scenarios), expected=expected,
                  targets=targets)

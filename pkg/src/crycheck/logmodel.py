"""Crypto-event data model and the line-oriented execution-log format.

An execution log records every interaction of an application with its
crypto library: one event per API call, carrying the class of the crypto
task (digest, symmetric encryption, ...) and the parameters that were
passed (algorithm names, key bytes, iteration counts, ...).

The on-disk format is UTF-8 and line oriented so logs stay greppable and
diffable:

    #crylog v1
    #app <app_id> <execution_id>
    #platform <string>
    <seq>\\t<class>\\t<api>\\t<key>=<value>;<key>=<value>;...

Values are prefixed by type: ``t:`` UTF-8 text, ``b:`` lowercase hex
bytes, ``u:`` decimal unsigned integer, ``o:`` boolean (``0``/``1``).
Inside text, ``;``, tab, newline and backslash are backslash-escaped.
Serialization is canonical (events sorted by seq, params sorted by key),
so ``serialize_log(parse_log(f)) == f`` for any canonical file.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


class CryptoClass(enum.Enum):
    """The seven classes of crypto tasks a log event can belong to."""

    MESSAGE_DIGEST = "MessageDigest"
    SYMM_ENCRYPTION = "SymmEncryption"
    ASYMM_ENCRYPTION = "AsymmEncryption"
    KEY_DERIVATION = "KeyDerivation"
    RANDOM_GENERATOR = "RandomGenerator"
    KEY_STORAGE = "KeyStorage"
    SSL_TLS_CERT = "SslTlsCert"


class ParamKey(enum.Enum):
    ALG = "alg"
    MODE = "mode"
    PAD = "pad"
    KEY = "key"
    IV = "iv"
    NUM_BLOCKS = "numBlocks"
    OUT = "out"
    PASS = "pass"
    SALT = "salt"
    ITER = "iter"
    SEED = "seed"
    URLPROT = "urlprot"
    ALLHOST = "allhost"
    ALLCERT = "allcert"
    SETHOST = "sethost"


#: Which parameter keys are legal on events of each class.
LEGAL_PARAMS: dict[CryptoClass, frozenset[ParamKey]] = {
    CryptoClass.MESSAGE_DIGEST: frozenset({ParamKey.ALG}),
    CryptoClass.SYMM_ENCRYPTION: frozenset(
        {ParamKey.ALG, ParamKey.MODE, ParamKey.PAD, ParamKey.KEY,
         ParamKey.IV, ParamKey.NUM_BLOCKS, ParamKey.OUT}
    ),
    CryptoClass.ASYMM_ENCRYPTION: frozenset(
        {ParamKey.ALG, ParamKey.PAD, ParamKey.KEY}
    ),
    CryptoClass.KEY_DERIVATION: frozenset(
        {ParamKey.ALG, ParamKey.PASS, ParamKey.SALT, ParamKey.ITER}
    ),
    CryptoClass.RANDOM_GENERATOR: frozenset(
        {ParamKey.ALG, ParamKey.OUT, ParamKey.SEED}
    ),
    CryptoClass.KEY_STORAGE: frozenset({ParamKey.PASS}),
    CryptoClass.SSL_TLS_CERT: frozenset(
        {ParamKey.URLPROT, ParamKey.ALLHOST, ParamKey.ALLCERT,
         ParamKey.SETHOST}
    ),
}

SCHEMA_VERSION = "1"


class LogFormatError(Exception):
    """Base class for log parsing failures."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MalformedHeader(LogFormatError):
    pass


class MalformedLine(LogFormatError):
    pass


class NonMonotoneSeq(LogFormatError):
    pass


class UnknownClass(LogFormatError):
    pass


class BadHexEncoding(LogFormatError):
    pass


class IllegalKeyForClass(Exception):
    pass


@dataclass(frozen=True)
class ParamValue:
    """Tagged union of the value types a logged parameter can carry.

    kind is one of "t" (text), "b" (bytes), "u" (unsigned int),
    "o" (bool); value holds the corresponding Python object.
    """

    kind: str
    value: str | bytes | int | bool

    def __post_init__(self):
        expected = {"t": str, "b": bytes, "u": int, "o": bool}
        if self.kind not in expected:
            raise ValueError(f"unknown value kind {self.kind!r}")
        if not isinstance(self.value, expected[self.kind]) or (
            self.kind == "u" and isinstance(self.value, bool)
        ):
            raise ValueError(f"kind {self.kind!r} cannot hold {self.value!r}")
        if self.kind == "u" and self.value < 0:
            raise ValueError("unsigned value cannot be negative")

    @staticmethod
    def text(s: str) -> "ParamValue":
        return ParamValue("t", s)

    @staticmethod
    def data(b: bytes) -> "ParamValue":
        return ParamValue("b", b)

    @staticmethod
    def uint(n: int) -> "ParamValue":
        return ParamValue("u", n)

    @staticmethod
    def flag(b: bool) -> "ParamValue":
        return ParamValue("o", b)


# Escapes used inside serialized text values.
_ESCAPES = {"\\": "\\\\", ";": "\\;", "\t": "\\t", "\n": "\\n"}
_UNESCAPES = {"\\": "\\", ";": ";", "t": "\t", "n": "\n"}


def _escape_text(s: str) -> str:
    return "".join(_ESCAPES.get(c, c) for c in s)


def _unescape_text(s: str, line: int) -> str:
    out = []
    i = 0
    while i < len(s):
        c = s[i]
        if c == "\\":
            if i + 1 >= len(s) or s[i + 1] not in _UNESCAPES:
                raise MalformedLine("bad escape in text value", line)
            out.append(_UNESCAPES[s[i + 1]])
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def _encode_value(v: ParamValue) -> str:
    if v.kind == "t":
        return "t:" + _escape_text(v.value)
    if v.kind == "b":
        return "b:" + v.value.hex()
    if v.kind == "u":
        return "u:" + str(v.value)
    return "o:" + ("1" if v.value else "0")


def _decode_value(s: str, line: int) -> ParamValue:
    if len(s) < 2 or s[1] != ":":
        raise MalformedLine(f"value {s!r} has no type prefix", line)
    kind, body = s[0], s[2:]
    if kind == "t":
        return ParamValue.text(_unescape_text(body, line))
    if kind == "b":
        if len(body) % 2 != 0 or not all(c in "0123456789abcdef" for c in body):
            raise BadHexEncoding(f"bad hex {body!r}", line)
        return ParamValue.data(bytes.fromhex(body))
    if kind == "u":
        if not body.isdigit():
            raise MalformedLine(f"bad unsigned {body!r}", line)
        return ParamValue.uint(int(body))
    if kind == "o":
        if body not in ("0", "1"):
            raise MalformedLine(f"bad bool {body!r}", line)
        return ParamValue.flag(body == "1")
    raise MalformedLine(f"unknown value prefix {kind!r}", line)


@dataclass(frozen=True)
class CryptoEvent:
    """One logged crypto API interaction."""

    seq: int
    cls: CryptoClass
    api: str
    params: dict[ParamKey, ParamValue] = field(default_factory=dict)

    def __post_init__(self):
        if self.seq < 0:
            raise ValueError("seq must be >= 0")
        for key in self.params:
            if key not in LEGAL_PARAMS[self.cls]:
                raise IllegalKeyForClass(
                    f"{key.value} is not legal on {self.cls.value}"
                )

    def get(self, key: ParamKey) -> ParamValue | None:
        return self.params.get(key)


@dataclass(frozen=True)
class ExecutionLog:
    """An ordered series of crypto events from one execution of one app."""

    app_id: str
    execution_id: str
    platform: str
    events: tuple[CryptoEvent, ...]
    schema_version: str = SCHEMA_VERSION
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        prev = -1
        for ev in self.events:
            if ev.seq <= prev:
                raise ValueError("event seq values must be strictly increasing")
            prev = ev.seq


def parse_log(data: bytes, strict: bool = False) -> ExecutionLog:
    """Parse a complete log file.

    In non-strict mode, lines with unknown class or api names are skipped
    and recorded in the returned log's warnings; in strict mode they raise
    UnknownClass.
    """
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedHeader(f"log is not valid UTF-8: {exc}")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if len(lines) < 3:
        raise MalformedHeader("log shorter than the three header lines")
    if lines[0] != f"#crylog v{SCHEMA_VERSION}":
        raise MalformedHeader(f"bad magic line {lines[0]!r}", 1)
    app_parts = lines[1].split(" ")
    if len(app_parts) != 3 or app_parts[0] != "#app":
        raise MalformedHeader(f"bad app line {lines[1]!r}", 2)
    if not lines[2].startswith("#platform "):
        raise MalformedHeader(f"bad platform line {lines[2]!r}", 3)
    app_id, execution_id = app_parts[1], app_parts[2]
    platform = lines[2][len("#platform "):]

    events: list[CryptoEvent] = []
    warnings: list[str] = []
    prev_seq = -1
    classes = {c.value: c for c in CryptoClass}
    for idx, raw in enumerate(lines[3:], start=4):
        fields = raw.split("\t")
        if len(fields) != 4:
            raise MalformedLine(f"expected 4 tab-separated fields, got {len(fields)}", idx)
        seq_s, cls_s, api, params_s = fields
        if not seq_s.isdigit():
            raise MalformedLine(f"bad seq {seq_s!r}", idx)
        seq = int(seq_s)
        if seq <= prev_seq:
            raise NonMonotoneSeq(f"seq {seq} after {prev_seq}", idx)
        prev_seq = seq
        if cls_s not in classes:
            if strict:
                raise UnknownClass(f"unknown class {cls_s!r}", idx)
            warnings.append(f"line {idx}: skipped unknown class {cls_s!r}")
            continue
        cls = classes[cls_s]
        params: dict[ParamKey, ParamValue] = {}
        if params_s:
            for item in _split_params(params_s, idx):
                if "=" not in item:
                    raise MalformedLine(f"param {item!r} has no '='", idx)
                k_s, v_s = item.split("=", 1)
                try:
                    key = ParamKey(k_s)
                except ValueError:
                    if strict:
                        raise MalformedLine(f"unknown param key {k_s!r}", idx)
                    warnings.append(f"line {idx}: dropped unknown param {k_s!r}")
                    continue
                if key not in LEGAL_PARAMS[cls]:
                    if strict:
                        raise MalformedLine(
                            f"param {k_s!r} illegal for class {cls_s}", idx
                        )
                    warnings.append(
                        f"line {idx}: dropped param {k_s!r} illegal for {cls_s}"
                    )
                    continue
                params[key] = _decode_value(v_s, idx)
        events.append(CryptoEvent(seq=seq, cls=cls, api=api, params=params))
    return ExecutionLog(
        app_id=app_id,
        execution_id=execution_id,
        platform=platform,
        events=tuple(events),
        warnings=tuple(warnings),
    )


def _split_params(s: str, line: int) -> list[str]:
    """Split the params field on unescaped ';'."""
    parts = []
    buf = []
    i = 0
    while i < len(s):
        c = s[i]
        if c == "\\" and i + 1 < len(s):
            buf.append(c)
            buf.append(s[i + 1])
            i += 2
            continue
        if c == ";":
            parts.append("".join(buf))
            buf = []
        else:
            buf.append(c)
        i += 1
    parts.append("".join(buf))
    return [p for p in parts if p]


def serialize_log(log: ExecutionLog) -> bytes:
    """Serialize to the canonical byte form (sorted events, sorted params)."""
    lines = [
        f"#crylog v{log.schema_version}",
        f"#app {log.app_id} {log.execution_id}",
        f"#platform {log.platform}",
    ]
    for ev in sorted(log.events, key=lambda e: e.seq):
        params = ";".join(
            f"{k.value}={_encode_value(v)}"
            for k, v in sorted(ev.params.items(), key=lambda kv: kv[0].value)
        )
        lines.append(f"{ev.seq}\t{ev.cls.value}\t{ev.api}\t{params}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def values_of(
    log: ExecutionLog, cls: CryptoClass, key: ParamKey
) -> list[tuple[int, ParamValue]]:
    """All (seq, value) pairs of a parameter on events of a class.

    Values come back in ascending seq order with duplicates preserved;
    the seq lets callers build event-level evidence.
    """
    if key not in LEGAL_PARAMS[cls]:
        raise IllegalKeyForClass(f"{key.value} is not legal on {cls.value}")
    out = []
    for ev in log.events:
        if ev.cls is cls and key in ev.params:
            out.append((ev.seq, ev.params[key]))
    return out

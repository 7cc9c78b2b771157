import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crycheck.logmodel import (
    LEGAL_PARAMS,
    BadHexEncoding,
    CryptoClass,
    CryptoEvent,
    ExecutionLog,
    IllegalKeyForClass,
    MalformedHeader,
    MalformedLine,
    NonMonotoneSeq,
    ParamKey,
    ParamValue,
    UnknownClass,
    parse_log,
    serialize_log,
    values_of,
)

HEADER = b"#crylog v1\n#app demo.app run1\n#platform java\n"


def make_log(events=(), execution_id="run1"):
    return ExecutionLog(
        app_id="demo.app",
        execution_id=execution_id,
        platform="java",
        events=tuple(events),
    )


class TestParse:
    def test_single_digest_event(self):
        data = HEADER + b"0\tMessageDigest\tMessageDigest.digest\talg=t:SHA1\n"
        log = parse_log(data, strict=True)
        assert log.app_id == "demo.app"
        assert log.execution_id == "run1"
        assert len(log.events) == 1
        ev = log.events[0]
        assert ev.cls is CryptoClass.MESSAGE_DIGEST
        assert ev.api == "MessageDigest.digest"
        assert ev.params[ParamKey.ALG] == ParamValue.text("SHA1")

    def test_bad_hex_value(self):
        data = HEADER + b"0\tSymmEncryption\tCipher.init\tkey=b:ZZ\n"
        with pytest.raises(BadHexEncoding):
            parse_log(data)

    def test_missing_header(self):
        with pytest.raises(MalformedHeader):
            parse_log(b"0\tMessageDigest\tx\talg=t:SHA1\n")

    def test_bad_magic(self):
        with pytest.raises(MalformedHeader):
            parse_log(b"#other v1\n#app a b\n#platform j\n")

    def test_non_monotone_seq(self):
        data = (
            HEADER
            + b"1\tMessageDigest\tm\talg=t:SHA256\n"
            + b"1\tMessageDigest\tm\talg=t:SHA256\n"
        )
        with pytest.raises(NonMonotoneSeq):
            parse_log(data)

    def test_unknown_class_strict_vs_lenient(self):
        data = HEADER + b"0\tNotAClass\tx\talg=t:SHA1\n"
        with pytest.raises(UnknownClass):
            parse_log(data, strict=True)
        log = parse_log(data, strict=False)
        assert log.events == ()
        assert any("NotAClass" in w for w in log.warnings)

    def test_unknown_param_dropped_in_lenient_mode(self):
        data = HEADER + b"0\tMessageDigest\tm\talg=t:SHA1;wat=t:x\n"
        log = parse_log(data)
        assert ParamKey.ALG in log.events[0].params
        assert any("wat" in w for w in log.warnings)
        with pytest.raises(MalformedLine):
            parse_log(data, strict=True)

    def test_illegal_key_for_class_dropped_in_lenient_mode(self):
        data = HEADER + b"0\tMessageDigest\tm\tiv=b:00\n"
        log = parse_log(data)
        assert log.events[0].params == {}
        with pytest.raises(MalformedLine):
            parse_log(data, strict=True)

    def test_escaped_text_round_trips(self):
        ev = CryptoEvent(
            0, CryptoClass.KEY_STORAGE, "KeyStore.load",
            {ParamKey.PASS: ParamValue.text("a;b\tc\nd\\e")},
        )
        log = make_log([ev])
        assert parse_log(serialize_log(log), strict=True).events[0] == ev


class TestSerialize:
    def test_empty_log_is_header_only(self):
        assert serialize_log(make_log()) == HEADER

    def test_params_emitted_alphabetically(self):
        ev = CryptoEvent(
            0, CryptoClass.SYMM_ENCRYPTION, "Cipher.init",
            {
                ParamKey.MODE: ParamValue.text("GCM"),
                ParamKey.ALG: ParamValue.text("AES"),
                ParamKey.KEY: ParamValue.data(b"\x01\x02"),
            },
        )
        line = serialize_log(make_log([ev])).decode().splitlines()[3]
        assert line == "0\tSymmEncryption\tCipher.init\talg=t:AES;iv=b:0102"[:0] + \
            "0\tSymmEncryption\tCipher.init\talg=t:AES;key=b:0102;mode=t:GCM"

    def test_round_trip_identity_from_bytes(self):
        data = (
            HEADER
            + b"0\tSymmEncryption\tCipher.init\talg=t:AES;iv=b:000102;key=b:deadbeef;mode=t:CBC\n"
            + b"3\tKeyDerivation\tPBEKeySpec\titer=u:1000;pass=t:hunter2;salt=b:0011223344556677\n"
            + b"9\tSslTlsCert\tHttpsURLConnection.setHostnameVerifier\tallhost=o:1\n"
        )
        assert serialize_log(parse_log(data, strict=True)) == data


_param_values = st.one_of(
    st.text(max_size=12).map(ParamValue.text),
    st.binary(max_size=16).map(ParamValue.data),
    st.integers(min_value=0, max_value=2**32).map(ParamValue.uint),
    st.booleans().map(ParamValue.flag),
)


@st.composite
def _events(draw):
    cls = draw(st.sampled_from(list(CryptoClass)))
    keys = draw(st.lists(st.sampled_from(sorted(LEGAL_PARAMS[cls], key=lambda k: k.value)),
                         unique=True, max_size=4))
    params = {k: draw(_param_values) for k in keys}
    api = draw(st.text(alphabet=st.characters(min_codepoint=33, max_codepoint=126,
                                              exclude_characters=["\t"]),
                       min_size=1, max_size=16))
    return cls, api, params


@st.composite
def _logs(draw):
    raw = draw(st.lists(_events(), max_size=8))
    seqs = sorted(draw(st.sets(st.integers(min_value=0, max_value=10_000),
                               min_size=len(raw), max_size=len(raw))))
    events = [CryptoEvent(seq, cls, api, params)
              for seq, (cls, api, params) in zip(seqs, raw)]
    return make_log(events)


class TestProperties:
    @given(_logs())
    @settings(max_examples=200, deadline=None)
    def test_parse_serialize_round_trip(self, log):
        parsed = parse_log(serialize_log(log), strict=True)
        assert parsed.app_id == log.app_id
        assert parsed.events == log.events

    @given(_logs())
    @settings(max_examples=50, deadline=None)
    def test_serialize_deterministic(self, log):
        assert serialize_log(log) == serialize_log(log)

    @given(_logs())
    @settings(max_examples=100, deadline=None)
    def test_values_of_order_and_duplicates(self, log):
        for cls in CryptoClass:
            for key in LEGAL_PARAMS[cls]:
                pairs = values_of(log, cls, key)
                assert [s for s, _ in pairs] == sorted(s for s, _ in pairs)
                expected = [
                    ev.params[key] for ev in log.events
                    if ev.cls is cls and key in ev.params
                ]
                assert [v for _, v in pairs] == expected


class TestValuesOf:
    def test_multiset_preserves_duplicates(self):
        key = ParamValue.data(b"\x01" * 16)
        events = [
            CryptoEvent(i, CryptoClass.SYMM_ENCRYPTION, "Cipher.init",
                        {ParamKey.KEY: key})
            for i in range(2)
        ]
        pairs = values_of(make_log(events), CryptoClass.SYMM_ENCRYPTION, ParamKey.KEY)
        assert len(pairs) == 2

    def test_empty_when_no_matching_events(self):
        assert values_of(make_log(), CryptoClass.SYMM_ENCRYPTION, ParamKey.KEY) == []

    def test_illegal_key(self):
        with pytest.raises(IllegalKeyForClass):
            values_of(make_log(), CryptoClass.MESSAGE_DIGEST, ParamKey.IV)


class TestInvariants:
    def test_event_rejects_illegal_param(self):
        with pytest.raises(IllegalKeyForClass):
            CryptoEvent(0, CryptoClass.MESSAGE_DIGEST, "m",
                        {ParamKey.IV: ParamValue.data(b"\x00")})

    def test_log_rejects_non_increasing_seq(self):
        ev = CryptoEvent(1, CryptoClass.MESSAGE_DIGEST, "m", {})
        with pytest.raises(ValueError):
            make_log([ev, ev])

    def test_negative_seq_rejected(self):
        with pytest.raises(ValueError):
            CryptoEvent(-1, CryptoClass.MESSAGE_DIGEST, "m", {})

    def test_param_value_kind_checked(self):
        with pytest.raises(ValueError):
            ParamValue("u", -3)
        with pytest.raises(ValueError):
            ParamValue("t", b"bytes")
        with pytest.raises(ValueError):
            ParamValue("x", "?")

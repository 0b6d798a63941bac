"""Codec checks against published test vectors plus an independent encoder.

The reference encoder below is written from the wire format definition,
separately from the package's implementation, so agreement between the two
is meaningful.
"""

import struct

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pam_passkey import cbor
from pam_passkey.errors import EncodingError


def reference_encode(value) -> bytes:
    """Independent minimal encoder (shortest-form heads, definite lengths)."""

    def head(major, n):
        if n < 24:
            return struct.pack("B", (major << 5) | n)
        if n < 0x100:
            return struct.pack("BB", (major << 5) | 24, n)
        if n < 0x10000:
            return struct.pack(">BH", (major << 5) | 25, n)
        if n < 0x100000000:
            return struct.pack(">BI", (major << 5) | 26, n)
        return struct.pack(">BQ", (major << 5) | 27, n)

    if value is False:
        return struct.pack("B", 0xF4)
    if value is True:
        return struct.pack("B", 0xF5)
    if value is None:
        return struct.pack("B", 0xF6)
    if isinstance(value, int):
        return head(0, value) if value >= 0 else head(1, -value - 1)
    if isinstance(value, bytes):
        return head(2, len(value)) + value
    if isinstance(value, str):
        raw = value.encode("utf-8")
        return head(3, len(raw)) + raw
    if isinstance(value, list):
        return head(4, len(value)) + b"".join(reference_encode(v) for v in value)
    if isinstance(value, dict):
        body = b"".join(reference_encode(k) + reference_encode(v) for k, v in value.items())
        return head(5, len(value)) + body
    raise TypeError(type(value))


# value <-> hex pairs from the format's published example table
GOLDEN = [
    (0, "00"),
    (1, "01"),
    (10, "0a"),
    (23, "17"),
    (24, "1818"),
    (25, "1819"),
    (100, "1864"),
    (1000, "1903e8"),
    (1000000, "1a000f4240"),
    (1000000000000, "1b000000e8d4a51000"),
    (-1, "20"),
    (-10, "29"),
    (-100, "3863"),
    (-1000, "3903e7"),
    (b"", "40"),
    (b"\x01\x02\x03\x04", "4401020304"),
    ("", "60"),
    ("a", "6161"),
    ("IETF", "6449455446"),
    ("ü", "62c3bc"),
    ([], "80"),
    ([1, 2, 3], "83010203"),
    ([1, [2, 3], [4, 5]], "8301820203820405"),
    ({}, "a0"),
    ({1: 2, 3: 4}, "a201020304"),
    ({"a": 1, "b": [2, 3]}, "a26161016162820203"),
    (["a", {"b": "c"}], "826161a161626163"),
    (False, "f4"),
    (True, "f5"),
    (None, "f6"),
    (list(range(1, 26)),
     "98190102030405060708090a0b0c0d0e0f101112131415161718181819"),
]


@pytest.mark.parametrize("value,hexform", GOLDEN)
def test_golden_decode(value, hexform):
    assert cbor.loads(bytes.fromhex(hexform)) == value


@pytest.mark.parametrize("value,hexform", GOLDEN)
def test_golden_encode(value, hexform):
    assert cbor.dumps(value).hex() == hexform


def _values(depth=3):
    scalars = st.one_of(
        st.integers(min_value=-(2**63), max_value=2**64 - 1),
        st.binary(max_size=48),
        st.text(max_size=24),
        st.booleans(),
        st.none(),
    )
    return st.recursive(
        scalars,
        lambda children: st.one_of(
            st.lists(children, max_size=6),
            st.dictionaries(
                st.one_of(st.integers(min_value=-100, max_value=100), st.text(max_size=8)),
                children,
                max_size=6,
            ),
        ),
        max_leaves=20,
    )


@given(_values())
def test_agrees_with_reference_encoder(value):
    assert cbor.dumps(value) == reference_encode(value)


@given(_values())
def test_round_trip(value):
    assert cbor.loads(cbor.dumps(value)) == value


def kind_of(callable_, *args):
    with pytest.raises(EncodingError) as info:
        callable_(*args)
    return info.value.kind


def test_duplicate_map_keys_rejected():
    # {1: 2, 1: 3}
    assert kind_of(cbor.loads, bytes.fromhex("a201020103")) == "duplicate-map-key"
    # {"a": 1, "a": 2}
    assert kind_of(cbor.loads, bytes.fromhex("a2616101616102")) == "duplicate-map-key"


def test_indefinite_length_rejected():
    # streaming byte string (_ h'0102', h'030405')
    assert kind_of(cbor.loads, bytes.fromhex("5f42010243030405ff")) == "indefinite-length"
    # streaming array
    assert kind_of(cbor.loads, bytes.fromhex("9f018202039f0405ffff")) == "indefinite-length"


def test_tags_and_floats_rejected():
    assert kind_of(cbor.loads, bytes.fromhex("c074323031332d30332d32315432303a30343a30305a")) \
        == "unsupported-cbor-type"
    assert kind_of(cbor.loads, bytes.fromhex("f90000")) == "unsupported-cbor-type"
    assert kind_of(cbor.loads, bytes.fromhex("fb3ff199999999999a")) == "unsupported-cbor-type"


def test_truncation_detected():
    assert kind_of(cbor.loads, bytes.fromhex("18")) == "truncated-input"
    assert kind_of(cbor.loads, bytes.fromhex("44010203")) == "truncated-input"
    assert kind_of(cbor.loads, b"") == "truncated-input"
    assert kind_of(cbor.loads, bytes.fromhex("a201")) == "truncated-input"


def test_trailing_bytes_detected():
    assert kind_of(cbor.loads, bytes.fromhex("0000")) == "trailing-garbage"


def test_non_minimal_heads_still_decode():
    # 24 encoded with a two-byte argument; tolerated on input
    assert cbor.loads(bytes.fromhex("190018")) == 24


def test_decode_prefix_reports_consumed_offset():
    data = cbor.dumps({1: 2}) + b"tail"
    value, end = cbor.decode_prefix(data, 0)
    assert value == {1: 2}
    assert data[end:] == b"tail"

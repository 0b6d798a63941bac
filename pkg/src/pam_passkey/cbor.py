"""Strict CBOR subset codec for attestation objects and COSE keys.

Covers exactly what WebAuthn payloads need: unsigned/negative integers, byte
strings, text strings, arrays, maps, and the simple values false/true/null.
Decoding accepts definite lengths only and rejects duplicate map keys;
indefinite-length items, tags, and floats are refused. Encoding always emits
shortest-form arguments with definite lengths, so a value encoded here decodes
to itself byte-exactly.
"""

from __future__ import annotations

from typing import Any

from .errors import EncodingError

_MAX_ITEM = 1 << 30  # sanity bound on declared lengths


def _fail(kind: str, detail: str) -> None:
    raise EncodingError(kind, detail)


def _read_argument(data: bytes, offset: int, info: int) -> tuple[int, int]:
    """Return (argument value, new offset) for an initial-byte additional info."""
    if info < 24:
        return info, offset
    if info == 24:
        width = 1
    elif info == 25:
        width = 2
    elif info == 26:
        width = 4
    elif info == 27:
        width = 8
    elif info == 31:
        _fail("indefinite-length", "indefinite-length items are not accepted")
    else:
        _fail("malformed-cbor", f"reserved additional info {info}")
    if offset + width > len(data):
        _fail("truncated-input", "argument runs past end of input")
    return int.from_bytes(data[offset : offset + width], "big"), offset + width


def decode_prefix(data: bytes, offset: int = 0) -> tuple[Any, int]:
    """Decode one data item starting at offset; return (value, next offset)."""
    if offset >= len(data):
        _fail("truncated-input", "no bytes to decode")
    initial = data[offset]
    major, info = initial >> 5, initial & 0x1F
    offset += 1

    if major == 0:
        return _read_argument(data, offset, info)
    if major == 1:
        value, offset = _read_argument(data, offset, info)
        return -1 - value, offset
    if major in (2, 3):
        length, offset = _read_argument(data, offset, info)
        if length > _MAX_ITEM:
            _fail("malformed-cbor", f"declared length {length} is unreasonable")
        if offset + length > len(data):
            _fail("truncated-input", "string body runs past end of input")
        chunk = data[offset : offset + length]
        offset += length
        if major == 2:
            return bytes(chunk), offset
        try:
            return chunk.decode("utf-8"), offset
        except UnicodeDecodeError:
            _fail("malformed-cbor", "text string is not valid UTF-8")
    if major == 4:
        count, offset = _read_argument(data, offset, info)
        if count > _MAX_ITEM:
            _fail("malformed-cbor", f"declared count {count} is unreasonable")
        items = []
        for _ in range(count):
            item, offset = decode_prefix(data, offset)
            items.append(item)
        return items, offset
    if major == 5:
        count, offset = _read_argument(data, offset, info)
        if count > _MAX_ITEM:
            _fail("malformed-cbor", f"declared count {count} is unreasonable")
        result: dict[Any, Any] = {}
        for _ in range(count):
            key, offset = decode_prefix(data, offset)
            if not isinstance(key, (int, str, bytes)):
                _fail("malformed-cbor", f"unsupported map key type {type(key).__name__}")
            if key in result:
                _fail("duplicate-map-key", f"map key {key!r} appears twice")
            value, offset = decode_prefix(data, offset)
            result[key] = value
        return result, offset
    if major == 7:
        if info == 20:
            return False, offset
        if info == 21:
            return True, offset
        if info == 22:
            return None, offset
        _fail("unsupported-cbor-type", f"simple/float value {info} is not accepted")
    _fail("unsupported-cbor-type", f"major type {major} is not accepted")
    raise AssertionError("unreachable")


def loads(data: bytes) -> Any:
    """Decode exactly one data item; leftover bytes are an error."""
    value, end = decode_prefix(data, 0)
    if end != len(data):
        _fail("trailing-garbage", f"{len(data) - end} bytes remain after data item")
    return value


def _encode_head(major: int, argument: int) -> bytes:
    if argument < 24:
        return bytes([(major << 5) | argument])
    for info, width in ((24, 1), (25, 2), (26, 4), (27, 8)):
        if argument < 1 << (8 * width):
            return bytes([(major << 5) | info]) + argument.to_bytes(width, "big")
    raise EncodingError("malformed-cbor", "argument exceeds 64 bits")


def dumps(value: Any) -> bytes:
    """Encode a value; map keys keep insertion order."""
    if value is False:
        return b"\xf4"
    if value is True:
        return b"\xf5"
    if value is None:
        return b"\xf6"
    if isinstance(value, int):
        if value >= 0:
            return _encode_head(0, value)
        return _encode_head(1, -1 - value)
    if isinstance(value, (bytes, bytearray)):
        return _encode_head(2, len(value)) + bytes(value)
    if isinstance(value, str):
        encoded = value.encode("utf-8")
        return _encode_head(3, len(encoded)) + encoded
    if isinstance(value, (list, tuple)):
        return _encode_head(4, len(value)) + b"".join(dumps(item) for item in value)
    if isinstance(value, dict):
        out = [_encode_head(5, len(value))]
        for key, item in value.items():
            out.append(dumps(key))
            out.append(dumps(item))
        return b"".join(out)
    raise EncodingError("unsupported-cbor-type", f"cannot encode {type(value).__name__}")

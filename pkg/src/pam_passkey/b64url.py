"""base64url without padding: the wire encoding for every opaque byte field.

Decoding is strict: only the URL-safe alphabet is accepted, padding characters
are rejected outright, and a length of 1 mod 4 can never be produced by a
valid encoder so it is rejected too.
"""

from __future__ import annotations

import base64
import string

from .errors import EncodingError

_ALPHABET = frozenset(string.ascii_letters + string.digits + "-_")


def encode(data: bytes) -> str:
    """Encode bytes as base64url, never emitting padding."""
    return base64.urlsafe_b64encode(data).rstrip(b"=").decode("ascii")


def decode(text: str) -> bytes:
    """Decode unpadded base64url text.

    Raises EncodingError(invalid-character) for anything outside the URL-safe
    alphabet (including '='), and EncodingError(invalid-length) when
    len(text) % 4 == 1.
    """
    if not all(c in _ALPHABET for c in text):
        bad = next(c for c in text if c not in _ALPHABET)
        raise EncodingError("invalid-character", f"unexpected {bad!r} in base64url input")
    if len(text) % 4 == 1:
        raise EncodingError("invalid-length", "length mod 4 == 1 is not a valid encoding")
    padded = text + "=" * (-len(text) % 4)
    return base64.urlsafe_b64decode(padded.encode("ascii"))

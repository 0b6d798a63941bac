"""Authenticator-data binary structure: the byte string an authenticator
signs. Fixed layout: 32-byte relying-party ID hash, 1 flags byte, 4-byte
big-endian sign count, then optional attested-credential data (AT flag) and
optional extensions (ED flag)."""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Optional

from . import cbor
from .cose import CoseKey, parse_cose_key
from .errors import EncodingError

FLAG_UP = 0x01
FLAG_UV = 0x04
FLAG_AT = 0x40
FLAG_ED = 0x80

MIN_LENGTH = 37
AAGUID_LENGTH = 16
CREDENTIAL_ID_MAX = 1023
CREDENTIAL_ID_MIN = 16


@dataclass(frozen=True)
class AttestedCredential:
    aaguid: bytes
    credential_id: bytes
    public_key: CoseKey


@dataclass(frozen=True)
class AuthenticatorData:
    rp_id_hash: bytes
    flags: int  # raw byte; reserved bits preserved for exact re-encoding
    sign_count: int
    attested_credential: Optional[AttestedCredential] = None
    extensions: bytes = field(default=b"")  # raw CBOR when the ED flag is set

    @property
    def user_present(self) -> bool:
        return bool(self.flags & FLAG_UP)

    @property
    def user_verified(self) -> bool:
        return bool(self.flags & FLAG_UV)

    @property
    def attested_credential_included(self) -> bool:
        return bool(self.flags & FLAG_AT)

    @property
    def extensions_included(self) -> bool:
        return bool(self.flags & FLAG_ED)

    def encode(self) -> bytes:
        """Serialize back to the wire layout; inverse of parse_authenticator_data."""
        out = [self.rp_id_hash, struct.pack(">BI", self.flags, self.sign_count)]
        if self.attested_credential_included:
            cred = self.attested_credential
            out.append(cred.aaguid)
            out.append(struct.pack(">H", len(cred.credential_id)))
            out.append(cred.credential_id)
            out.append(cred.public_key.encode())
        if self.extensions_included:
            out.append(self.extensions)
        return b"".join(out)


def build_flags(*, user_present: bool = False, user_verified: bool = False,
                attested: bool = False, extensions: bool = False) -> int:
    return ((FLAG_UP if user_present else 0)
            | (FLAG_UV if user_verified else 0)
            | (FLAG_AT if attested else 0)
            | (FLAG_ED if extensions else 0))


def parse_authenticator_data(raw: bytes) -> AuthenticatorData:
    """Parse the fixed layout; strict about length accounting.

    Raises truncated-input when the declared structure runs past the end,
    at-flag-set-but-no-credential when AT is set with no body, and
    trailing-garbage when bytes remain that no flag accounts for.
    """
    if len(raw) < MIN_LENGTH:
        raise EncodingError("truncated-input", f"{len(raw)} bytes; layout needs at least {MIN_LENGTH}")
    rp_id_hash = raw[:32]
    flags = raw[32]
    sign_count = struct.unpack(">I", raw[33:37])[0]
    offset = MIN_LENGTH

    attested: Optional[AttestedCredential] = None
    if flags & FLAG_AT:
        if offset == len(raw):
            raise EncodingError("at-flag-set-but-no-credential", "AT flag set on a 37-byte structure")
        if offset + AAGUID_LENGTH + 2 > len(raw):
            raise EncodingError("truncated-input", "attested credential header cut short")
        aaguid = raw[offset : offset + AAGUID_LENGTH]
        offset += AAGUID_LENGTH
        cred_len = struct.unpack(">H", raw[offset : offset + 2])[0]
        offset += 2
        if not CREDENTIAL_ID_MIN <= cred_len <= CREDENTIAL_ID_MAX:
            raise EncodingError(
                "malformed-credential-id", f"credential id of {cred_len} bytes is out of range"
            )
        if offset + cred_len > len(raw):
            raise EncodingError("truncated-input", "credential id cut short")
        credential_id = raw[offset : offset + cred_len]
        offset += cred_len
        key_map, offset = cbor.decode_prefix(raw, offset)
        attested = AttestedCredential(aaguid, credential_id, parse_cose_key(key_map))

    extensions = b""
    if flags & FLAG_ED:
        start = offset
        _, offset = cbor.decode_prefix(raw, offset)
        extensions = raw[start:offset]

    if offset != len(raw):
        raise EncodingError("trailing-garbage", f"{len(raw) - offset} unaccounted bytes at end")

    return AuthenticatorData(rp_id_hash, flags, sign_count, attested, extensions)

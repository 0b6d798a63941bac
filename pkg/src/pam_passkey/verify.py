"""Registration and assertion verification.

Both ceremonies follow the same skeleton: check the client data document
(type marker, challenge echo, origin), check the authenticator data binding
(relying-party hash, presence/verification flags), check the cryptography,
and only then consume the challenge. Failures never consume, so a client may
retry within the server's budget; success consumes atomically, so replaying
a captured response is always challenge-reused.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Any

from . import b64url
from . import cbor
from .authdata import AuthenticatorData, parse_authenticator_data
from .cose import parse_cose_key
from .errors import EncodingError, VerificationError
from .rp import Ceremony, Challenge, RelyingPartyConfig
from .store import CredentialRecord, now_utc_seconds

TYPE_MARKERS = {Ceremony.REGISTRATION: "webauthn.create",
                Ceremony.AUTHENTICATION: "webauthn.get"}


@dataclass(frozen=True)
class RegistrationResponse:
    credential_id: bytes
    client_data: bytes
    attestation_object: bytes

    @classmethod
    def from_document(cls, doc: dict[str, Any]) -> "RegistrationResponse":
        try:
            return cls(
                credential_id=b64url.decode(doc["rawId"]),
                client_data=b64url.decode(doc["response"]["clientDataJSON"]),
                attestation_object=b64url.decode(doc["response"]["attestationObject"]),
            )
        except (KeyError, TypeError) as exc:
            raise EncodingError("malformed-document", f"registration document: {exc}")

    def __post_init__(self):
        if not self.credential_id:
            raise EncodingError("malformed-document", "empty credential id")
        if not self.attestation_object:
            raise EncodingError("malformed-document", "empty attestation object")


@dataclass(frozen=True)
class AssertionResponse:
    credential_id: bytes
    client_data: bytes
    authenticator_data: bytes
    signature: bytes

    @classmethod
    def from_document(cls, doc: dict[str, Any]) -> "AssertionResponse":
        try:
            return cls(
                credential_id=b64url.decode(doc["rawId"]),
                client_data=b64url.decode(doc["response"]["clientDataJSON"]),
                authenticator_data=b64url.decode(doc["response"]["authenticatorData"]),
                signature=b64url.decode(doc["response"]["signature"]),
            )
        except (KeyError, TypeError) as exc:
            raise EncodingError("malformed-document", f"assertion document: {exc}")

    def __post_init__(self):
        for name in ("credential_id", "client_data", "authenticator_data", "signature"):
            if not getattr(self, name):
                raise EncodingError("malformed-document", f"empty {name}")


def _check_client_data(client_data: bytes, ceremony: Ceremony, pending: Challenge,
                       config: RelyingPartyConfig) -> None:
    try:
        doc = json.loads(client_data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise VerificationError("malformed-client-data", f"client data is not JSON: {exc}")
    if not isinstance(doc, dict):
        raise VerificationError("malformed-client-data", "client data must be an object")
    if doc.get("type") != TYPE_MARKERS[ceremony]:
        raise VerificationError("type-mismatch",
                                f"client data type {doc.get('type')!r}")
    if doc.get("challenge") != b64url.encode(pending.value):
        raise VerificationError("challenge-mismatch",
                                "client data echoes a different challenge")
    if doc.get("origin") not in config.expected_origins:
        raise VerificationError("origin-mismatch",
                                f"origin {doc.get('origin')!r} is not expected")
    if doc.get("crossOrigin"):
        raise VerificationError("origin-mismatch", "cross-origin responses are rejected")


def _check_binding(auth: AuthenticatorData, config: RelyingPartyConfig) -> None:
    if auth.rp_id_hash != hashlib.sha256(config.rp_id.encode("ascii")).digest():
        raise VerificationError("rp-id-hash-mismatch",
                                "response is bound to a different relying party")
    if not auth.user_present:
        raise VerificationError("user-not-present", "UP flag is clear")
    if config.require_user_verification and not auth.user_verified:
        raise VerificationError("user-not-verified", "UV flag is clear but required")


def _check_ceremony(pending: Challenge, ceremony: Ceremony) -> None:
    if pending.ceremony is not ceremony:
        raise VerificationError("type-mismatch",
                                f"challenge was issued for {pending.ceremony.value}")


def verify_registration(response: RegistrationResponse, pending: Challenge,
                        config: RelyingPartyConfig, *, user: str) -> CredentialRecord:
    """Full registration-ceremony verification; returns the record to store.

    Attestation policy: format "none" is accepted as-is, "packed"
    self-attestation is checked against the attested key, anything else is
    refused.
    """
    pending.check_usable()
    _check_ceremony(pending, Ceremony.REGISTRATION)
    _check_client_data(response.client_data, Ceremony.REGISTRATION, pending, config)

    attestation = cbor.loads(response.attestation_object)
    if (not isinstance(attestation, dict)
            or not {"fmt", "attStmt", "authData"} <= set(attestation)):
        raise VerificationError("malformed-attestation-object",
                                "attestation object must carry fmt, attStmt, authData")
    auth_raw = attestation["authData"]
    if not isinstance(auth_raw, bytes):
        raise VerificationError("malformed-attestation-object", "authData must be bytes")
    auth = parse_authenticator_data(auth_raw)

    _check_binding(auth, config)
    if auth.attested_credential is None:
        raise VerificationError("attested-credential-missing",
                                "registration requires attested credential data")
    if auth.attested_credential.credential_id != response.credential_id:
        raise VerificationError("credential-id-mismatch",
                                "attested id differs from the response id")
    public_key = auth.attested_credential.public_key
    if public_key.algorithm not in config.allowed_algorithms:
        raise VerificationError("algorithm-rejected",
                                f"{public_key.algorithm.label} is not allowed here")

    fmt, statement = attestation["fmt"], attestation["attStmt"]
    if not isinstance(statement, dict):
        raise VerificationError("malformed-attestation-object", "attStmt must be a map")
    if fmt == "none":
        if statement:
            raise VerificationError("attestation-format-unsupported",
                                    'format "none" must carry an empty statement')
    elif fmt == "packed":
        if "x5c" in statement:
            raise VerificationError("attestation-format-unsupported",
                                    "certificate-chain attestation is not supported")
        if statement.get("alg") != int(public_key.algorithm):
            raise VerificationError("attestation-signature-invalid",
                                    "statement algorithm differs from the credential key")
        signature = statement.get("sig")
        if not isinstance(signature, bytes):
            raise VerificationError("attestation-signature-invalid", "missing sig")
        signed = auth_raw + hashlib.sha256(response.client_data).digest()
        try:
            public_key.verify(signed, signature)
        except VerificationError:
            raise VerificationError("attestation-signature-invalid",
                                    "self-attestation signature rejected")
    else:
        raise VerificationError("attestation-format-unsupported", f"format {fmt!r}")

    pending.consume()
    return CredentialRecord(
        credential_id=response.credential_id,
        user=user,
        public_key=public_key,
        sign_count=auth.sign_count,
        rp_id=config.rp_id,
        created_at=now_utc_seconds(),
    )


def verify_assertion(response: AssertionResponse, pending: Challenge,
                     stored: CredentialRecord, config: RelyingPartyConfig) -> int:
    """Full authentication-ceremony verification; returns the asserted count.

    Sign-count policy: when both the stored and asserted counts are nonzero
    the asserted one must be strictly greater (clone detection); a counter
    that reports zero is treated as counter-less.
    """
    pending.check_usable()
    _check_ceremony(pending, Ceremony.AUTHENTICATION)
    if stored.credential_id != response.credential_id:
        raise VerificationError("credential-id-mismatch",
                                "assertion names a different credential")
    _check_client_data(response.client_data, Ceremony.AUTHENTICATION, pending, config)

    auth = parse_authenticator_data(response.authenticator_data)
    _check_binding(auth, config)

    signed = response.authenticator_data + hashlib.sha256(response.client_data).digest()
    stored.public_key.verify(signed, response.signature)

    if stored.sign_count and auth.sign_count and auth.sign_count <= stored.sign_count:
        raise VerificationError("sign-count-regression",
                                f"asserted {auth.sign_count} <= stored {stored.sign_count}")

    pending.consume()
    return auth.sign_count


__all__ = [
    "RegistrationResponse",
    "AssertionResponse",
    "verify_registration",
    "verify_assertion",
    "parse_cose_key",
]

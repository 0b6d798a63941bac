"""Software authenticator: creates credentials and signs assertions so the
whole login loop runs headlessly, with no hardware and no browser.

Speaks the same JSON ceremony documents as the challenge server's endpoints,
so it can drive the HTTP surface directly. Signs ES256 only. Private keys
live and die inside an instance; there is deliberately no export operation.

A seeded instance derives keys and credential ids from the seed and signs
deterministically (RFC 6979), so full response byte streams are reproducible
for golden-file tests. Unseeded instances use the OS entropy pool.
"""

from __future__ import annotations

import copy
import enum
import hashlib
import json
import random
import secrets
from dataclasses import dataclass
from typing import Any, Optional

from cryptography.hazmat.primitives.asymmetric import ec
from cryptography.hazmat.primitives.hashes import SHA256

from . import b64url, cbor
from .authdata import AuthenticatorData, AttestedCredential, build_flags
from .cose import Alg, CoseKey, Curve, KeyType
from .errors import AuthenticatorError

AAGUID = b"software-authntr"  # 16 fixed bytes identifying this implementation
_P256_ORDER = 0xFFFFFFFF00000000FFFFFFFFFFFFFFFFBCE6FAADA7179E84F3B9CAC2FC632551


class UvBehavior(enum.Enum):
    ALWAYS_VERIFY = "always-verify"
    NEVER_VERIFY = "never-verify"


class CounterMode(enum.Enum):
    INCREMENT = "increment"
    ZERO = "zero"


@dataclass
class _StoredKey:
    private_key: ec.EllipticCurvePrivateKey
    user_handle: bytes
    sign_count: int


@dataclass(frozen=True)
class Mutation:
    """One deterministic edit to a ceremony response document.

    Either flip bit ``bit`` of the named binary field, or rewrite the client
    data's origin/challenge.
    """

    field: Optional[str] = None
    bit: Optional[int] = None
    replace_origin: Optional[str] = None
    replace_challenge: Optional[str] = None


_FIELD_PATHS = {
    "signature": ("response", "signature"),
    "authenticator_data": ("response", "authenticatorData"),
    "client_data": ("response", "clientDataJSON"),
    "attestation_object": ("response", "attestationObject"),
}


class VirtualAuthenticator:
    def __init__(self, *, uv_behavior: UvBehavior = UvBehavior.ALWAYS_VERIFY,
                 counter_mode: CounterMode = CounterMode.INCREMENT,
                 seed: Optional[int] = None):
        self.uv_behavior = uv_behavior
        self.counter_mode = counter_mode
        self._rng = random.Random(seed) if seed is not None else None
        self._credentials: dict[tuple[str, bytes], _StoredKey] = {}

    # -- randomness ----------------------------------------------------------

    def _random_bytes(self, count: int) -> bytes:
        if self._rng is not None:
            return self._rng.getrandbits(count * 8).to_bytes(count, "big")
        return secrets.token_bytes(count)

    def _generate_keypair(self) -> ec.EllipticCurvePrivateKey:
        if self._rng is not None:
            scalar = self._rng.randrange(1, _P256_ORDER)
            return ec.derive_private_key(scalar, ec.SECP256R1())
        return ec.generate_private_key(ec.SECP256R1())

    def _signing_algorithm(self):
        return ec.ECDSA(SHA256(), deterministic_signing=self._rng is not None)

    # -- ceremonies -----------------------------------------------------------

    def make_credential(self, options: dict[str, Any], *, origin: str,
                        fmt: Optional[str] = None) -> dict[str, Any]:
        """Registration ceremony; returns the response document to POST back.

        ``fmt`` forces the attestation format ("none" default, "packed" for
        self-attestation); otherwise the options' attestation hint is used.
        """
        rp = options.get("rp") or {}
        rp_id = rp.get("id")
        if not rp_id:
            raise AuthenticatorError("rp-missing", "options carry no relying-party id")
        if "challenge" not in options:
            raise AuthenticatorError("rp-missing", "options carry no challenge")
        algorithms = [p.get("alg") for p in options.get("pubKeyCredParams", [])]
        if int(Alg.ES256) not in algorithms:
            raise AuthenticatorError("unsupported-algorithm-list",
                                     "this authenticator signs ES256 only")
        if fmt is None:
            fmt = options.get("attestation", "none")
            if fmt not in ("none", "packed"):
                fmt = "none"

        private_key = self._generate_keypair()
        credential_id = self._random_bytes(16)
        user_handle = b""
        if isinstance(options.get("user"), dict) and "id" in options["user"]:
            user_handle = b64url.decode(options["user"]["id"])
        self._credentials[(rp_id, credential_id)] = _StoredKey(
            private_key=private_key, user_handle=user_handle, sign_count=0)

        client_data = self._client_data("webauthn.create", options["challenge"], origin)
        auth_data = AuthenticatorData(
            rp_id_hash=hashlib.sha256(rp_id.encode("ascii")).digest(),
            flags=build_flags(user_present=True,
                              user_verified=self.uv_behavior is UvBehavior.ALWAYS_VERIFY,
                              attested=True),
            sign_count=0,
            attested_credential=AttestedCredential(
                aaguid=AAGUID,
                credential_id=credential_id,
                public_key=self._cose_public_key(private_key),
            ),
        ).encode()

        statement: dict[str, Any] = {}
        if fmt == "packed":
            signed = auth_data + hashlib.sha256(client_data).digest()
            statement = {"alg": int(Alg.ES256),
                         "sig": private_key.sign(signed, self._signing_algorithm())}
        attestation_object = cbor.dumps({"fmt": fmt, "attStmt": statement,
                                         "authData": auth_data})

        token = b64url.encode(credential_id)
        return {
            "id": token,
            "rawId": token,
            "type": "public-key",
            "response": {
                "clientDataJSON": b64url.encode(client_data),
                "attestationObject": b64url.encode(attestation_object),
            },
        }

    def get_assertion(self, options: dict[str, Any], *, origin: str) -> dict[str, Any]:
        """Authentication ceremony over a credential named in the allow-list."""
        rp_id = options.get("rpId")
        if not rp_id:
            raise AuthenticatorError("rp-missing", "options carry no relying-party id")
        chosen: Optional[bytes] = None
        for entry in options.get("allowCredentials", []):
            candidate = b64url.decode(entry["id"])
            if (rp_id, candidate) in self._credentials:
                chosen = candidate
                break
        if chosen is None:
            raise AuthenticatorError("no-matching-credential",
                                     "allow-list names no credential held for this rp")
        stored = self._credentials[(rp_id, chosen)]

        if self.counter_mode is CounterMode.INCREMENT:
            stored.sign_count += 1
            count = stored.sign_count
        else:
            count = 0

        client_data = self._client_data("webauthn.get", options["challenge"], origin)
        auth_data = AuthenticatorData(
            rp_id_hash=hashlib.sha256(rp_id.encode("ascii")).digest(),
            flags=build_flags(user_present=True,
                              user_verified=self.uv_behavior is UvBehavior.ALWAYS_VERIFY),
            sign_count=count,
        ).encode()
        signed = auth_data + hashlib.sha256(client_data).digest()
        signature = stored.private_key.sign(signed, self._signing_algorithm())

        token = b64url.encode(chosen)
        return {
            "id": token,
            "rawId": token,
            "type": "public-key",
            "response": {
                "clientDataJSON": b64url.encode(client_data),
                "authenticatorData": b64url.encode(auth_data),
                "signature": b64url.encode(signature),
            },
        }

    # -- helpers --------------------------------------------------------------

    @staticmethod
    def _client_data(marker: str, challenge: str, origin: str) -> bytes:
        return json.dumps(
            {"type": marker, "challenge": challenge, "origin": origin, "crossOrigin": False},
            separators=(",", ":"),
        ).encode("utf-8")

    @staticmethod
    def _cose_public_key(private_key: ec.EllipticCurvePrivateKey) -> CoseKey:
        numbers = private_key.public_key().public_numbers()
        return CoseKey(KeyType.EC2, Alg.ES256, Curve.P256,
                       x=numbers.x.to_bytes(32, "big"),
                       y=numbers.y.to_bytes(32, "big"))

    def credential_ids(self, rp_id: str) -> list[bytes]:
        return [cid for (rp, cid) in self._credentials if rp == rp_id]


def tamper(response: dict[str, Any], mutation: Mutation) -> dict[str, Any]:
    """Apply one mutation to a copy of a ceremony response document."""
    doc = copy.deepcopy(response)

    if mutation.replace_origin is not None or mutation.replace_challenge is not None:
        outer, inner = _FIELD_PATHS["client_data"]
        client = json.loads(b64url.decode(doc[outer][inner]))
        if mutation.replace_origin is not None:
            client["origin"] = mutation.replace_origin
        if mutation.replace_challenge is not None:
            client["challenge"] = mutation.replace_challenge
        doc[outer][inner] = b64url.encode(
            json.dumps(client, separators=(",", ":")).encode("utf-8"))
        return doc

    if mutation.field not in _FIELD_PATHS:
        raise AuthenticatorError("field-unknown", f"no field {mutation.field!r}")
    outer, inner = _FIELD_PATHS[mutation.field]
    if inner not in response.get(outer, {}):
        raise AuthenticatorError("field-unknown",
                                 f"document has no {mutation.field} field")
    data = bytearray(b64url.decode(doc[outer][inner]))
    if mutation.bit is None or not 0 <= mutation.bit < len(data) * 8:
        raise AuthenticatorError("position-out-of-range",
                                 f"bit {mutation.bit} of {len(data) * 8}")
    data[mutation.bit // 8] ^= 1 << (mutation.bit % 8)
    doc[outer][inner] = b64url.encode(bytes(data))
    return doc

"""COSE public keys: parsing from CBOR, signature verification, and the
JSON form used by the credential store.

Supported algorithms are the WebAuthn staples ES256 (ECDSA/P-256/SHA-256),
EdDSA over Ed25519, and RS256 (RSA PKCS#1v1.5/SHA-256, modulus >= 2048 bits).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Optional

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric import ec, ed25519, padding, rsa
from cryptography.hazmat.primitives.hashes import SHA256

from . import b64url, cbor
from .errors import EncodingError, VerificationError


class Alg(enum.IntEnum):
    """COSE signature-algorithm identifiers accepted by this verifier."""

    ES256 = -7
    EDDSA = -8
    RS256 = -257

    @property
    def label(self) -> str:
        return {Alg.ES256: "ES256", Alg.EDDSA: "EdDSA", Alg.RS256: "RS256"}[self]

    @classmethod
    def from_label(cls, label: str) -> "Alg":
        for alg in cls:
            if alg.label == label:
                return alg
        raise ValueError(f"unknown algorithm label {label!r}")


class KeyType(enum.Enum):
    EC2 = 2
    OKP = 1
    RSA = 3


class Curve(enum.Enum):
    P256 = 1
    ED25519 = 6


# kty implied by each algorithm; a mismatch is treated as an unknown algorithm
_ALG_KEY_TYPE = {Alg.ES256: KeyType.EC2, Alg.EDDSA: KeyType.OKP, Alg.RS256: KeyType.RSA}
RSA_MIN_MODULUS_BYTES = 256


@dataclass(frozen=True)
class CoseKey:
    key_type: KeyType
    algorithm: Alg
    curve: Optional[Curve] = None
    x: bytes = b""
    y: Optional[bytes] = None
    n: Optional[bytes] = None
    e: Optional[bytes] = None

    def encode(self) -> bytes:
        """Serialize to CBOR with a fixed label order (1, 3, then key params)."""
        fields: dict[int, Any] = {1: self.key_type.value, 3: int(self.algorithm)}
        if self.key_type is KeyType.EC2:
            fields[-1] = self.curve.value
            fields[-2] = self.x
            fields[-3] = self.y
        elif self.key_type is KeyType.OKP:
            fields[-1] = self.curve.value
            fields[-2] = self.x
        else:
            fields[-1] = self.n
            fields[-2] = self.e
        return cbor.dumps(fields)

    def _public_key(self):
        try:
            if self.key_type is KeyType.EC2:
                numbers = ec.EllipticCurvePublicNumbers(
                    int.from_bytes(self.x, "big"),
                    int.from_bytes(self.y, "big"),
                    ec.SECP256R1(),
                )
                return numbers.public_key()
            if self.key_type is KeyType.OKP:
                return ed25519.Ed25519PublicKey.from_public_bytes(self.x)
            return rsa.RSAPublicNumbers(
                int.from_bytes(self.e, "big"), int.from_bytes(self.n, "big")
            ).public_key()
        except ValueError as exc:
            raise VerificationError("signature-invalid", f"unusable public key: {exc}")

    def verify(self, message: bytes, signature: bytes) -> None:
        """Check signature over message; raises VerificationError(signature-invalid)."""
        key = self._public_key()
        try:
            if self.algorithm is Alg.ES256:
                key.verify(signature, message, ec.ECDSA(SHA256()))
            elif self.algorithm is Alg.EDDSA:
                key.verify(signature, message)
            else:
                key.verify(signature, message, padding.PKCS1v15(), SHA256())
        except (InvalidSignature, ValueError) as exc:
            raise VerificationError("signature-invalid", str(exc) or "signature rejected")

    def to_json(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"kty": self.key_type.name, "alg": self.algorithm.label}
        if self.key_type in (KeyType.EC2, KeyType.OKP):
            doc["crv"] = "P-256" if self.curve is Curve.P256 else "Ed25519"
            doc["x"] = b64url.encode(self.x)
            if self.y is not None:
                doc["y"] = b64url.encode(self.y)
        else:
            doc["n"] = b64url.encode(self.n)
            doc["e"] = b64url.encode(self.e)
        return doc

    @classmethod
    def from_json(cls, doc: dict[str, Any]) -> "CoseKey":
        key_type = KeyType[doc["kty"]]
        algorithm = Alg.from_label(doc["alg"])
        if key_type is KeyType.EC2:
            return cls(key_type, algorithm, Curve.P256,
                       x=b64url.decode(doc["x"]), y=b64url.decode(doc["y"]))
        if key_type is KeyType.OKP:
            return cls(key_type, algorithm, Curve.ED25519, x=b64url.decode(doc["x"]))
        return cls(key_type, algorithm, n=b64url.decode(doc["n"]), e=b64url.decode(doc["e"]))


def _require(mapping: dict[Any, Any], label: int, name: str) -> Any:
    if label not in mapping:
        raise EncodingError("missing-required-label", f"COSE key lacks label {label} ({name})")
    return mapping[label]


def parse_cose_key(raw: bytes | dict[Any, Any]) -> CoseKey:
    """Parse a CBOR-encoded COSE key (or an already-decoded map).

    Unknown labels are ignored. Rejects unknown algorithms, algorithm/key-type
    mismatches, bad coordinate lengths, and RSA moduli under 2048 bits.
    """
    if isinstance(raw, (bytes, bytearray)):
        decoded = cbor.loads(bytes(raw))
    else:
        decoded = raw
    if not isinstance(decoded, dict):
        raise EncodingError("not-a-map", "COSE key must be a CBOR map")

    kty_value = _require(decoded, 1, "kty")
    alg_value = _require(decoded, 3, "alg")
    try:
        algorithm = Alg(alg_value)
    except ValueError:
        raise VerificationError("algorithm-not-allowed", f"COSE algorithm {alg_value}")
    try:
        key_type = KeyType(kty_value)
    except ValueError:
        raise VerificationError("algorithm-not-allowed", f"COSE key type {kty_value}")
    if _ALG_KEY_TYPE[algorithm] is not key_type:
        raise VerificationError(
            "algorithm-not-allowed",
            f"key type {key_type.name} cannot carry algorithm {algorithm.label}",
        )

    if key_type is KeyType.EC2:
        curve = _require(decoded, -1, "crv")
        x = _require(decoded, -2, "x")
        y = _require(decoded, -3, "y")
        if curve != Curve.P256.value:
            raise VerificationError("algorithm-not-allowed", f"EC2 curve {curve}")
        if not (isinstance(x, bytes) and isinstance(y, bytes) and len(x) == 32 and len(y) == 32):
            raise EncodingError("malformed-coordinate-length", "EC2 requires 32-byte x and y")
        return CoseKey(key_type, algorithm, Curve.P256, x=x, y=y)

    if key_type is KeyType.OKP:
        curve = _require(decoded, -1, "crv")
        x = _require(decoded, -2, "x")
        if curve != Curve.ED25519.value:
            raise VerificationError("algorithm-not-allowed", f"OKP curve {curve}")
        if not (isinstance(x, bytes) and len(x) == 32):
            raise EncodingError("malformed-coordinate-length", "OKP requires 32-byte x")
        return CoseKey(key_type, algorithm, Curve.ED25519, x=x)

    n = _require(decoded, -1, "n")
    e = _require(decoded, -2, "e")
    if not (isinstance(n, bytes) and isinstance(e, bytes) and e):
        raise EncodingError("malformed-coordinate-length", "RSA requires byte-string n and e")
    if len(n) < RSA_MIN_MODULUS_BYTES:
        raise EncodingError(
            "malformed-coordinate-length",
            f"RSA modulus is {len(n) * 8} bits; 2048 is the floor",
        )
    return CoseKey(key_type, algorithm, n=n, e=e)

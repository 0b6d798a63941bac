#!/usr/bin/env python3
"""Regenerate the frozen wire vectors shared by the Python and frontend test
suites. The seeded software authenticator is deterministic, so this file is
reproducible; the Python suite asserts it has not drifted.

    python3 scripts/generate_wire_vectors.py
"""

import json
import sys
from pathlib import Path

from pam_passkey import b64url
from pam_passkey.authenticator import VirtualAuthenticator

SEED = 20250809
ORIGIN = "https://host.example"
RP_ID = "host.example"

B64URL_CASES = [
    b"",
    b"\x00",
    b"\x00\x00\x00",
    b"f",
    b"fo",
    b"foo",
    b"foob",
    b"fooba",
    b"foobar",
    bytes(range(256))[:61],
    b"\xff\xfe\xfd\xfc",
    b"\xfb\xff\xbf",
]


def build() -> dict:
    authenticator = VirtualAuthenticator(seed=SEED)
    registration = authenticator.make_credential(
        {
            "rp": {"id": RP_ID, "name": "Example Host"},
            "user": {"id": b64url.encode(b"alice"), "name": "alice",
                     "displayName": "alice"},
            "challenge": b64url.encode(bytes(range(32))),
            "pubKeyCredParams": [{"type": "public-key", "alg": -7}],
            "attestation": "none",
        },
        origin=ORIGIN,
    )
    assertion = authenticator.get_assertion(
        {
            "rpId": RP_ID,
            "challenge": b64url.encode(bytes(range(32, 64))),
            "allowCredentials": [{"type": "public-key", "id": registration["rawId"]}],
        },
        origin=ORIGIN,
    )

    def raw_fields(document, names):
        return {name: b64url.decode(document["response"][name]).hex() for name in names} | {
            "rawId": b64url.decode(document["rawId"]).hex()
        }

    return {
        "b64url": [{"hex": data.hex(), "text": b64url.encode(data)}
                   for data in B64URL_CASES],
        "registration": {
            "raw": raw_fields(registration, ["clientDataJSON", "attestationObject"]),
            "document": registration,
        },
        "assertion": {
            "raw": raw_fields(assertion,
                              ["clientDataJSON", "authenticatorData", "signature"]),
            "document": assertion,
        },
    }


def main() -> int:
    target = Path(__file__).parent.parent / "frontend" / "vectors" / "wire-vectors.json"
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(json.dumps(build(), indent=2, sort_keys=True) + "\n")
    print(f"wrote {target}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Exception taxonomy. Every failure carries a stable machine-readable kind
string; HTTP handlers and the CLI surface the kind verbatim."""

from __future__ import annotations


class PasskeyError(Exception):
    """Base for all errors raised by this package.

    ``kind`` is the stable, machine-readable identifier (kebab-case);
    ``detail`` is free-form human context.
    """

    def __init__(self, kind: str, detail: str = ""):
        self.kind = kind
        self.detail = detail
        super().__init__(f"{kind}: {detail}" if detail else kind)


class EncodingError(PasskeyError):
    """base64url or CBOR level failure (invalid-character, invalid-length,
    not-a-map, truncated-input, ...)."""


class VerificationError(PasskeyError):
    """Ceremony verification failure (challenge-mismatch, origin-mismatch,
    signature-invalid, ...)."""


class StoreError(PasskeyError):
    """Credential store failure (duplicate-credential-id, unknown-credential,
    count-regression, persistence-failure)."""


class TicketError(PasskeyError):
    """One-time ticket failure (unknown-ticket, expired, already-redeemed,
    purpose-mismatch)."""


class ChallengeError(PasskeyError):
    """Pending-challenge bookkeeping failure (session-unknown,
    session-already-has-pending-challenge)."""


class AuthenticatorError(PasskeyError):
    """Virtual authenticator failure (unsupported-algorithm-list, rp-missing,
    no-matching-credential, field-unknown, position-out-of-range)."""


class ServerError(PasskeyError):
    """Challenge webserver failure (bind-failure, tls-material-invalid)."""

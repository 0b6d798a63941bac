"""Passkey login for SSH hosts.

A host-side authentication module that, when a login is attempted, spins up
an ephemeral challenge webserver, hands the client a one-time URL over the
SSH text channel, runs the WebAuthn ceremony against the host's credential
store, and reports the outcome back to the login. Ships with a software
authenticator so the whole loop is testable without hardware or a browser.
"""

from .cose import Alg, CoseKey
from .outcome import PamVerdict, VerdictKind
from .rp import Ceremony, RelyingPartyConfig
from .store import CredentialRecord, CredentialStore
from .tokens import SessionTicket, TicketPurpose, TicketTable

__version__ = "0.1.0"

__all__ = [
    "Alg",
    "CoseKey",
    "PamVerdict",
    "VerdictKind",
    "Ceremony",
    "RelyingPartyConfig",
    "CredentialRecord",
    "CredentialStore",
    "SessionTicket",
    "TicketPurpose",
    "TicketTable",
    "__version__",
]

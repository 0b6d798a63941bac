"""Full-loop self-check: registration then authentication against a temporary
store, driven end to end by the software authenticator through the real HTTP
surface and the conversation simulator."""

from __future__ import annotations

import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .authenticator import VirtualAuthenticator
from .bridge import BridgeConfig, PamBridge, extract_url, simulate_conversation
from .outcome import VerdictKind
from .rp import RelyingPartyConfig
from .server import ChallengeServer, ServerSettings
from .store import CredentialStore
from .tokens import TicketPurpose, TicketTable
from .webclient import complete_authentication, complete_registration

LOOPBACK_SETTINGS = ServerSettings(advertised_host="localhost")


@dataclass
class SelftestReport:
    ok: bool
    registration_seconds: float
    authentication_seconds: float
    detail: str

    def lines(self) -> list[str]:
        mark = lambda good: "ok" if good else "FAIL"  # noqa: E731
        return [
            f"registration  {mark(self.ok)}  {self.registration_seconds * 1000:7.1f} ms",
            f"authentication {mark(self.ok)} {self.authentication_seconds * 1000:7.1f} ms",
            f"result: {'pass' if self.ok else f'fail ({self.detail})'}",
        ]


def loopback_rp_config() -> RelyingPartyConfig:
    return RelyingPartyConfig(rp_id="localhost", rp_name="selftest host",
                              expected_origins=())


def run_selftest(user: str = "selftest", *, inject_wrong_origin: bool = False,
                 auth_timeout: float = 10.0,
                 store_path: Optional[Path] = None) -> SelftestReport:
    """Returns a report; never raises for protocol-level failures."""
    with tempfile.TemporaryDirectory(prefix="pam-passkey-selftest.") as tmp:
        store = CredentialStore(store_path or Path(tmp) / "credentials.json")
        rp_config = loopback_rp_config()
        authenticator = VirtualAuthenticator()
        wrong_origin = "https://phisher.example" if inject_wrong_origin else None

        # registration leg: admin-issued link against a standalone server
        t0 = time.perf_counter()
        tickets = TicketTable()
        ticket = tickets.issue(TicketPurpose.REGISTRATION, user)
        server = ChallengeServer(rp_config, store, tickets, LOOPBACK_SETTINGS)
        server.start()
        try:
            outcome = complete_registration(server.url_for(ticket), authenticator,
                                            origin=wrong_origin)
        finally:
            server.shutdown()
        registration_seconds = time.perf_counter() - t0
        if outcome.status != 201:
            return SelftestReport(False, registration_seconds, 0.0,
                                  f"registration: {outcome.body.get('error', outcome.status)}")

        # authentication leg: the bridge's own flow, scripted client side
        bridge = PamBridge(rp_config, store,
                           BridgeConfig(auth_timeout=auth_timeout,
                                        server=LOOPBACK_SETTINGS))
        t1 = time.perf_counter()
        transcript = simulate_conversation(
            bridge, user,
            lambda message: complete_authentication(
                extract_url(message), authenticator, origin=wrong_origin))
        authentication_seconds = time.perf_counter() - t1
        verdict = transcript.verdict
        if verdict is None or verdict.kind is not VerdictKind.SUCCESS:
            kind = verdict.kind.value if verdict else "missing"
            return SelftestReport(False, registration_seconds, authentication_seconds,
                                  f"authentication verdict: {kind}")
        return SelftestReport(True, registration_seconds, authentication_seconds, "")

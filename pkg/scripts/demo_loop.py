#!/usr/bin/env python3
"""Run the whole login story headlessly and narrate it.

Registers a passkey for a demo user against a temporary credential store,
then performs an authentication exactly the way a login attempt would: the
bridge starts the challenge webserver, pushes the one-time URL through the
conversation channel, and a software authenticator plays the browser side.

    python3 scripts/demo_loop.py
"""

import sys
import tempfile
import time
from pathlib import Path

from pam_passkey import b64url
from pam_passkey.authenticator import VirtualAuthenticator
from pam_passkey.bridge import BridgeConfig, PamBridge, extract_url, simulate_conversation
from pam_passkey.outcome import VerdictKind
from pam_passkey.selftest import LOOPBACK_SETTINGS, loopback_rp_config
from pam_passkey.server import ChallengeServer
from pam_passkey.store import CredentialStore
from pam_passkey.tokens import TicketPurpose, TicketTable
from pam_passkey.webclient import complete_authentication, complete_registration

USER = "demo"


def main() -> int:
    with tempfile.TemporaryDirectory(prefix="pam-passkey-demo.") as tmp:
        store = CredentialStore(Path(tmp) / "credentials.json")
        rp_config = loopback_rp_config()
        authenticator = VirtualAuthenticator()

        print("== registration (admin hands out a one-time link) ==")
        tickets = TicketTable()
        ticket = tickets.issue(TicketPurpose.REGISTRATION, USER)
        server = ChallengeServer(rp_config, store, tickets, LOOPBACK_SETTINGS)
        server.start()
        url = server.url_for(ticket)
        print(f"registration link: {url}")
        t0 = time.perf_counter()
        outcome = complete_registration(url, authenticator)
        server.shutdown()
        if outcome.status != 201:
            print(f"registration failed: {outcome.body}")
            return 1
        record = store.lookup_by_user(USER)[0]
        print(f"registered credential {b64url.encode(record.credential_id)} "
              f"in {(time.perf_counter() - t0) * 1000:.1f} ms")

        print("\n== authentication (what a login attempt runs) ==")
        bridge = PamBridge(rp_config, store,
                           BridgeConfig(auth_timeout=10.0, server=LOOPBACK_SETTINGS))
        t1 = time.perf_counter()
        transcript = simulate_conversation(
            bridge, USER,
            lambda message: complete_authentication(extract_url(message), authenticator))
        elapsed = (time.perf_counter() - t1) * 1000

        for entry in transcript.entries:
            print(f"  [{entry.kind}] {entry.text.rstrip()}")
        verdict = transcript.verdict
        print(f"verdict: {verdict.kind.value} in {elapsed:.1f} ms")
        print(f"sign count now: {store.lookup_by_user(USER)[0].sign_count}")
        return 0 if verdict.kind is VerdictKind.SUCCESS else 1


if __name__ == "__main__":
    sys.exit(main())

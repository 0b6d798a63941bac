import re
import socket
import threading
import time
import urllib.error

import pytest

from pam_passkey.authenticator import VirtualAuthenticator
from pam_passkey.bridge import (
    BridgeConfig,
    PamBridge,
    extract_url,
    simulate_conversation,
)
from pam_passkey.outcome import VerdictKind
from pam_passkey.selftest import LOOPBACK_SETTINGS, loopback_rp_config
from pam_passkey.server import ChallengeServer, ServerSettings
from pam_passkey.store import CredentialStore
from pam_passkey.tokens import TicketPurpose, TicketTable
from pam_passkey.webclient import (
    _post_json,
    complete_authentication,
    complete_registration,
    fetch_page,
    split_ticket_url,
)

URL_LINE = re.compile(
    r"^Authenticate at: (http://localhost:\d+/a/[A-Za-z0-9_-]{22})\n$")


@pytest.fixture
def env(tmp_path):
    store = CredentialStore(tmp_path / "creds.json")
    rp_config = loopback_rp_config()
    authenticator = VirtualAuthenticator()
    return store, rp_config, authenticator


def register_user(store, rp_config, authenticator, user="alice"):
    tickets = TicketTable()
    ticket = tickets.issue(TicketPurpose.REGISTRATION, user)
    server = ChallengeServer(rp_config, store, tickets, LOOPBACK_SETTINGS)
    server.start()
    try:
        outcome = complete_registration(server.url_for(ticket), authenticator)
        assert outcome.status == 201, outcome.body
    finally:
        server.shutdown()


def bridge_for(store, rp_config, auth_timeout=5.0):
    return PamBridge(rp_config, store,
                     BridgeConfig(auth_timeout=auth_timeout, server=LOOPBACK_SETTINGS))


def test_oracle_completes_login_within_two_seconds(env):
    store, rp_config, authenticator = env
    register_user(store, rp_config, authenticator)
    bridge = bridge_for(store, rp_config)

    started = time.perf_counter()
    transcript = simulate_conversation(
        bridge, "alice",
        lambda message: complete_authentication(extract_url(message), authenticator))
    elapsed = time.perf_counter() - started

    assert transcript.verdict.kind is VerdictKind.SUCCESS
    assert elapsed < 2.0


def test_message_is_exactly_the_url_line(env):
    store, rp_config, authenticator = env
    register_user(store, rp_config, authenticator)
    bridge = bridge_for(store, rp_config)
    transcript = simulate_conversation(
        bridge, "alice",
        lambda message: complete_authentication(extract_url(message), authenticator))
    assert len(transcript.messages) == 1
    assert URL_LINE.match(transcript.messages[0])


def test_no_credential_material_in_conversation(env):
    store, rp_config, authenticator = env
    register_user(store, rp_config, authenticator)
    bridge = bridge_for(store, rp_config)
    transcript = simulate_conversation(
        bridge, "alice",
        lambda message: complete_authentication(extract_url(message), authenticator))
    from pam_passkey import b64url
    credential_tokens = [b64url.encode(r.credential_id) for r in store.list_all()]
    for message in transcript.messages:
        assert URL_LINE.match(message)
        for token in credential_tokens:
            assert token not in message


def test_timeout_when_nothing_arrives(env):
    store, rp_config, _ = env
    bridge = bridge_for(store, rp_config, auth_timeout=1.0)
    started = time.perf_counter()
    transcript = simulate_conversation(bridge, "alice", lambda message: None)
    elapsed = time.perf_counter() - started
    assert transcript.verdict.kind is VerdictKind.TIMEOUT
    assert 1.0 <= elapsed <= 1.5


def test_port_closed_after_return(env):
    store, rp_config, authenticator = env
    register_user(store, rp_config, authenticator)
    bridge = bridge_for(store, rp_config)
    transcript = simulate_conversation(
        bridge, "alice",
        lambda message: complete_authentication(extract_url(message), authenticator))
    url = extract_url(transcript.messages[0])
    base, _, _ = split_ticket_url(url)
    host, port = base.split("//")[1].split(":")
    with pytest.raises((ConnectionRefusedError, urllib.error.URLError, socket.timeout)):
        socket.create_connection((host, int(port)), timeout=1).close()
        raise ConnectionRefusedError  # connected: the port is still open


def test_conversation_unavailable(env):
    store, rp_config, _ = env
    bridge = bridge_for(store, rp_config)

    class BrokenConversation:
        def info(self, message):
            raise BrokenPipeError("client went away")

    verdict = bridge.authenticate("alice", BrokenConversation())
    assert verdict.kind is VerdictKind.AUTH_ERROR
    assert verdict.detail == "conversation-unavailable"


def test_server_start_failure(env):
    store, rp_config, _ = env
    config = BridgeConfig(auth_timeout=1.0,
                          server=ServerSettings(bind_host="198.51.100.1"))
    bridge = PamBridge(rp_config, store, config)
    transcript = simulate_conversation(bridge, "alice", lambda message: None)
    assert transcript.verdict.kind is VerdictKind.AUTH_ERROR
    assert transcript.verdict.detail == "server-start-failure"
    assert transcript.messages == []


def test_unknown_user_exhausts_verify_budget(env):
    store, rp_config, _ = env  # nobody registered: empty allow-list

    def rogue_login(message):
        url = extract_url(message)
        base, _, token = split_ticket_url(url)
        options = _post_json(base + "/api/auth/options", {"token": token}, 5)
        assert options.body["allowCredentials"] == []
        rogue = VirtualAuthenticator()
        registration = rogue.make_credential(
            {"rp": {"id": "localhost", "name": "x"}, "challenge": options.body["challenge"],
             "pubKeyCredParams": [{"type": "public-key", "alg": -7}]},
            origin=base)
        forged_options = dict(options.body)
        forged_options["allowCredentials"] = [
            {"type": "public-key", "id": registration["rawId"]}]
        for _ in range(3):
            assertion = rogue.get_assertion(forged_options, origin=base)
            _post_json(base + "/api/auth/verify",
                       {"token": token, "response": assertion}, 5)

    bridge = bridge_for(store, rp_config, auth_timeout=5.0)
    transcript = simulate_conversation(bridge, "mallory", rogue_login)
    verdict = transcript.verdict
    assert verdict.kind is VerdictKind.AUTH_ERROR
    assert "credential-id-mismatch" in verdict.detail


def test_script_abort_is_recorded(env):
    store, rp_config, _ = env
    bridge = bridge_for(store, rp_config, auth_timeout=1.0)

    def fetch_then_abort(message):
        fetch_page(extract_url(message))
        raise RuntimeError("giving up")

    transcript = simulate_conversation(bridge, "alice", fetch_then_abort)
    assert transcript.aborts == ["RuntimeError: giving up"]
    assert transcript.verdict.kind in (VerdictKind.TIMEOUT, VerdictKind.AUTH_ERROR)


def test_concurrent_logins_are_independent(env):
    store, rp_config, _ = env
    authenticators = {user: VirtualAuthenticator() for user in ("alice", "bob")}
    for user, authenticator in authenticators.items():
        register_user(store, rp_config, authenticator, user=user)

    results = {}

    def login(user):
        bridge = bridge_for(store, rp_config)
        transcript = simulate_conversation(
            bridge, user,
            lambda message: complete_authentication(
                extract_url(message), authenticators[user]))
        results[user] = transcript.verdict.kind

    threads = [threading.Thread(target=login, args=(user,))
               for user in authenticators]
    for thread in threads:
        thread.start()
    for thread in threads:
        thread.join()
    assert results == {"alice": VerdictKind.SUCCESS, "bob": VerdictKind.SUCCESS}

"""The ABI shim: contract mapping against a fake pamh handle."""

import json
import threading

import pytest

from pam_passkey import pam_module
from pam_passkey.authenticator import VirtualAuthenticator
from pam_passkey.bridge import extract_url
from pam_passkey.selftest import LOOPBACK_SETTINGS, loopback_rp_config
from pam_passkey.server import ChallengeServer
from pam_passkey.store import CredentialStore
from pam_passkey.tokens import TicketPurpose, TicketTable
from pam_passkey.webclient import complete_authentication, complete_registration


class FakePamh:
    PAM_SUCCESS = 0
    PAM_AUTH_ERR = 7
    PAM_IGNORE = 25
    PAM_TEXT_INFO = 4

    class exception(Exception):  # noqa: N801 - pamh spelling
        pass

    class Message:
        def __init__(self, msg_style, msg):
            self.msg_style = msg_style
            self.msg = msg

    def __init__(self, user, on_info=None):
        self._user = user
        self._on_info = on_info or (lambda message: None)
        self.messages = []

    def get_user(self, prompt):
        return self._user

    def conversation(self, message):
        self.messages.append(message.msg)
        thread = threading.Thread(target=self._on_info, args=(message.msg,),
                                  daemon=True)
        thread.start()


@pytest.fixture
def config_file(tmp_path):
    def build(**overrides):
        doc = {
            "rp_id": "localhost",
            "expected_origins": [],
            "store_path": str(tmp_path / "creds.json"),
            "auth_timeout": 3.0,
            "bind_host": "127.0.0.1",
            "advertised_host": "localhost",
        }
        doc.update(overrides)
        path = tmp_path / "config.json"
        path.write_text(json.dumps(doc))
        return str(path)

    return build


def register(tmp_path, authenticator, user):
    store = CredentialStore(tmp_path / "creds.json")
    tickets = TicketTable()
    ticket = tickets.issue(TicketPurpose.REGISTRATION, user)
    server = ChallengeServer(loopback_rp_config(), store, tickets, LOOPBACK_SETTINGS)
    server.start()
    try:
        assert complete_registration(server.url_for(ticket), authenticator).status == 201
    finally:
        server.shutdown()


def test_success_maps_to_pam_success(tmp_path, config_file):
    authenticator = VirtualAuthenticator()
    register(tmp_path, authenticator, "alice")
    pamh = FakePamh("alice", lambda message: complete_authentication(
        extract_url(message), authenticator))
    code = pam_module.pam_sm_authenticate(pamh, 0, ["pam_passkey", config_file()])
    assert code == FakePamh.PAM_SUCCESS
    assert len(pamh.messages) == 1


def test_timeout_maps_to_auth_err(config_file):
    pamh = FakePamh("alice")
    code = pam_module.pam_sm_authenticate(
        pamh, 0, ["pam_passkey", config_file(auth_timeout=0.5)])
    assert code == FakePamh.PAM_AUTH_ERR


def test_server_start_failure_without_fallback(config_file):
    pamh = FakePamh("alice")
    code = pam_module.pam_sm_authenticate(
        pamh, 0, ["pam_passkey", config_file(bind_host="198.51.100.1")])
    assert code == FakePamh.PAM_AUTH_ERR


def test_server_start_failure_with_fallback_is_ignore(config_file):
    pamh = FakePamh("alice")
    code = pam_module.pam_sm_authenticate(
        pamh, 0, ["pam_passkey",
                  config_file(bind_host="198.51.100.1", fallback_allowed=True)])
    assert code == FakePamh.PAM_IGNORE


def test_missing_user_is_auth_err(config_file):
    pamh = FakePamh("")
    code = pam_module.pam_sm_authenticate(pamh, 0, ["pam_passkey", config_file()])
    assert code == FakePamh.PAM_AUTH_ERR


def test_setcred_is_noop(config_file):
    assert pam_module.pam_sm_setcred(FakePamh("alice"), 0, []) == FakePamh.PAM_SUCCESS

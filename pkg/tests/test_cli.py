import json
import re
import subprocess
import sys
import time

import pytest

from pam_passkey import b64url
from pam_passkey.authenticator import VirtualAuthenticator
from pam_passkey.cli import main
from pam_passkey.store import CredentialStore
from pam_passkey.webclient import complete_registration

REG_URL = re.compile(r"^http://localhost:\d+/r/[A-Za-z0-9_-]{22}$")


@pytest.fixture
def config_file(tmp_path):
    doc = {
        "rp_id": "localhost",
        "store_path": str(tmp_path / "creds.json"),
        "advertised_host": "localhost",
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(doc))
    return str(path)


def test_register_link_prints_url(config_file, capsys):
    code = main(["--config", config_file, "register-link", "alice", "--print-only"])
    assert code == 0
    url = capsys.readouterr().out.strip()
    assert REG_URL.match(url)


def test_register_link_requires_user(config_file):
    with pytest.raises(SystemExit) as info:
        main(["--config", config_file, "register-link"])
    assert info.value.code == 2


def test_register_link_rejects_nonportable_user(config_file, capsys):
    code = main(["--config", config_file, "register-link", "has space",
                 "--print-only"])
    assert code == 2
    assert "account name" in capsys.readouterr().err


def test_unwritable_store_is_operational_failure(tmp_path, capsys):
    blocker = tmp_path / "blocker"
    blocker.write_text("a file, not a directory")
    config = tmp_path / "config.json"
    config.write_text(json.dumps({
        "rp_id": "localhost",
        "store_path": str(blocker / "creds.json"),
        "advertised_host": "localhost",
    }))
    code = main(["--config", str(config), "register-link", "alice", "--print-only"])
    assert code == 1
    assert "error" in capsys.readouterr().err


def test_register_link_serves_until_completion(config_file, tmp_path):
    process = subprocess.Popen(
        [sys.executable, "-m", "pam_passkey.cli", "--config", config_file,
         "register-link", "alice", "--ttl", "30"],
        stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True)
    try:
        url = process.stdout.readline().strip()
        assert REG_URL.match(url), url
        outcome = complete_registration(url, VirtualAuthenticator())
        assert outcome.status == 201
        assert process.wait(timeout=10) == 0
    finally:
        if process.poll() is None:
            process.kill()
    store = CredentialStore(tmp_path / "creds.json")
    assert len(store.lookup_by_user("alice")) == 1


def test_register_link_expiry_is_failure(config_file):
    process = subprocess.run(
        [sys.executable, "-m", "pam_passkey.cli", "--config", config_file,
         "register-link", "alice", "--ttl", "0.4"],
        capture_output=True, text=True, timeout=15)
    assert process.returncode == 1
    assert "expired" in process.stderr


def test_list_empty_store_prints_header_only(config_file, capsys):
    assert main(["--config", config_file, "list"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 1
    assert lines[0].startswith("CREDENTIAL")


def seed_store(tmp_path, config_file):
    authenticator = VirtualAuthenticator()
    for user in ("alice", "bob"):
        code = -1
        process = subprocess.Popen(
            [sys.executable, "-m", "pam_passkey.cli", "--config", config_file,
             "register-link", user, "--ttl", "30"],
            stdout=subprocess.PIPE, text=True)
        try:
            url = process.stdout.readline().strip()
            assert complete_registration(url, authenticator).status == 201
            code = process.wait(timeout=10)
        finally:
            if process.poll() is None:
                process.kill()
        assert code == 0
    return CredentialStore(tmp_path / "creds.json")


def test_list_filter_and_revoke_flow(config_file, tmp_path, capsys):
    store = seed_store(tmp_path, config_file)

    assert main(["--config", config_file, "list", "--user", "alice"]) == 0
    out = capsys.readouterr().out
    assert "alice" in out and "bob" not in out

    target = store.lookup_by_user("bob")[0]
    token = b64url.encode(target.credential_id)
    assert main(["--config", config_file, "revoke", token]) == 0
    capsys.readouterr()
    assert main(["--config", config_file, "revoke", token]) == 0  # idempotent
    capsys.readouterr()

    assert main(["--config", config_file, "list"]) == 0
    out = capsys.readouterr().out
    revoked_rows = [line for line in out.splitlines() if "revoked" in line]
    assert len(revoked_rows) == 1
    assert token in revoked_rows[0]


def test_revoke_unknown_credential(config_file, capsys):
    assert main(["--config", config_file, "revoke",
                 b64url.encode(b"\x00" * 16)]) == 1
    assert "unknown-credential" in capsys.readouterr().err


def test_selftest_passes_quickly(capsys):
    started = time.perf_counter()
    code = main(["selftest"])
    elapsed = time.perf_counter() - started
    assert code == 0
    assert elapsed < 5.0
    out = capsys.readouterr().out
    assert "pass" in out


def test_selftest_injected_origin_mismatch_fails(capsys):
    assert main(["selftest", "--inject-wrong-origin"]) == 1
    assert "fail" in capsys.readouterr().out


def test_selftest_cleans_temporary_store(tmp_path, monkeypatch):
    import tempfile
    monkeypatch.setenv("TMPDIR", str(tmp_path))
    tempfile.tempdir = None  # force re-read of TMPDIR
    try:
        assert main(["selftest"]) == 0
        leftovers = [p for p in tmp_path.iterdir()
                     if p.name.startswith("pam-passkey-selftest.")]
        assert leftovers == []
    finally:
        tempfile.tempdir = None

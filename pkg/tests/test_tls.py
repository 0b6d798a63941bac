"""TLS material handling: operator-supplied certificate or the loopback
plain-HTTP development mode; broken material is a distinct startup error."""

import datetime
import ssl
import urllib.request

import pytest
from cryptography import x509
from cryptography.hazmat.primitives import hashes, serialization
from cryptography.hazmat.primitives.asymmetric import ec
from cryptography.x509.oid import NameOID

from pam_passkey.errors import ServerError
from pam_passkey.rp import RelyingPartyConfig
from pam_passkey.server import ChallengeServer, ServerSettings
from pam_passkey.store import CredentialStore
from pam_passkey.tokens import TicketPurpose, TicketTable


@pytest.fixture
def tls_material(tmp_path):
    key = ec.generate_private_key(ec.SECP256R1())
    name = x509.Name([x509.NameAttribute(NameOID.COMMON_NAME, "localhost")])
    now = datetime.datetime.now(datetime.timezone.utc)
    certificate = (
        x509.CertificateBuilder()
        .subject_name(name)
        .issuer_name(name)
        .public_key(key.public_key())
        .serial_number(x509.random_serial_number())
        .not_valid_before(now - datetime.timedelta(minutes=5))
        .not_valid_after(now + datetime.timedelta(days=1))
        .add_extension(x509.SubjectAlternativeName([x509.DNSName("localhost")]),
                       critical=False)
        .sign(key, hashes.SHA256())
    )
    certfile = tmp_path / "cert.pem"
    keyfile = tmp_path / "key.pem"
    certfile.write_bytes(certificate.public_bytes(serialization.Encoding.PEM))
    keyfile.write_bytes(key.private_bytes(
        serialization.Encoding.PEM,
        serialization.PrivateFormat.PKCS8,
        serialization.NoEncryption()))
    return str(certfile), str(keyfile)


def test_https_serves_ceremony_page(tmp_path, tls_material):
    certfile, keyfile = tls_material
    config = RelyingPartyConfig(rp_id="localhost", rp_name="x", expected_origins=())
    store = CredentialStore(tmp_path / "creds.json")
    tickets = TicketTable()
    server = ChallengeServer(
        config, store, tickets,
        ServerSettings(advertised_host="localhost",
                       tls_certfile=certfile, tls_keyfile=keyfile))
    server.start()
    try:
        assert server.base_url.startswith("https://localhost:")
        assert server.base_url in server.config.expected_origins
        ticket = tickets.issue(TicketPurpose.REGISTRATION, "alice")
        insecure = ssl._create_unverified_context()
        with urllib.request.urlopen(server.url_for(ticket), context=insecure,
                                    timeout=5) as reply:
            assert reply.status == 200
            assert reply.read() == server.manifest["/register.html"][0]
    finally:
        server.shutdown()


def test_broken_tls_material(tmp_path):
    certfile = tmp_path / "cert.pem"
    keyfile = tmp_path / "key.pem"
    certfile.write_text("not a certificate")
    keyfile.write_text("not a key")
    config = RelyingPartyConfig(rp_id="localhost", rp_name="x", expected_origins=())
    server = ChallengeServer(
        config, CredentialStore(tmp_path / "creds.json"), TicketTable(),
        ServerSettings(advertised_host="localhost",
                       tls_certfile=str(certfile), tls_keyfile=str(keyfile)))
    with pytest.raises(ServerError) as info:
        server.start()
    assert info.value.kind == "tls-material-invalid"


def test_missing_tls_files(tmp_path):
    config = RelyingPartyConfig(rp_id="localhost", rp_name="x", expected_origins=())
    server = ChallengeServer(
        config, CredentialStore(tmp_path / "creds.json"), TicketTable(),
        ServerSettings(advertised_host="localhost",
                       tls_certfile=str(tmp_path / "absent.pem"),
                       tls_keyfile=str(tmp_path / "absent.key")))
    with pytest.raises(ServerError) as info:
        server.start()
    assert info.value.kind == "tls-material-invalid"

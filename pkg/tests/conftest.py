import hashlib

import pytest

from pam_passkey.cose import Alg, CoseKey, Curve, KeyType
from pam_passkey.rp import Ceremony, ChallengeRegistry, RelyingPartyConfig
from pam_passkey.store import CredentialRecord


class FakeClock:
    """Deterministic monotonic clock for ttl tests."""

    def __init__(self, start: float = 1000.0):
        self.now = start

    def __call__(self) -> float:
        return self.now

    def advance(self, seconds: float) -> None:
        self.now += seconds


@pytest.fixture
def clock():
    return FakeClock()


@pytest.fixture
def rp_config():
    return RelyingPartyConfig(
        rp_id="host.example",
        rp_name="Example Host",
        expected_origins=("https://host.example", "https://login.host.example"),
    )


class ChallengeFactory:
    """Wraps a ChallengeRegistry with an always-live fake session."""

    def __init__(self, clock: FakeClock):
        self.live: set[bytes] = set()
        self.registry = ChallengeRegistry(self.live.__contains__, clock=clock)
        self._counter = 0

    def make(self, config, ceremony=Ceremony.REGISTRATION):
        self._counter += 1
        session = hashlib.sha256(str(self._counter).encode()).digest()[:16]
        self.live.add(session)
        return self.registry.generate_challenge(ceremony, session, config)


@pytest.fixture
def challenges(clock):
    return ChallengeFactory(clock)


@pytest.fixture
def registration_options(rp_config):
    def build(challenge, user="alice"):
        return {
            "rp": {"id": rp_config.rp_id, "name": rp_config.rp_name},
            "user": {"id": "YWxpY2U", "name": user, "displayName": user},
            "challenge": challenge,
            "pubKeyCredParams": [{"type": "public-key", "alg": int(Alg.ES256)}],
            "attestation": "none",
        }

    return build


@pytest.fixture
def make_record():
    def build(credential_id=b"\xaa" * 16, user="alice", sign_count=0,
              rp_id="host.example", revoked=False):
        key = CoseKey(KeyType.EC2, Alg.ES256, Curve.P256,
                      x=credential_id.ljust(32, b"\x00"), y=bytes(32))
        return CredentialRecord(
            credential_id=credential_id, user=user, public_key=key,
            sign_count=sign_count, rp_id=rp_id, created_at=1700000000,
            revoked=revoked,
        )

    return build


@pytest.fixture
def assertion_options(rp_config):
    def build(challenge, credential_ids):
        return {
            "rpId": rp_config.rp_id,
            "challenge": challenge,
            "allowCredentials": [
                {"type": "public-key", "id": cid} for cid in credential_ids
            ],
            "userVerification": "required",
        }

    return build

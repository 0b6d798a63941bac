"""Relying-party configuration and the pending-challenge set.

One web ceremony gets exactly one 32-byte challenge, bound to one session
ticket. The registry is the shared mutable structure the challenge server's
request threads race on, so every transition is atomic check-and-consume.
"""

from __future__ import annotations

import enum
import re
import secrets
import threading
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional
from urllib.parse import urlsplit

from .cose import Alg
from .errors import ChallengeError, VerificationError

CHALLENGE_BYTES = 32
DEFAULT_CHALLENGE_TTL = 120.0

_RP_ID_PATTERN = re.compile(r"^[a-z0-9]([a-z0-9-]*[a-z0-9])?(\.[a-z0-9]([a-z0-9-]*[a-z0-9])?)*$")


class Ceremony(enum.Enum):
    REGISTRATION = "registration"
    AUTHENTICATION = "authentication"


def origin_host(origin: str) -> str:
    """Host component of an origin string; raises ValueError when unparseable."""
    parts = urlsplit(origin)
    if parts.scheme not in ("http", "https") or not parts.hostname:
        raise ValueError(f"{origin!r} is not a scheme://host[:port] origin")
    if parts.path or parts.query or parts.fragment:
        raise ValueError(f"{origin!r} must not carry a path")
    return parts.hostname


@dataclass(frozen=True)
class RelyingPartyConfig:
    rp_id: str
    rp_name: str
    expected_origins: tuple[str, ...]
    require_user_verification: bool = True
    allowed_algorithms: tuple[Alg, ...] = (Alg.ES256, Alg.EDDSA, Alg.RS256)
    challenge_ttl: float = DEFAULT_CHALLENGE_TTL

    def __post_init__(self):
        if not _RP_ID_PATTERN.match(self.rp_id):
            raise ValueError(f"rp_id {self.rp_id!r} must be a bare lowercase hostname")
        if not self.allowed_algorithms:
            raise ValueError("allowed_algorithms must not be empty")
        for origin in self.expected_origins:
            host = origin_host(origin)
            if host != self.rp_id and not host.endswith("." + self.rp_id):
                raise ValueError(f"origin {origin!r} is not under rp_id {self.rp_id!r}")
        if self.challenge_ttl <= 0:
            raise ValueError("challenge_ttl must be positive")

    def with_origin(self, origin: str) -> "RelyingPartyConfig":
        """Copy of this config whose origin set includes origin (appended last)."""
        if origin in self.expected_origins:
            return self
        return replace(self, expected_origins=self.expected_origins + (origin,))


@dataclass
class Challenge:
    value: bytes
    issued_at: float
    ttl: float
    ceremony: Ceremony
    bound_session: bytes
    consumed: bool = False
    clock: Callable[[], float] = field(default=time.monotonic, repr=False, compare=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def expired(self, now: Optional[float] = None) -> bool:
        now = self.clock() if now is None else now
        return now > self.issued_at + self.ttl

    def check_usable(self) -> None:
        """Fast-fail entry check; does not consume."""
        if self.consumed:
            raise VerificationError("challenge-reused", "challenge already consumed")
        if self.expired():
            raise VerificationError("challenge-expired", "challenge ttl elapsed")

    def consume(self) -> None:
        """Atomic false->true transition; at most one caller ever succeeds."""
        with self._lock:
            if self.consumed:
                raise VerificationError("challenge-reused", "challenge already consumed")
            if self.expired():
                raise VerificationError("challenge-expired", "challenge ttl elapsed")
            self.consumed = True


class ChallengeRegistry:
    """Pending challenges keyed by session-ticket id; one live challenge per
    session. Liveness of the session itself is delegated to the ticket owner
    via the injected probe."""

    def __init__(self, session_live: Callable[[bytes], bool],
                 clock: Callable[[], float] = time.monotonic):
        self._session_live = session_live
        self._clock = clock
        self._pending: dict[bytes, Challenge] = {}
        self._lock = threading.Lock()

    def generate_challenge(self, ceremony: Ceremony, session: bytes,
                           config: RelyingPartyConfig) -> Challenge:
        with self._lock:
            if not self._session_live(session):
                raise ChallengeError("session-unknown", "no live session ticket for challenge")
            existing = self._pending.get(session)
            if existing is not None and not existing.consumed and not existing.expired():
                raise ChallengeError(
                    "session-already-has-pending-challenge",
                    "one ceremony at a time per session",
                )
            challenge = Challenge(
                value=secrets.token_bytes(CHALLENGE_BYTES),
                issued_at=self._clock(),
                ttl=config.challenge_ttl,
                ceremony=ceremony,
                bound_session=session,
                clock=self._clock,
            )
            self._pending[session] = challenge
            return challenge

    def pending_for(self, session: bytes) -> Optional[Challenge]:
        with self._lock:
            return self._pending.get(session)

    def drop_session(self, session: bytes) -> None:
        with self._lock:
            self._pending.pop(session, None)

    def drop_all(self) -> None:
        with self._lock:
            self._pending.clear()

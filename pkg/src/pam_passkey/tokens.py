"""One-time URL tokens binding a web session to a registration grant or a
live login attempt. 16 random bytes per ticket: unguessable at network scale,
short enough that the URL fits cleanly in a terminal."""

from __future__ import annotations

import enum
import secrets
import threading
import time
from dataclasses import dataclass
from typing import Callable, Optional

from . import b64url
from .errors import TicketError

TICKET_BYTES = 16
REGISTRATION_TTL = 600.0  # link handed out out-of-band during onboarding
AUTHENTICATION_TTL = 120.0


class TicketPurpose(enum.Enum):
    REGISTRATION = "registration"
    AUTHENTICATION = "authentication"

    @property
    def url_prefix(self) -> str:
        return "/r/" if self is TicketPurpose.REGISTRATION else "/a/"


@dataclass
class SessionTicket:
    id: bytes
    purpose: TicketPurpose
    user: str
    issued_at: float
    ttl: float
    redeemed: bool = False

    @property
    def token(self) -> str:
        return b64url.encode(self.id)

    @property
    def url_path(self) -> str:
        return self.purpose.url_prefix + self.token

    def expired(self, now: float) -> bool:
        return now > self.issued_at + self.ttl


class TicketTable:
    """Live tickets for one process; serialized check-and-set, so concurrent
    redemption attempts have exactly one winner."""

    def __init__(self, clock: Callable[[], float] = time.monotonic):
        self._clock = clock
        self._tickets: dict[bytes, SessionTicket] = {}
        self._lock = threading.Lock()

    def issue(self, purpose: TicketPurpose, user: str, ttl: Optional[float] = None) -> SessionTicket:
        if not user:
            raise ValueError("user must be nonempty")
        if ttl is None:
            ttl = REGISTRATION_TTL if purpose is TicketPurpose.REGISTRATION else AUTHENTICATION_TTL
        ticket = SessionTicket(
            id=secrets.token_bytes(TICKET_BYTES),
            purpose=purpose,
            user=user,
            issued_at=self._clock(),
            ttl=ttl,
        )
        with self._lock:
            self._tickets[ticket.id] = ticket
        return ticket

    def redeem(self, ticket_id: bytes, expected_purpose: TicketPurpose) -> SessionTicket:
        with self._lock:
            ticket = self._tickets.get(ticket_id)
            if ticket is None:
                raise TicketError("unknown-ticket", "no such ticket")
            if ticket.expired(self._clock()):
                raise TicketError("expired", "ticket ttl elapsed")
            if ticket.redeemed:
                raise TicketError("already-redeemed", "one-time ticket was already used")
            if ticket.purpose is not expected_purpose:
                raise TicketError("purpose-mismatch",
                                  f"ticket is for {ticket.purpose.value}")
            ticket.redeemed = True
            return ticket

    def get(self, ticket_id: bytes) -> Optional[SessionTicket]:
        with self._lock:
            return self._tickets.get(ticket_id)

    def find_by_token(self, token: str) -> Optional[SessionTicket]:
        try:
            ticket_id = b64url.decode(token)
        except Exception:
            return None
        return self.get(ticket_id)

    def is_live(self, ticket_id: bytes) -> bool:
        with self._lock:
            ticket = self._tickets.get(ticket_id)
            return (ticket is not None and not ticket.redeemed
                    and not ticket.expired(self._clock()))

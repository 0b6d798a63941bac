"""Ephemeral challenge webserver.

One instance serves one authentication attempt (the per-login lifecycle), or
runs standalone to serve admin-issued registration links. Endpoints:

    GET  /r/<token>, /a/<token>      ceremony page
    POST /api/reg/options            {"token": ...} -> creation options
    POST /api/reg/verify             {"token": ..., "response": {...}}
    POST /api/auth/options           {"token": ...} -> request options
    POST /api/auth/verify            {"token": ..., "response": {...}}
    GET  <anything else>             embedded asset or 404

The token always travels in the JSON body, never a cookie. Binary fields are
base64url without padding. Failures return the machine-readable error kind.
"""

from __future__ import annotations

import json
import logging
import re
import ssl
import threading
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Callable, Optional

from . import assets, b64url
from .errors import (
    ChallengeError,
    EncodingError,
    PasskeyError,
    ServerError,
    StoreError,
    TicketError,
    VerificationError,
)
from .outcome import PamVerdict, VerdictChannel, VerdictKind
from .rp import Ceremony, ChallengeRegistry, RelyingPartyConfig
from .store import CredentialStore
from .tokens import SessionTicket, TicketPurpose, TicketTable
from .verify import AssertionResponse, RegistrationResponse, verify_assertion, verify_registration

log = logging.getLogger(__name__)

_TICKET_PAGE = re.compile(r"^/(r|a)/([A-Za-z0-9_-]+)$")

DEFAULT_RETRY_BUDGET = 3
MAX_BODY_BYTES = 1 << 20  # ceremony documents are a few KB; anything bigger is abuse


@dataclass(frozen=True)
class ServerSettings:
    bind_host: str = "127.0.0.1"
    bind_port: int = 0  # 0 = ephemeral
    advertised_host: Optional[str] = None  # host shown in URLs; bind host if unset
    tls_certfile: Optional[str] = None
    tls_keyfile: Optional[str] = None
    register_bound_origin: bool = True  # add the actual origin to the accepted set
    retry_budget: int = DEFAULT_RETRY_BUDGET


@dataclass
class _TicketState:
    failed_attempts: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock)


class _HttpServer(ThreadingHTTPServer):
    daemon_threads = True
    app: "ChallengeServer"


class ChallengeServer:
    """Serves the ceremony endpoints and bridges the outcome to the waiting
    login via a single-slot verdict channel."""

    def __init__(self, config: RelyingPartyConfig, store: CredentialStore,
                 tickets: TicketTable, settings: ServerSettings = ServerSettings(),
                 outcome: Optional[VerdictChannel] = None,
                 clock: Callable[[], float] = time.monotonic):
        self.settings = settings
        self.store = store
        self.tickets = tickets
        self.outcome = outcome
        self._clock = clock
        self.challenges = ChallengeRegistry(tickets.is_live, clock=clock)
        self.manifest = assets.load_manifest()
        self._config = config
        self._states: dict[bytes, _TicketState] = {}
        self._states_lock = threading.Lock()
        self._httpd: Optional[_HttpServer] = None
        self._thread: Optional[threading.Thread] = None
        self._shutdown_lock = threading.Lock()
        self._down = False
        self.base_url: str = ""

    # -- lifecycle -----------------------------------------------------------

    @classmethod
    def for_ticket(cls, config: RelyingPartyConfig, ticket: SessionTicket,
                   outcome: Optional[VerdictChannel], *, store: CredentialStore,
                   tickets: TicketTable,
                   settings: ServerSettings = ServerSettings()) -> "ChallengeServer":
        """One server per attempt: the table already owns the ticket."""
        assert tickets.get(ticket.id) is ticket
        server = cls(config, store, tickets, settings, outcome)
        server.start()
        return server

    @property
    def config(self) -> RelyingPartyConfig:
        return self._config

    def start(self) -> None:
        settings = self.settings
        try:
            self._httpd = _HttpServer((settings.bind_host, settings.bind_port), _Handler)
        except OSError as exc:
            raise ServerError("bind-failure", f"{settings.bind_host}:{settings.bind_port}: {exc}")
        self._httpd.app = self

        scheme = "http"
        if settings.tls_certfile:
            try:
                context = ssl.SSLContext(ssl.PROTOCOL_TLS_SERVER)
                context.load_cert_chain(settings.tls_certfile, settings.tls_keyfile)
            except (ssl.SSLError, OSError) as exc:
                self._httpd.server_close()
                raise ServerError("tls-material-invalid", str(exc))
            self._httpd.socket = context.wrap_socket(self._httpd.socket, server_side=True)
            scheme = "https"

        host = settings.advertised_host or settings.bind_host
        port = self._httpd.server_address[1]
        self.base_url = f"{scheme}://{host}:{port}"
        if settings.register_bound_origin:
            try:
                self._config = self._config.with_origin(self.base_url)
            except ValueError as exc:
                self._httpd.server_close()
                raise ServerError("bind-failure", str(exc))
        if self.base_url not in self._config.expected_origins:
            self._httpd.server_close()
            raise ServerError("bind-failure",
                              f"{self.base_url} is not an expected origin")

        self._thread = threading.Thread(
            target=lambda: self._httpd.serve_forever(poll_interval=0.05),
            name="challenge-server", daemon=True)
        self._thread.start()
        log.info("challenge server listening at %s", self.base_url)

    def url_for(self, ticket: SessionTicket) -> str:
        return self.base_url + ticket.url_path

    def shutdown(self) -> None:
        """Close the socket, drop pending challenges, deliver Timeout if no
        verdict landed. Safe to call any number of times."""
        with self._shutdown_lock:
            if self._down:
                return
            self._down = True
        if self._httpd is not None:
            self._httpd.shutdown()
            self._httpd.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)
        self.challenges.drop_all()
        if self.outcome is not None and self.outcome.peek() is None:
            # a verdict landing in this window is handled by put(): first wins
            self.outcome.put(PamVerdict(VerdictKind.TIMEOUT,
                                        "server shut down before a verdict"))
        log.info("challenge server at %s shut down", self.base_url)

    # -- per-ticket bookkeeping ------------------------------------------------

    def _state_for(self, ticket_id: bytes) -> _TicketState:
        with self._states_lock:
            return self._states.setdefault(ticket_id, _TicketState())

    def _live_ticket(self, token: str, purpose: TicketPurpose) -> SessionTicket:
        ticket = self.tickets.find_by_token(token)
        if ticket is None or ticket.purpose is not purpose:
            raise TicketError("unknown-ticket", "no such token")
        if ticket.redeemed:
            raise TicketError("already-redeemed", "one-time link already used")
        if ticket.expired(self._clock()):
            raise TicketError("expired", "link ttl elapsed")
        return ticket

    def _exhaust(self, ticket: SessionTicket, kind: str) -> None:
        """Retry budget spent: kill the ticket and report failure once."""
        try:
            self.tickets.redeem(ticket.id, ticket.purpose)
        except TicketError:
            pass
        self.challenges.drop_session(ticket.id)
        if self.outcome is not None and ticket.purpose is TicketPurpose.AUTHENTICATION:
            self.outcome.put(PamVerdict(VerdictKind.AUTH_ERROR,
                                        f"retry budget exhausted: {kind}"))

    # -- endpoint logic ----------------------------------------------------------

    def handle_options_request(self, token: str, ceremony: Ceremony) -> dict:
        purpose = (TicketPurpose.REGISTRATION if ceremony is Ceremony.REGISTRATION
                   else TicketPurpose.AUTHENTICATION)
        ticket = self._live_ticket(token, purpose)
        challenge = self.challenges.generate_challenge(ceremony, ticket.id, self._config)
        config = self._config
        if ceremony is Ceremony.REGISTRATION:
            return {
                "rp": {"id": config.rp_id, "name": config.rp_name},
                "user": {
                    "id": b64url.encode(ticket.user.encode("utf-8")),
                    "name": ticket.user,
                    "displayName": ticket.user,
                },
                "challenge": b64url.encode(challenge.value),
                "pubKeyCredParams": [
                    {"type": "public-key", "alg": int(alg)}
                    for alg in config.allowed_algorithms
                ],
                "timeout": int(config.challenge_ttl * 1000),
                "attestation": "none",
                "authenticatorSelection": {
                    "userVerification": "required" if config.require_user_verification
                    else "preferred",
                },
            }
        credentials = [r for r in self.store.lookup_by_user(ticket.user)
                       if r.rp_id == config.rp_id]
        return {
            "rpId": config.rp_id,
            "challenge": b64url.encode(challenge.value),
            "allowCredentials": [
                {"type": "public-key", "id": b64url.encode(r.credential_id)}
                for r in credentials
            ],
            "timeout": int(config.challenge_ttl * 1000),
            "userVerification": "required" if config.require_user_verification
            else "preferred",
        }

    def handle_verify_request(self, token: str, ceremony: Ceremony,
                              document: dict) -> tuple[int, dict]:
        purpose = (TicketPurpose.REGISTRATION if ceremony is Ceremony.REGISTRATION
                   else TicketPurpose.AUTHENTICATION)
        ticket = self._live_ticket(token, purpose)
        pending = self.challenges.pending_for(ticket.id)
        if pending is None:
            raise VerificationError("no-pending-challenge",
                                    "call the options endpoint first")
        try:
            if ceremony is Ceremony.REGISTRATION:
                record = verify_registration(
                    RegistrationResponse.from_document(document), pending,
                    self._config, user=ticket.user)
                self.store.add(record)
                status, body = 201, {"status": "registered"}
            else:
                response = AssertionResponse.from_document(document)
                stored = next(
                    (r for r in self.store.lookup_by_user(ticket.user)
                     if r.rp_id == self._config.rp_id
                     and r.credential_id == response.credential_id),
                    None)
                if stored is None:
                    raise VerificationError("credential-id-mismatch",
                                            "no matching credential for this user")
                new_count = verify_assertion(response, pending, stored, self._config)
                if new_count > stored.sign_count:
                    self.store.update_sign_count(stored.credential_id, new_count)
                status, body = 200, {"status": "authenticated"}
        except (VerificationError, StoreError) as exc:
            if isinstance(exc, StoreError) and exc.kind == "persistence-failure":
                raise
            state = self._state_for(ticket.id)
            with state.lock:
                state.failed_attempts += 1
                retries_left = self.settings.retry_budget - state.failed_attempts
            if retries_left <= 0:
                self._exhaust(ticket, exc.kind)
                retries_left = 0
            log.info("verify failed for %s: %s (%d retries left)",
                     ticket.user, exc.kind, retries_left)
            return 403, {"error": exc.kind, "retries_left": retries_left}

        # success: consume the one-time link, then report
        try:
            self.tickets.redeem(ticket.id, purpose)
        except TicketError:
            pass
        self.challenges.drop_session(ticket.id)
        if ceremony is Ceremony.AUTHENTICATION and self.outcome is not None:
            self.outcome.put(PamVerdict(VerdictKind.SUCCESS, f"user {ticket.user}"))
        return status, body

    def serve_static(self, path: str) -> Optional[tuple[bytes, str]]:
        if ".." in path or "//" in path:
            return None
        return self.manifest.get(path)

    def page_for(self, token: str, ceremony: Ceremony) -> tuple[bytes, str]:
        purpose = (TicketPurpose.REGISTRATION if ceremony is Ceremony.REGISTRATION
                   else TicketPurpose.AUTHENTICATION)
        self._live_ticket(token, purpose)
        name = (assets.REGISTRATION_PAGE if ceremony is Ceremony.REGISTRATION
                else assets.AUTHENTICATION_PAGE)
        return self.manifest[name]


_STATUS_BY_KIND = {
    "unknown-ticket": 404,
    "expired": 410,
    "already-redeemed": 410,
    "session-already-has-pending-challenge": 409,
    "session-unknown": 410,
    "persistence-failure": 500,
}


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server: _HttpServer

    @property
    def app(self) -> ChallengeServer:
        return self.server.app

    def log_message(self, format, *args):  # noqa: A002 - base class signature
        log.debug("%s - %s", self.address_string(), format % args)

    def _reply(self, status: int, body: bytes, content_type: str) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Cache-Control", "no-store")
        self.end_headers()
        self.wfile.write(body)

    def _reply_json(self, status: int, payload: dict) -> None:
        self._reply(status, json.dumps(payload).encode("utf-8"), "application/json")

    def _reply_error(self, exc: PasskeyError) -> None:
        status = _STATUS_BY_KIND.get(exc.kind)
        if status is None:
            if isinstance(exc, EncodingError):
                status = 400
            elif isinstance(exc, VerificationError):
                status = 403
            elif isinstance(exc, ChallengeError):
                status = 409
            else:
                status = 500
        self._reply_json(status, {"error": exc.kind})

    def do_GET(self):  # noqa: N802 - http.server contract
        match = _TICKET_PAGE.match(self.path)
        try:
            if match:
                ceremony = (Ceremony.REGISTRATION if match.group(1) == "r"
                            else Ceremony.AUTHENTICATION)
                body, content_type = self.app.page_for(match.group(2), ceremony)
                self._reply(200, body, content_type)
                return
            asset = self.app.serve_static(self.path)
            if asset is None:
                self._reply_json(404, {"error": "not-found"})
                return
            self._reply(200, asset[0], asset[1])
        except PasskeyError as exc:
            self._reply_error(exc)

    def do_POST(self):  # noqa: N802 - http.server contract
        routes = {
            "/api/reg/options": (Ceremony.REGISTRATION, "options"),
            "/api/reg/verify": (Ceremony.REGISTRATION, "verify"),
            "/api/auth/options": (Ceremony.AUTHENTICATION, "options"),
            "/api/auth/verify": (Ceremony.AUTHENTICATION, "verify"),
        }
        route = routes.get(self.path)
        if route is None:
            self._reply_json(404, {"error": "not-found"})
            return
        ceremony, action = route

        try:
            length = int(self.headers.get("Content-Length", "0"))
            if length > MAX_BODY_BYTES:
                self._reply_json(413, {"error": "malformed-document"})
                return
            raw = self.rfile.read(length) if length else b""
            body = json.loads(raw.decode("utf-8"))
            if not isinstance(body, dict) or not isinstance(body.get("token"), str):
                raise ValueError("body must be an object with a token")
        except (ValueError, UnicodeDecodeError):
            self._reply_json(400, {"error": "malformed-document"})
            return

        try:
            if action == "options":
                payload = self.app.handle_options_request(body["token"], ceremony)
                self._reply_json(200, payload)
            else:
                document = body.get("response")
                if not isinstance(document, dict):
                    self._reply_json(400, {"error": "malformed-document"})
                    return
                status, payload = self.app.handle_verify_request(
                    body["token"], ceremony, document)
                self._reply_json(status, payload)
        except PasskeyError as exc:
            self._reply_error(exc)
        except Exception:
            log.exception("unhandled error in %s %s", action, ceremony.value)
            self._reply_json(500, {"error": "internal-error"})

"""Host authentication-module bridge.

authenticate() is the module contract: issue a one-time ticket for the user,
start a challenge server, push the URL to the client through the
conversation's informational channel, block until the ceremony verdict or
the deadline, tear the server down, and return the verdict. Timeout is
reported as its own kind; the PAM shim maps it to an authentication error.
"""

from __future__ import annotations

import logging
import re
import threading
from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol

from .errors import ServerError
from .outcome import PamVerdict, VerdictChannel, VerdictKind
from .rp import RelyingPartyConfig
from .server import ChallengeServer, ServerSettings
from .store import CredentialStore
from .tokens import TicketPurpose, TicketTable

log = logging.getLogger(__name__)

INFO_MESSAGE_FORMAT = "Authenticate at: {url}\n"
DEFAULT_AUTH_TIMEOUT = 90.0


class Conversation(Protocol):
    """The message channel a host module uses to reach the logging-in user."""

    def info(self, message: str) -> None: ...


@dataclass(frozen=True)
class BridgeConfig:
    auth_timeout: float = DEFAULT_AUTH_TIMEOUT
    fallback_allowed: bool = False
    server: ServerSettings = ServerSettings()

    def __post_init__(self):
        if self.auth_timeout <= 0:
            raise ValueError("auth_timeout must be positive")


class PamBridge:
    """One bridge per host configuration; each authenticate call owns its own
    ticket table, challenge server, and verdict channel, so concurrent logins
    never share ceremony state."""

    def __init__(self, rp_config: RelyingPartyConfig, store: CredentialStore,
                 config: BridgeConfig = BridgeConfig()):
        self.rp_config = rp_config
        self.store = store
        self.config = config

    def authenticate(self, user: str, conversation: Conversation) -> PamVerdict:
        tickets = TicketTable()
        ticket = tickets.issue(TicketPurpose.AUTHENTICATION, user,
                               ttl=self.config.auth_timeout)
        channel = VerdictChannel()
        try:
            server = ChallengeServer.for_ticket(
                self.rp_config, ticket, channel,
                store=self.store, tickets=tickets, settings=self.config.server)
        except ServerError as exc:
            log.error("challenge server failed to start: %s", exc)
            return PamVerdict(VerdictKind.AUTH_ERROR, "server-start-failure")

        try:
            try:
                conversation.info(INFO_MESSAGE_FORMAT.format(url=server.url_for(ticket)))
            except Exception as exc:  # the daemon side hung up on us
                log.error("conversation unavailable: %s", exc)
                return PamVerdict(VerdictKind.AUTH_ERROR, "conversation-unavailable")
            channel.wait(self.config.auth_timeout)
        finally:
            server.shutdown()  # delivers Timeout when nothing landed

        verdict = channel.peek()
        assert verdict is not None
        if verdict.kind is VerdictKind.TIMEOUT:
            log.info("authentication for %s timed out after %.1fs",
                     user, self.config.auth_timeout)
        else:
            log.info("authentication for %s: %s", user, verdict.kind.value)
        return verdict


# -- conversation simulator ----------------------------------------------------

Script = Callable[[str], None]

URL_PATTERN = re.compile(r"https?://[^\s]+")


def extract_url(message: str) -> str:
    match = URL_PATTERN.search(message)
    if match is None:
        raise ValueError(f"no URL in message: {message!r}")
    return match.group(0)


@dataclass(frozen=True)
class TranscriptEntry:
    kind: str  # "info" | "script-abort" | "verdict"
    text: str


@dataclass
class Transcript:
    entries: list[TranscriptEntry] = field(default_factory=list)

    @property
    def verdict(self) -> Optional[PamVerdict]:
        for entry in reversed(self.entries):
            if entry.kind == "verdict":
                kind = VerdictKind(entry.text.split(":", 1)[0])
                return PamVerdict(kind, entry.text.split(":", 1)[1])
        return None

    @property
    def messages(self) -> list[str]:
        return [entry.text for entry in self.entries if entry.kind == "info"]

    @property
    def aborts(self) -> list[str]:
        return [entry.text for entry in self.entries if entry.kind == "script-abort"]


class SimulatedConversation:
    """Stands in for the daemon+client side: records every informational
    message and reacts to it by running the script in a worker thread."""

    def __init__(self, script: Script):
        self._script = script
        self._threads: list[threading.Thread] = []
        self._lock = threading.Lock()
        self.entries: list[TranscriptEntry] = []

    def _record(self, kind: str, text: str) -> None:
        with self._lock:
            self.entries.append(TranscriptEntry(kind, text))

    def info(self, message: str) -> None:
        self._record("info", message)

        def react():
            try:
                self._script(message)
            except Exception as exc:  # noqa: BLE001 - scripted aborts land here
                self._record("script-abort", f"{type(exc).__name__}: {exc}")

        thread = threading.Thread(target=react, name="conversation-script", daemon=True)
        self._threads.append(thread)
        thread.start()

    def join(self, timeout: float = 10.0) -> None:
        for thread in self._threads:
            thread.join(timeout)


def simulate_conversation(bridge: PamBridge, user: str, script: Script) -> Transcript:
    """Run one authenticate call against a scripted client; returns the
    ordered transcript ending with the verdict."""
    conversation = SimulatedConversation(script)
    verdict = bridge.authenticate(user, conversation)
    conversation.join()
    transcript = Transcript(entries=list(conversation.entries))
    transcript.entries.append(
        TranscriptEntry("verdict", f"{verdict.kind.value}:{verdict.detail}"))
    return transcript

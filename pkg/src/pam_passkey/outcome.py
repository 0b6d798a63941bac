"""The single-slot conduit carrying one authentication attempt's verdict from
the challenge server back to the blocked login. First write wins; later
writes are logged and dropped, so exactly one verdict is ever delivered."""

from __future__ import annotations

import enum
import logging
import threading
from dataclasses import dataclass
from typing import Optional

log = logging.getLogger(__name__)


class VerdictKind(enum.Enum):
    SUCCESS = "success"
    AUTH_ERROR = "auth-error"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class PamVerdict:
    kind: VerdictKind
    detail: str = ""


class VerdictChannel:
    def __init__(self):
        self._event = threading.Event()
        self._lock = threading.Lock()
        self._verdict: Optional[PamVerdict] = None

    def put(self, verdict: PamVerdict) -> bool:
        """Deliver a verdict; returns False (and logs) when one already landed."""
        with self._lock:
            if self._verdict is not None:
                log.warning("verdict %s dropped; %s already delivered",
                            verdict.kind.value, self._verdict.kind.value)
                return False
            self._verdict = verdict
        self._event.set()
        return True

    def wait(self, timeout: Optional[float]) -> Optional[PamVerdict]:
        if self._event.wait(timeout):
            return self._verdict
        return None

    def peek(self) -> Optional[PamVerdict]:
        with self._lock:
            return self._verdict

"""Drives the challenge server's HTTP surface with a virtual authenticator,
standing in for the browser+platform pair during tests and self-checks."""

from __future__ import annotations

import json
import re
import urllib.error
import urllib.request
from dataclasses import dataclass
from typing import Any, Callable, Optional

from .authenticator import VirtualAuthenticator

Hook = Callable[[dict[str, Any]], dict[str, Any]]


@dataclass
class CeremonyOutcome:
    status: int
    body: dict[str, Any]

    @property
    def ok(self) -> bool:
        return self.status in (200, 201)


def _post_json(url: str, payload: dict[str, Any], timeout: float) -> CeremonyOutcome:
    request = urllib.request.Request(
        url,
        data=json.dumps(payload).encode("utf-8"),
        headers={"Content-Type": "application/json"},
        method="POST",
    )
    try:
        with urllib.request.urlopen(request, timeout=timeout) as reply:
            return CeremonyOutcome(reply.status, json.loads(reply.read().decode("utf-8")))
    except urllib.error.HTTPError as exc:
        try:
            body = json.loads(exc.read().decode("utf-8"))
        except (ValueError, UnicodeDecodeError):
            body = {}
        return CeremonyOutcome(exc.code, body)


def fetch_page(url: str, timeout: float = 5.0) -> tuple[int, bytes]:
    try:
        with urllib.request.urlopen(url, timeout=timeout) as reply:
            return reply.status, reply.read()
    except urllib.error.HTTPError as exc:
        return exc.code, exc.read()


def split_ticket_url(url: str) -> tuple[str, str, str]:
    """base url, ceremony path kind ('r' or 'a'), token."""
    match = re.match(r"^(https?://[^/]+)/(r|a)/([A-Za-z0-9_-]+)$", url)
    if not match:
        raise ValueError(f"not a ceremony URL: {url!r}")
    return match.group(1), match.group(2), match.group(3)


def complete_registration(url: str, authenticator: VirtualAuthenticator, *,
                          origin: Optional[str] = None,
                          mutate_response: Optional[Hook] = None,
                          fetch_page_first: bool = True,
                          timeout: float = 5.0) -> CeremonyOutcome:
    """GET the page, fetch options, create the credential, POST it back."""
    base, kind, token = split_ticket_url(url)
    if kind != "r":
        raise ValueError("not a registration URL")
    if fetch_page_first:
        status, _ = fetch_page(url, timeout)
        if status != 200:
            return CeremonyOutcome(status, {"error": "page-unavailable"})
    options = _post_json(base + "/api/reg/options", {"token": token}, timeout)
    if options.status != 200:
        return options
    document = authenticator.make_credential(options.body, origin=origin or base)
    if mutate_response is not None:
        document = mutate_response(document)
    return _post_json(base + "/api/reg/verify",
                      {"token": token, "response": document}, timeout)


def complete_authentication(url: str, authenticator: VirtualAuthenticator, *,
                            origin: Optional[str] = None,
                            mutate_response: Optional[Hook] = None,
                            fetch_page_first: bool = True,
                            timeout: float = 5.0) -> CeremonyOutcome:
    base, kind, token = split_ticket_url(url)
    if kind != "a":
        raise ValueError("not an authentication URL")
    if fetch_page_first:
        status, _ = fetch_page(url, timeout)
        if status != 200:
            return CeremonyOutcome(status, {"error": "page-unavailable"})
    options = _post_json(base + "/api/auth/options", {"token": token}, timeout)
    if options.status != 200:
        return options
    document = authenticator.get_assertion(options.body, origin=origin or base)
    if mutate_response is not None:
        document = mutate_response(document)
    return _post_json(base + "/api/auth/verify",
                      {"token": token, "response": document}, timeout)

"""Embedded frontend bundle. The manifest maps URL paths to exact bytes; the
server serves nothing that is not in it, and served bytes must equal manifest
bytes bit for bit."""

from __future__ import annotations

from importlib import resources

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "application/javascript",
    ".css": "text/css",
    ".json": "application/json",
}

REGISTRATION_PAGE = "/register.html"
AUTHENTICATION_PAGE = "/authenticate.html"


def _content_type(name: str) -> str:
    for suffix, ctype in _CONTENT_TYPES.items():
        if name.endswith(suffix):
            return ctype
    return "application/octet-stream"


def load_manifest() -> dict[str, tuple[bytes, str]]:
    """Read the packaged assets into {url path: (bytes, content type)}."""
    manifest: dict[str, tuple[bytes, str]] = {}
    root = resources.files("pam_passkey").joinpath("assets")
    for entry in root.iterdir():
        if entry.is_file():
            manifest["/" + entry.name] = (entry.read_bytes(), _content_type(entry.name))
    return manifest

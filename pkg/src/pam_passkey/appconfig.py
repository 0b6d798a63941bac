"""Host configuration file: one JSON document holding the relying-party
settings, store location, and server bind options. Path resolution order:
explicit flag, SSH_PASSKEYS_CONFIG, then the packaged default location."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

from .bridge import BridgeConfig
from .cose import Alg
from .rp import DEFAULT_CHALLENGE_TTL, RelyingPartyConfig
from .server import ServerSettings
from .store import CredentialStore
from .tokens import REGISTRATION_TTL

ENV_VAR = "SSH_PASSKEYS_CONFIG"
DEFAULT_CONFIG_PATH = "/etc/pam-passkey/config.json"
DEFAULT_STORE_PATH = "/var/lib/pam-passkey/credentials.json"


@dataclass(frozen=True)
class AppConfig:
    rp: RelyingPartyConfig
    server: ServerSettings
    store_path: Path
    auth_timeout: float = 90.0
    registration_ttl: float = REGISTRATION_TTL
    fallback_allowed: bool = False

    def open_store(self) -> CredentialStore:
        return CredentialStore(self.store_path)

    def bridge_config(self) -> BridgeConfig:
        return BridgeConfig(auth_timeout=self.auth_timeout,
                            fallback_allowed=self.fallback_allowed,
                            server=self.server)


def _parse(doc: dict[str, Any], store_override: Optional[str] = None) -> AppConfig:
    algorithms = tuple(
        Alg.from_label(label)
        for label in doc.get("allowed_algorithms", ["ES256", "EdDSA", "RS256"])
    )
    rp = RelyingPartyConfig(
        rp_id=doc.get("rp_id", "localhost"),
        rp_name=doc.get("rp_name", doc.get("rp_id", "localhost")),
        expected_origins=tuple(doc.get("expected_origins", [])),
        require_user_verification=doc.get("require_user_verification", True),
        allowed_algorithms=algorithms,
        challenge_ttl=doc.get("challenge_ttl", DEFAULT_CHALLENGE_TTL),
    )
    server = ServerSettings(
        bind_host=doc.get("bind_host", "127.0.0.1"),
        bind_port=doc.get("bind_port", 0),
        # URLs should carry the relying-party hostname, not the bind address
        advertised_host=doc.get("advertised_host") or rp.rp_id,
        tls_certfile=doc.get("tls_certfile"),
        tls_keyfile=doc.get("tls_keyfile"),
    )
    return AppConfig(
        rp=rp,
        server=server,
        store_path=Path(store_override or doc.get("store_path", DEFAULT_STORE_PATH)),
        auth_timeout=doc.get("auth_timeout", 90.0),
        registration_ttl=doc.get("registration_ttl", REGISTRATION_TTL),
        fallback_allowed=doc.get("fallback_allowed", False),
    )


def load(path: Optional[str] = None, *, store_override: Optional[str] = None) -> AppConfig:
    """Load the config file; a missing file yields loopback defaults."""
    resolved = path or os.environ.get(ENV_VAR) or DEFAULT_CONFIG_PATH
    try:
        doc = json.loads(Path(resolved).read_text(encoding="utf-8"))
    except FileNotFoundError:
        doc = {}
    if not isinstance(doc, dict):
        raise ValueError(f"config {resolved} must hold a JSON object")
    return _parse(doc, store_override)

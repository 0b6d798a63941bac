"""Durable user -> passkey mapping.

One JSON document per host: {"version": 1, "records": [...]}, opaque bytes
base64url-unpadded. Writes go through write-temp-then-rename so readers never
see a torn file; a sidecar advisory lock serializes read-modify-write cycles
across processes (each login is its own process). Unknown JSON fields survive
rewrites.
"""

from __future__ import annotations

import fcntl
import json
import os
import re
import tempfile
import threading
import time
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

from . import b64url
from .cose import CoseKey
from .errors import StoreError

STORE_VERSION = 1
_RECORD_FIELDS = ("credential_id", "user", "public_key", "sign_count",
                  "rp_id", "created_at", "label", "revoked")
_USER_PATTERN = re.compile(r"^[^\s/\\]+$")


def is_portable_account_name(user: str) -> bool:
    return bool(_USER_PATTERN.match(user))


@dataclass(frozen=True)
class CredentialRecord:
    credential_id: bytes
    user: str
    public_key: CoseKey
    sign_count: int
    rp_id: str
    created_at: int  # UTC seconds
    label: Optional[str] = None
    revoked: bool = False
    extra: dict[str, Any] = field(default_factory=dict, compare=False)

    def to_json(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "credential_id": b64url.encode(self.credential_id),
            "user": self.user,
            "public_key": self.public_key.to_json(),
            "sign_count": self.sign_count,
            "rp_id": self.rp_id,
            "created_at": self.created_at,
            "revoked": self.revoked,
        }
        if self.label is not None:
            doc["label"] = self.label
        doc.update(self.extra)
        return doc

    @classmethod
    def from_json(cls, doc: dict[str, Any]) -> "CredentialRecord":
        extra = {k: v for k, v in doc.items() if k not in _RECORD_FIELDS}
        return cls(
            credential_id=b64url.decode(doc["credential_id"]),
            user=doc["user"],
            public_key=CoseKey.from_json(doc["public_key"]),
            sign_count=int(doc["sign_count"]),
            rp_id=doc["rp_id"],
            created_at=int(doc["created_at"]),
            label=doc.get("label"),
            revoked=bool(doc.get("revoked", False)),
            extra=extra,
        )


def _atomic_write(path: Path, data: bytes) -> None:
    """Write-temp-fsync-rename; the destination is never partially written."""
    fd, tmp_name = tempfile.mkstemp(dir=str(path.parent), prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


@contextmanager
def _file_lock(lock_path: Path):
    lock_path.parent.mkdir(parents=True, exist_ok=True)
    with open(lock_path, "a+b") as handle:
        fcntl.lockf(handle, fcntl.LOCK_EX)
        try:
            yield
        finally:
            fcntl.lockf(handle, fcntl.LOCK_UN)


class CredentialStore:
    """Credential records for one host, persisted to a single JSON file."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.RLock()
        self._lock_path = self.path.with_name(self.path.name + ".lock")
        self._extra_top: dict[str, Any] = {}

    # -- snapshot I/O ------------------------------------------------------

    def _load(self) -> list[CredentialRecord]:
        """Parse the last durable snapshot; missing file means empty store."""
        try:
            raw = self.path.read_bytes()
        except FileNotFoundError:
            self._extra_top = {}
            return []
        except OSError as exc:
            raise StoreError("persistence-failure", f"cannot read store: {exc}")
        try:
            doc = json.loads(raw.decode("utf-8"))
            if not isinstance(doc, dict):
                raise ValueError("store document must be an object")
            if doc.get("version") != STORE_VERSION:
                raise ValueError(f"unrecognized store version {doc.get('version')!r}")
            records = [CredentialRecord.from_json(r) for r in doc["records"]]
        except (ValueError, KeyError, TypeError) as exc:
            raise StoreError("persistence-failure", f"store file is not parseable: {exc}")
        seen = set()
        for record in records:
            if record.credential_id in seen:
                raise StoreError("persistence-failure", "duplicate credential_id in store file")
            seen.add(record.credential_id)
        self._extra_top = {k: v for k, v in doc.items() if k not in ("version", "records")}
        return records

    def _persist(self, records: list[CredentialRecord]) -> None:
        doc: dict[str, Any] = {"version": STORE_VERSION,
                               "records": [r.to_json() for r in records]}
        doc.update(self._extra_top)
        data = json.dumps(doc, indent=2).encode("utf-8") + b"\n"
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            _atomic_write(self.path, data)
            os.chmod(self.path, 0o600)
        except OSError as exc:
            raise StoreError("persistence-failure", f"cannot write store: {exc}")

    @contextmanager
    def _mutate(self):
        """Exclusive read-modify-write cycle: thread lock, then advisory file
        lock, then a fresh read so concurrent writers merge instead of clobber."""
        with self._lock, _file_lock(self._lock_path):
            yield self._load()

    # -- operations ---------------------------------------------------------

    def add(self, record: CredentialRecord) -> None:
        if not is_portable_account_name(record.user):
            raise StoreError("persistence-failure",
                             f"user {record.user!r} is not a portable account name")
        with self._mutate() as records:
            if any(r.credential_id == record.credential_id for r in records):
                raise StoreError("duplicate-credential-id",
                                 "credential id already registered")
            records.append(record)
            self._persist(records)

    def lookup_by_user(self, user: str) -> list[CredentialRecord]:
        return [r for r in self._load() if r.user == user and not r.revoked]

    def lookup_by_credential_id(self, credential_id: bytes) -> Optional[CredentialRecord]:
        for record in self._load():
            if record.credential_id == credential_id:
                return record
        return None

    def update_sign_count(self, credential_id: bytes, new_count: int) -> None:
        with self._mutate() as records:
            for index, record in enumerate(records):
                if record.credential_id == credential_id:
                    if new_count < record.sign_count:
                        raise StoreError("count-regression",
                                         f"{new_count} < stored {record.sign_count}")
                    records[index] = replace(record, sign_count=new_count)
                    self._persist(records)
                    return
            raise StoreError("unknown-credential", "no record with that credential id")

    def revoke(self, credential_id: bytes) -> None:
        """Mark revoked; the record stays for audit. Idempotent."""
        with self._mutate() as records:
            for index, record in enumerate(records):
                if record.credential_id == credential_id:
                    if not record.revoked:
                        records[index] = replace(record, revoked=True)
                        self._persist(records)
                    return
            raise StoreError("unknown-credential", "no record with that credential id")

    def list_all(self) -> list[CredentialRecord]:
        return list(self._load())


def now_utc_seconds() -> int:
    return int(time.time())

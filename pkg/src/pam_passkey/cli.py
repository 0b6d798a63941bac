"""Operator command line: issue registration links, inspect and revoke
credentials, and self-test the full loop.

Exit codes are a stable contract: 0 success, 1 operational failure, 2 usage
error.
"""

from __future__ import annotations

import argparse
import sys
import time
from typing import Optional

from . import appconfig, b64url
from .errors import PasskeyError
from .selftest import run_selftest
from .server import ChallengeServer
from .store import CredentialStore, is_portable_account_name
from .tokens import TicketPurpose, TicketTable

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pam-passkey",
        description="Manage passkey credentials for host logins.",
    )
    parser.add_argument("--config", help="config file path (or $SSH_PASSKEYS_CONFIG)")
    parser.add_argument("--store", help="credential store path override")
    commands = parser.add_subparsers(dest="command", required=True)

    register = commands.add_parser(
        "register-link", help="issue a one-time registration URL for a user")
    register.add_argument("user")
    register.add_argument("--ttl", type=float, default=None,
                          help="link lifetime in seconds")
    register.add_argument("--print-only", action="store_true",
                          help="print the URL without serving it")

    listing = commands.add_parser("list", help="list registered credentials")
    listing.add_argument("--user", help="only this account")

    revoke = commands.add_parser("revoke", help="revoke a credential by id")
    revoke.add_argument("credential_id", help="base64url credential id")

    selftest = commands.add_parser(
        "selftest", help="run the full registration+login loop against a temporary store")
    selftest.add_argument("--inject-wrong-origin", action="store_true",
                          help=argparse.SUPPRESS)  # failure-path check for the test suite

    return parser


def cmd_register_link(app: appconfig.AppConfig, store: CredentialStore,
                      user: str, ttl: Optional[float], print_only: bool) -> int:
    if not is_portable_account_name(user):
        print(f"error: {user!r} is not a usable account name", file=sys.stderr)
        return EXIT_USAGE
    try:
        store.list_all()  # store must be reachable before we hand out a link
        tickets = TicketTable()
        ticket = tickets.issue(TicketPurpose.REGISTRATION, user,
                               ttl=ttl if ttl is not None else app.registration_ttl)
        server = ChallengeServer(app.rp, store, tickets, app.server)
        server.start()
    except (PasskeyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE

    print(server.url_for(ticket), flush=True)
    if print_only:
        server.shutdown()
        return EXIT_OK

    deadline = time.monotonic() + ticket.ttl
    try:
        while time.monotonic() < deadline:
            current = tickets.get(ticket.id)
            if current is not None and current.redeemed:
                registered = [r for r in store.lookup_by_user(user)
                              if not r.revoked]
                print(f"registered: {len(registered)} credential(s) on file for {user}")
                return EXIT_OK
            time.sleep(0.2)
        print("link expired before registration completed", file=sys.stderr)
        return EXIT_FAILURE
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return EXIT_FAILURE
    except PasskeyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    finally:
        server.shutdown()


def cmd_list(store: CredentialStore, user: Optional[str]) -> int:
    try:
        records = store.list_all()
    except PasskeyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    if user is not None:
        records = [r for r in records if r.user == user]
    print(f"{'CREDENTIAL':<24} {'USER':<16} {'RP':<20} {'COUNT':>6} {'CREATED':>12} FLAGS")
    for record in records:
        token = b64url.encode(record.credential_id)
        flags = "revoked" if record.revoked else ""
        print(f"{token:<24} {record.user:<16} {record.rp_id:<20} "
              f"{record.sign_count:>6} {record.created_at:>12} {flags}")
    return EXIT_OK


def cmd_revoke(store: CredentialStore, credential_token: str) -> int:
    try:
        credential_id = b64url.decode(credential_token)
        store.revoke(credential_id)
    except PasskeyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    print(f"revoked {credential_token}")
    return EXIT_OK


def cmd_selftest(inject_wrong_origin: bool) -> int:
    report = run_selftest(inject_wrong_origin=inject_wrong_origin)
    for line in report.lines():
        print(line)
    return EXIT_OK if report.ok else EXIT_FAILURE


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)

    if args.command == "selftest":
        return cmd_selftest(args.inject_wrong_origin)

    try:
        app = appconfig.load(args.config, store_override=args.store)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    store = app.open_store()

    if args.command == "register-link":
        return cmd_register_link(app, store, args.user, args.ttl, args.print_only)
    if args.command == "list":
        return cmd_list(store, args.user)
    if args.command == "revoke":
        return cmd_revoke(store, args.credential_id)
    parser.error(f"unknown command {args.command}")
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""Thin adapter to the pam_python-style module ABI. Contract mapping only;
all behavior lives in the bridge.

Deployment (documentation, not code): install this module via the host's PAM
Python binding, reference it from /etc/pam.d/sshd, and enable `UsePAM yes`
plus `KbdInteractiveAuthentication yes` in sshd_config so the daemon forwards
informational messages to the client before authentication completes.
"""

from __future__ import annotations

from . import appconfig
from .bridge import PamBridge
from .outcome import VerdictKind


class _PamhConversation:
    def __init__(self, pamh):
        self._pamh = pamh

    def info(self, message: str) -> None:
        self._pamh.conversation(
            self._pamh.Message(self._pamh.PAM_TEXT_INFO, message))


def pam_sm_authenticate(pamh, flags, argv):  # noqa: ARG001 - ABI signature
    config_path = argv[1] if len(argv) > 1 else None
    app = appconfig.load(config_path)
    try:
        user = pamh.get_user(None)
    except pamh.exception:
        return pamh.PAM_AUTH_ERR
    if not user:
        return pamh.PAM_AUTH_ERR

    bridge = PamBridge(app.rp, app.open_store(), app.bridge_config())
    verdict = bridge.authenticate(user, _PamhConversation(pamh))

    if verdict.kind is VerdictKind.SUCCESS:
        return pamh.PAM_SUCCESS
    if verdict.detail == "server-start-failure" and app.fallback_allowed:
        return pamh.PAM_IGNORE  # gracefully degrade to the next stacked module
    return pamh.PAM_AUTH_ERR


def pam_sm_setcred(pamh, flags, argv):  # noqa: ARG001 - ABI signature
    return pamh.PAM_SUCCESS

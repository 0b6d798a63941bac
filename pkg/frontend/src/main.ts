/** Entry point for the bundled page script: binds the ceremony controller to
 * the real DOM, fetch, and the platform credential API. No cryptography
 * happens here; key material exists only inside the platform authenticator. */

import {
  CeremonyController,
  CeremonyViewState,
  ServerReply,
  parseTicketPath,
} from "./ceremony";
import {
  AssertionCredentialLike,
  RegistrationCredentialLike,
} from "./wire";

async function post(path: string, body: unknown): Promise<ServerReply> {
  const reply = await fetch(path, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  });
  let payload: Record<string, unknown> | null = null;
  try {
    payload = (await reply.json()) as Record<string, unknown>;
  } catch {
    payload = null;
  }
  return { status: reply.status, body: payload };
}

function renderer(controller: () => CeremonyController | null) {
  const status = document.getElementById("status")!;
  const detail = document.getElementById("detail")!;
  const retry = document.getElementById("retry") as HTMLButtonElement | null;
  const isRegistration = () => document.body.getAttribute("data-ceremony") === "registration";

  return (state: CeremonyViewState) => {
    document.body.setAttribute("data-phase", state.phase);
    switch (state.phase) {
      case "loading":
        status.textContent = "Contacting server…";
        detail.textContent = "";
        break;
      case "awaiting-user-gesture":
        status.textContent = "Confirm with your passkey";
        detail.textContent = "Your device will prompt for a fingerprint, face, or PIN.";
        break;
      case "verifying":
        status.textContent = "Verifying…";
        detail.textContent = "";
        break;
      case "success":
        status.textContent = "Success";
        detail.textContent = isRegistration()
          ? "Passkey registered. You can close this page."
          : "Authenticated. Return to your terminal to continue.";
        break;
      case "failure":
        status.textContent = "Failed";
        detail.textContent = `Error: ${state.errorKind ?? "unknown"}`;
        if (retry && controller()?.canRetry) {
          retry.hidden = false;
        }
        break;
    }
  };
}

function start(): void {
  const page = parseTicketPath(window.location.pathname);
  let controller: CeremonyController | null = null;
  const render = renderer(() => controller);

  if (!page) {
    render({ phase: "failure", errorKind: "bad-url" });
    return;
  }
  document.body.setAttribute("data-ceremony", page.ceremony);

  controller = new CeremonyController(page.ceremony, page.token, {
    post,
    createCredential: async (options) => {
      const credential = await navigator.credentials.create({
        publicKey: options as unknown as PublicKeyCredentialCreationOptions,
      });
      if (credential === null) throw new Error("no credential");
      return credential as unknown as RegistrationCredentialLike;
    },
    getCredential: async (options) => {
      const credential = await navigator.credentials.get({
        publicKey: options as unknown as PublicKeyCredentialRequestOptions,
      });
      if (credential === null) throw new Error("no credential");
      return credential as unknown as AssertionCredentialLike;
    },
    render,
  });

  const retry = document.getElementById("retry");
  retry?.addEventListener("click", () => {
    (retry as HTMLButtonElement).hidden = true;
    void controller!.run();
  });

  void controller.run();
}

window.addEventListener("DOMContentLoaded", start);

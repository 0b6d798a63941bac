"use strict";
(() => {
  // src/b64url.ts
  var B64URL_SHAPE = /^[A-Za-z0-9_-]*$/;
  function bytesToB64url(buffer) {
    const bytes = new Uint8Array(buffer);
    let binary = "";
    for (let i = 0; i < bytes.length; i++) {
      binary += String.fromCharCode(bytes[i]);
    }
    return btoa(binary).replace(/\+/g, "-").replace(/\//g, "_").replace(/=+$/, "");
  }
  function b64urlToBytes(text) {
    if (!B64URL_SHAPE.test(text)) {
      throw new Error("invalid-character");
    }
    if (text.length % 4 === 1) {
      throw new Error("invalid-length");
    }
    let padded = text.replace(/-/g, "+").replace(/_/g, "/");
    while (padded.length % 4 !== 0) padded += "=";
    const binary = atob(padded);
    const bytes = new Uint8Array(binary.length);
    for (let i = 0; i < binary.length; i++) {
      bytes[i] = binary.charCodeAt(i);
    }
    return bytes.buffer;
  }

  // src/wire.ts
  function decodeCreationOptions(options) {
    return {
      rp: options.rp,
      user: {
        id: b64urlToBytes(options.user.id),
        name: options.user.name,
        displayName: options.user.displayName
      },
      challenge: b64urlToBytes(options.challenge),
      pubKeyCredParams: options.pubKeyCredParams,
      ...options.timeout !== void 0 ? { timeout: options.timeout } : {},
      ...options.attestation !== void 0 ? { attestation: options.attestation } : {},
      ...options.authenticatorSelection !== void 0 ? { authenticatorSelection: options.authenticatorSelection } : {}
    };
  }
  function decodeRequestOptions(options) {
    return {
      rpId: options.rpId,
      challenge: b64urlToBytes(options.challenge),
      allowCredentials: (options.allowCredentials ?? []).map((entry) => ({
        type: entry.type,
        id: b64urlToBytes(entry.id)
      })),
      ...options.timeout !== void 0 ? { timeout: options.timeout } : {},
      ...options.userVerification !== void 0 ? { userVerification: options.userVerification } : {}
    };
  }
  function encodeRegistration(credential) {
    return {
      id: credential.id,
      rawId: bytesToB64url(credential.rawId),
      type: credential.type,
      response: {
        clientDataJSON: bytesToB64url(credential.response.clientDataJSON),
        attestationObject: bytesToB64url(credential.response.attestationObject)
      }
    };
  }
  function encodeAssertion(credential) {
    return {
      id: credential.id,
      rawId: bytesToB64url(credential.rawId),
      type: credential.type,
      response: {
        clientDataJSON: bytesToB64url(credential.response.clientDataJSON),
        authenticatorData: bytesToB64url(credential.response.authenticatorData),
        signature: bytesToB64url(credential.response.signature)
      }
    };
  }

  // src/ceremony.ts
  var RETRY_BUDGET = 3;
  function parseTicketPath(pathname) {
    const match = /^\/(r|a)\/([A-Za-z0-9_-]+)$/.exec(pathname);
    if (!match) return null;
    return {
      ceremony: match[1] === "r" ? "registration" : "authentication",
      token: match[2]
    };
  }
  function errorKindOf(reply, fallback) {
    const kind = reply.body?.["error"];
    return typeof kind === "string" ? kind : fallback;
  }
  var CeremonyController = class {
    constructor(ceremony, token, io) {
      this.retriesLeft = RETRY_BUDGET;
      this.running = false;
      this.heldOptions = null;
      this.lastState = { phase: "loading" };
      this.ceremony = ceremony;
      this.token = token;
      this.io = io;
    }
    get canRetry() {
      return this.lastState.errorKind === "user-cancelled" && this.retriesLeft > 0;
    }
    show(state) {
      this.lastState = state;
      this.io.render(state);
      return state;
    }
    /** One full pass; concurrent invocations (double clicks) are debounced. */
    async run() {
      if (this.running) return this.lastState;
      this.running = true;
      try {
        return await this.runOnce();
      } finally {
        this.running = false;
      }
    }
    async runOnce() {
      const apiBase = this.ceremony === "registration" ? "/api/reg" : "/api/auth";
      try {
        if (this.heldOptions === null) {
          this.show({ phase: "loading" });
          const reply = await this.io.post(`${apiBase}/options`, { token: this.token });
          if (reply.status !== 200 || reply.body === null) {
            return this.show({
              phase: "failure",
              errorKind: errorKindOf(reply, "network")
            });
          }
          this.heldOptions = reply.body;
        }
        this.show({ phase: "awaiting-user-gesture" });
        let document_;
        try {
          if (this.ceremony === "registration") {
            const credential = await this.io.createCredential(
              decodeCreationOptions(this.heldOptions)
            );
            document_ = encodeRegistration(credential);
          } else {
            const credential = await this.io.getCredential(
              decodeRequestOptions(this.heldOptions)
            );
            document_ = encodeAssertion(credential);
          }
        } catch {
          this.retriesLeft -= 1;
          return this.show({ phase: "failure", errorKind: "user-cancelled" });
        }
        this.show({ phase: "verifying" });
        const verdict = await this.io.post(`${apiBase}/verify`, {
          token: this.token,
          response: document_
        });
        if (verdict.status === 200 || verdict.status === 201) {
          return this.show({ phase: "success" });
        }
        const retries = verdict.body?.["retries_left"];
        if (typeof retries === "number") {
          this.retriesLeft = retries;
        }
        return this.show({
          phase: "failure",
          errorKind: errorKindOf(verdict, "network")
        });
      } catch {
        return this.show({ phase: "failure", errorKind: "network" });
      }
    }
  };

  // src/main.ts
  async function post(path, body) {
    const reply = await fetch(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body)
    });
    let payload = null;
    try {
      payload = await reply.json();
    } catch {
      payload = null;
    }
    return { status: reply.status, body: payload };
  }
  function renderer(controller) {
    const status = document.getElementById("status");
    const detail = document.getElementById("detail");
    const retry = document.getElementById("retry");
    const isRegistration = () => document.body.getAttribute("data-ceremony") === "registration";
    return (state) => {
      document.body.setAttribute("data-phase", state.phase);
      switch (state.phase) {
        case "loading":
          status.textContent = "Contacting server\u2026";
          detail.textContent = "";
          break;
        case "awaiting-user-gesture":
          status.textContent = "Confirm with your passkey";
          detail.textContent = "Your device will prompt for a fingerprint, face, or PIN.";
          break;
        case "verifying":
          status.textContent = "Verifying\u2026";
          detail.textContent = "";
          break;
        case "success":
          status.textContent = "Success";
          detail.textContent = isRegistration() ? "Passkey registered. You can close this page." : "Authenticated. Return to your terminal to continue.";
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
  function start() {
    const page = parseTicketPath(window.location.pathname);
    let controller = null;
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
          publicKey: options
        });
        if (credential === null) throw new Error("no credential");
        return credential;
      },
      getCredential: async (options) => {
        const credential = await navigator.credentials.get({
          publicKey: options
        });
        if (credential === null) throw new Error("no credential");
        return credential;
      },
      render
    });
    const retry = document.getElementById("retry");
    retry?.addEventListener("click", () => {
      retry.hidden = true;
      void controller.run();
    });
    void controller.run();
  }
  window.addEventListener("DOMContentLoaded", start);
})();

/** The ceremony state machine, decoupled from the DOM and the platform so it
 * runs under test with stubbed transports.
 *
 * Phases move Loading -> AwaitingUserGesture -> Verifying -> Success|Failure;
 * a failure always carries the server's machine-readable error kind (or a
 * local one: "network", "user-cancelled", "bad-url"). On cancel the held
 * options are reused for the retry: the server keeps one pending challenge
 * per session, so re-fetching options would 409. */

import {
  AssertionCredentialLike,
  CreationOptionsWire,
  RegistrationCredentialLike,
  RequestOptionsWire,
  decodeCreationOptions,
  decodeRequestOptions,
  encodeAssertion,
  encodeRegistration,
} from "./wire";

export type Ceremony = "registration" | "authentication";

export type Phase =
  | "loading"
  | "awaiting-user-gesture"
  | "verifying"
  | "success"
  | "failure";

export interface CeremonyViewState {
  phase: Phase;
  errorKind?: string;
}

export interface ServerReply {
  status: number;
  body: Record<string, unknown> | null;
}

export interface CeremonyIo {
  post(path: string, body: unknown): Promise<ServerReply>;
  createCredential(
    options: ReturnType<typeof decodeCreationOptions>,
  ): Promise<RegistrationCredentialLike>;
  getCredential(
    options: ReturnType<typeof decodeRequestOptions>,
  ): Promise<AssertionCredentialLike>;
  render(state: CeremonyViewState): void;
}

export const RETRY_BUDGET = 3;

export function parseTicketPath(pathname: string): { ceremony: Ceremony; token: string } | null {
  const match = /^\/(r|a)\/([A-Za-z0-9_-]+)$/.exec(pathname);
  if (!match) return null;
  return {
    ceremony: match[1] === "r" ? "registration" : "authentication",
    token: match[2]!,
  };
}

function errorKindOf(reply: ServerReply, fallback: string): string {
  const kind = reply.body?.["error"];
  return typeof kind === "string" ? kind : fallback;
}

export class CeremonyController {
  readonly ceremony: Ceremony;
  readonly token: string;
  retriesLeft = RETRY_BUDGET;

  private readonly io: CeremonyIo;
  private running = false;
  private heldOptions: CreationOptionsWire | RequestOptionsWire | null = null;
  private lastState: CeremonyViewState = { phase: "loading" };

  constructor(ceremony: Ceremony, token: string, io: CeremonyIo) {
    this.ceremony = ceremony;
    this.token = token;
    this.io = io;
  }

  get canRetry(): boolean {
    return this.lastState.errorKind === "user-cancelled" && this.retriesLeft > 0;
  }

  private show(state: CeremonyViewState): CeremonyViewState {
    this.lastState = state;
    this.io.render(state);
    return state;
  }

  /** One full pass; concurrent invocations (double clicks) are debounced. */
  async run(): Promise<CeremonyViewState> {
    if (this.running) return this.lastState;
    this.running = true;
    try {
      return await this.runOnce();
    } finally {
      this.running = false;
    }
  }

  private async runOnce(): Promise<CeremonyViewState> {
    const apiBase = this.ceremony === "registration" ? "/api/reg" : "/api/auth";

    try {
      if (this.heldOptions === null) {
        this.show({ phase: "loading" });
        const reply = await this.io.post(`${apiBase}/options`, { token: this.token });
        if (reply.status !== 200 || reply.body === null) {
          return this.show({
            phase: "failure",
            errorKind: errorKindOf(reply, "network"),
          });
        }
        this.heldOptions = reply.body as unknown as CreationOptionsWire | RequestOptionsWire;
      }

      this.show({ phase: "awaiting-user-gesture" });
      let document_;
      try {
        if (this.ceremony === "registration") {
          const credential = await this.io.createCredential(
            decodeCreationOptions(this.heldOptions as CreationOptionsWire),
          );
          document_ = encodeRegistration(credential);
        } else {
          const credential = await this.io.getCredential(
            decodeRequestOptions(this.heldOptions as RequestOptionsWire),
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
        response: document_,
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
        errorKind: errorKindOf(verdict, "network"),
      });
    } catch {
      return this.show({ phase: "failure", errorKind: "network" });
    }
  }
}

/** The page's encode path must reproduce, byte for byte, the documents the
 * server-side suite froze from its reference authenticator. */

import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { encodeAssertion, encodeRegistration } from "../src/wire";

const vectors = JSON.parse(
  readFileSync(fileURLToPath(new URL("../vectors/wire-vectors.json", import.meta.url)), "utf-8"),
);

function hexToBuffer(hex: string): ArrayBuffer {
  const bytes = new Uint8Array(hex.length / 2);
  for (let i = 0; i < bytes.length; i++) {
    bytes[i] = parseInt(hex.slice(2 * i, 2 * i + 2), 16);
  }
  return bytes.buffer;
}

function canonical(value: unknown): string {
  return JSON.stringify(value, Object.keys(value as object).sort());
}

describe("wire documents", () => {
  it("registration encoding matches the frozen document byte for byte", () => {
    const { raw, document } = vectors.registration;
    const encoded = encodeRegistration({
      id: document.id,
      rawId: hexToBuffer(raw.rawId),
      type: "public-key",
      response: {
        clientDataJSON: hexToBuffer(raw.clientDataJSON),
        attestationObject: hexToBuffer(raw.attestationObject),
      },
    });
    expect(encoded).toEqual(document);
    expect(JSON.stringify(encoded, Object.keys(encoded).sort()))
      .toBe(JSON.stringify(document, Object.keys(document).sort()));
  });

  it("assertion encoding matches the frozen document byte for byte", () => {
    const { raw, document } = vectors.assertion;
    const encoded = encodeAssertion({
      id: document.id,
      rawId: hexToBuffer(raw.rawId),
      type: "public-key",
      response: {
        clientDataJSON: hexToBuffer(raw.clientDataJSON),
        authenticatorData: hexToBuffer(raw.authenticatorData),
        signature: hexToBuffer(raw.signature),
      },
    });
    expect(encoded).toEqual(document);
    expect(canonical(encoded)).toBe(canonical(document));
  });
});

/** base64url without padding: the wire encoding for every binary field.
 * Mirrors the server's codec; both sides share the same frozen test vectors. */

const B64URL_SHAPE = /^[A-Za-z0-9_-]*$/;

export function bytesToB64url(buffer: ArrayBuffer): string {
  const bytes = new Uint8Array(buffer);
  let binary = "";
  for (let i = 0; i < bytes.length; i++) {
    binary += String.fromCharCode(bytes[i]!);
  }
  return btoa(binary).replace(/\+/g, "-").replace(/\//g, "_").replace(/=+$/, "");
}

export function b64urlToBytes(text: string): ArrayBuffer {
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

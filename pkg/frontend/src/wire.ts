/** The challenge server's wire contract: JSON documents with every binary
 * field carried as unpadded base64url. */

import { b64urlToBytes, bytesToB64url } from "./b64url";

export interface CreationOptionsWire {
  rp: { id: string; name: string };
  user: { id: string; name: string; displayName: string };
  challenge: string;
  pubKeyCredParams: { type: string; alg: number }[];
  timeout?: number;
  attestation?: string;
  authenticatorSelection?: { userVerification?: string };
}

export interface RequestOptionsWire {
  rpId: string;
  challenge: string;
  allowCredentials?: { type: string; id: string }[];
  timeout?: number;
  userVerification?: string;
}

export interface RegistrationDocument {
  id: string;
  rawId: string;
  type: string;
  response: { clientDataJSON: string; attestationObject: string };
}

export interface AssertionDocument {
  id: string;
  rawId: string;
  type: string;
  response: { clientDataJSON: string; authenticatorData: string; signature: string };
}

/** What navigator.credentials.create() resolves to, reduced to the parts the
 * page touches: opaque buffers in, opaque buffers out. */
export interface RegistrationCredentialLike {
  id: string;
  rawId: ArrayBuffer;
  type: string;
  response: { clientDataJSON: ArrayBuffer; attestationObject: ArrayBuffer };
}

export interface AssertionCredentialLike {
  id: string;
  rawId: ArrayBuffer;
  type: string;
  response: {
    clientDataJSON: ArrayBuffer;
    authenticatorData: ArrayBuffer;
    signature: ArrayBuffer;
  };
}

export function decodeCreationOptions(options: CreationOptionsWire) {
  return {
    rp: options.rp,
    user: {
      id: b64urlToBytes(options.user.id),
      name: options.user.name,
      displayName: options.user.displayName,
    },
    challenge: b64urlToBytes(options.challenge),
    pubKeyCredParams: options.pubKeyCredParams,
    ...(options.timeout !== undefined ? { timeout: options.timeout } : {}),
    ...(options.attestation !== undefined ? { attestation: options.attestation } : {}),
    ...(options.authenticatorSelection !== undefined
      ? { authenticatorSelection: options.authenticatorSelection }
      : {}),
  };
}

export function decodeRequestOptions(options: RequestOptionsWire) {
  return {
    rpId: options.rpId,
    challenge: b64urlToBytes(options.challenge),
    allowCredentials: (options.allowCredentials ?? []).map((entry) => ({
      type: entry.type,
      id: b64urlToBytes(entry.id),
    })),
    ...(options.timeout !== undefined ? { timeout: options.timeout } : {}),
    ...(options.userVerification !== undefined
      ? { userVerification: options.userVerification }
      : {}),
  };
}

export function encodeRegistration(credential: RegistrationCredentialLike): RegistrationDocument {
  return {
    id: credential.id,
    rawId: bytesToB64url(credential.rawId),
    type: credential.type,
    response: {
      clientDataJSON: bytesToB64url(credential.response.clientDataJSON),
      attestationObject: bytesToB64url(credential.response.attestationObject),
    },
  };
}

export function encodeAssertion(credential: AssertionCredentialLike): AssertionDocument {
  return {
    id: credential.id,
    rawId: bytesToB64url(credential.rawId),
    type: credential.type,
    response: {
      clientDataJSON: bytesToB64url(credential.response.clientDataJSON),
      authenticatorData: bytesToB64url(credential.response.authenticatorData),
      signature: bytesToB64url(credential.response.signature),
    },
  };
}

/**
 * Erroneous-value probing of registered TLS validators.
 *
 * A hostname verifier or trust manager is judged by feeding it inputs a
 * correct implementation must reject (null / empty host, empty cert
 * chain). Acceptance of any of them means the validator is permissive.
 * Exceptions thrown while probing are interpreted as secure behavior,
 * and probing never propagates exceptions into the host app.
 */

export interface HostnameVerifierLike {
  verify(host: string | null, session: unknown): boolean;
}

export interface TrustManagerLike {
  checkServerTrusted(chain: unknown[], authType: string): void;
}

const PROBE_HOSTS: Array<string | null> = [null, ""];

export function probeHostnameVerifier(verifier: HostnameVerifierLike): boolean {
  let accepts = false;
  for (const host of PROBE_HOSTS) {
    try {
      accepts = accepts || verifier.verify(host, null) === true;
    } catch {
      // rejection by exception counts as secure
    }
  }
  return accepts;
}

export function probeTrustManager(manager: TrustManagerLike): boolean {
  try {
    manager.checkServerTrusted([], "RSA");
    return true; // accepted an empty certificate chain
  } catch {
    return false;
  }
}

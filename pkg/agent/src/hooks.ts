/**
 * Hook table for the Java crypto API surface.
 *
 * Each entry names a class and method to intercept and a handler that
 * turns one call into one log event. The table is installed on a
 * JavaHookEnv, an abstraction over the instrumentation backend: under
 * Frida this is backed by Java.use method wrappers, under test it is a
 * simulated dispatcher. Handlers never alter call behavior.
 */

import { probeHostnameVerifier, probeTrustManager } from "./probe.js";
import type { HostnameVerifierLike, TrustManagerLike } from "./probe.js";
import { EventSink, ParamValue, bytes, flag, text, uint } from "./wire.js";

export interface JavaCall {
  self?: unknown;
  args: unknown[];
  result?: unknown;
}

export interface JavaHookEnv {
  hook(
    className: string,
    method: string,
    handler: (call: JavaCall) => void,
  ): void;
}

export interface HookSpec {
  className: string;
  method: string;
  handler: (call: JavaCall, sink: EventSink) => void;
}

function asBytes(value: unknown): Uint8Array | undefined {
  if (value instanceof Uint8Array) return value;
  if (Array.isArray(value) && value.every((x) => typeof x === "number")) {
    return Uint8Array.from(value as number[]);
  }
  return undefined;
}

function asText(value: unknown): string | undefined {
  if (typeof value === "string") return value;
  if (Array.isArray(value) && value.every((x) => typeof x === "string")) {
    return (value as string[]).join(""); // char[] passwords
  }
  return undefined;
}

function algOf(self: unknown): string | undefined {
  const obj = self as { getAlgorithm?: () => string } | undefined;
  return obj?.getAlgorithm?.();
}

/* The log format names SHA-1 without the hyphen. */
function normalizeHashName(alg: string): string {
  return alg === "SHA-1" ? "SHA1" : alg;
}

function put(
  params: Record<string, ParamValue>,
  key: string,
  value: ParamValue | undefined,
): void {
  if (value !== undefined) params[key] = value;
}

function keyParams(keyObj: unknown): Record<string, ParamValue> {
  const params: Record<string, ParamValue> = {};
  const obj = keyObj as
    | { getEncoded?: () => unknown; bitLength?: () => number }
    | undefined;
  const encoded = asBytes(obj?.getEncoded?.());
  if (encoded) put(params, "key", bytes(encoded));
  return params;
}

export const HOOK_TABLE: HookSpec[] = [
  {
    className: "java.security.MessageDigest",
    method: "digest",
    handler(call, sink) {
      const alg = algOf(call.self);
      const params: Record<string, ParamValue> = {};
      if (alg) put(params, "alg", text(normalizeHashName(alg)));
      sink.emit("MessageDigest", "MessageDigest.digest", params);
    },
  },
  {
    className: "javax.crypto.Cipher",
    method: "init",
    handler(call, sink) {
      // transform strings are logged whole under alg; the checker splits
      const transform = algOf(call.self);
      const params: Record<string, ParamValue> = keyParams(call.args[1]);
      if (transform) put(params, "alg", text(transform));
      const spec = call.args[2] as { getIV?: () => unknown } | undefined;
      const iv = asBytes(spec?.getIV?.());
      if (iv) put(params, "iv", bytes(iv));
      sink.emit("SymmEncryption", "Cipher.init", params);
    },
  },
  {
    className: "javax.crypto.Cipher",
    method: "doFinal",
    handler(call, sink) {
      const transform = algOf(call.self);
      const params: Record<string, ParamValue> = {};
      if (transform) put(params, "alg", text(transform));
      const self = call.self as { getBlockSize?: () => number } | undefined;
      const blockSize = self?.getBlockSize?.() ?? 0;
      const data = asBytes(call.args[0]);
      if (blockSize > 0 && data) {
        put(params, "numBlocks", uint(Math.ceil(data.length / blockSize)));
      }
      sink.emit("SymmEncryption", "Cipher.doFinal", params);
    },
  },
  {
    className: "java.security.Signature",
    method: "initSign",
    handler(call, sink) {
      signatureEvent(call, sink, "Signature.initSign");
    },
  },
  {
    className: "java.security.Signature",
    method: "initVerify",
    handler(call, sink) {
      signatureEvent(call, sink, "Signature.initVerify");
    },
  },
  {
    className: "javax.crypto.spec.PBEKeySpec",
    method: "$init",
    handler(call, sink) {
      const params: Record<string, ParamValue> = {};
      const password = asText(call.args[0]);
      if (password !== undefined) put(params, "pass", text(password));
      const salt = asBytes(call.args[1]);
      if (salt) put(params, "salt", bytes(salt));
      if (typeof call.args[2] === "number") put(params, "iter", uint(call.args[2]));
      sink.emit("KeyDerivation", "PBEKeySpec", params);
    },
  },
  {
    className: "javax.crypto.spec.PBEParameterSpec",
    method: "$init",
    handler(call, sink) {
      const params: Record<string, ParamValue> = {};
      const salt = asBytes(call.args[0]);
      if (salt) put(params, "salt", bytes(salt));
      if (typeof call.args[1] === "number") put(params, "iter", uint(call.args[1]));
      sink.emit("KeyDerivation", "PBEParameterSpec", params);
    },
  },
  {
    className: "java.security.SecureRandom",
    method: "$init",
    handler(_call, sink) {
      sink.emit("RandomGenerator", "SecureRandom", { alg: text("Secure") });
    },
  },
  {
    className: "java.security.SecureRandom",
    method: "nextBytes",
    handler(call, sink) {
      const params: Record<string, ParamValue> = { alg: text("Secure") };
      const out = asBytes(call.args[0]);
      if (out) put(params, "out", bytes(out));
      sink.emit("RandomGenerator", "SecureRandom.nextBytes", params);
    },
  },
  {
    className: "java.security.SecureRandom",
    method: "setSeed",
    handler(call, sink) {
      const params: Record<string, ParamValue> = { alg: text("Secure") };
      const seed = asBytes(call.args[0]);
      if (seed) put(params, "seed", bytes(seed));
      sink.emit("RandomGenerator", "SecureRandom.setSeed", params);
    },
  },
  {
    className: "java.util.Random",
    method: "$init",
    handler(_call, sink) {
      sink.emit("RandomGenerator", "Random", { alg: text("NotSecure") });
    },
  },
  {
    className: "java.util.Random",
    method: "next",
    handler(_call, sink) {
      sink.emit("RandomGenerator", "Random.next", { alg: text("NotSecure") });
    },
  },
  {
    className: "java.util.Random",
    method: "nextBytes",
    handler(call, sink) {
      const params: Record<string, ParamValue> = { alg: text("NotSecure") };
      const out = asBytes(call.args[0]);
      if (out) put(params, "out", bytes(out));
      sink.emit("RandomGenerator", "Random.nextBytes", params);
    },
  },
  {
    className: "java.security.KeyStore",
    method: "getKey",
    handler(call, sink) {
      keyStoreEvent(call.args[1], sink, "KeyStore.getKey");
    },
  },
  {
    className: "java.security.KeyStore",
    method: "load",
    handler(call, sink) {
      keyStoreEvent(call.args[1], sink, "KeyStore.load");
    },
  },
  {
    className: "java.security.KeyStore",
    method: "store",
    handler(call, sink) {
      keyStoreEvent(call.args[1], sink, "KeyStore.store");
    },
  },
  {
    className: "java.net.URL",
    method: "$init",
    handler(call, sink) {
      const spec = asText(call.args[0]);
      const protocol = spec?.includes("://") ? spec.split("://", 1)[0] : spec;
      const params: Record<string, ParamValue> = {};
      if (protocol) put(params, "urlprot", text(protocol));
      sink.emit("SslTlsCert", "URL", params);
    },
  },
  {
    className: "javax.net.ssl.HttpsURLConnection",
    method: "setHostnameVerifier",
    handler(call, sink) {
      const verifier = call.args[0] as HostnameVerifierLike;
      sink.emit("SslTlsCert", "HttpsURLConnection.setHostnameVerifier", {
        allhost: flag(probeHostnameVerifier(verifier)),
      });
    },
  },
  {
    className: "javax.net.ssl.HttpsURLConnection",
    method: "setDefaultHostnameVerifier",
    handler(call, sink) {
      const verifier = call.args[0] as HostnameVerifierLike;
      // replacing the process-wide default is itself reportable
      sink.emit("SslTlsCert", "HttpsURLConnection.setDefaultHostnameVerifier", {
        allhost: flag(probeHostnameVerifier(verifier)),
        sethost: text(verifier?.constructor?.name ?? "unknown"),
      });
    },
  },
  {
    className: "javax.net.ssl.SSLContext",
    method: "init",
    handler(call, sink) {
      const managers = (call.args[1] ?? []) as TrustManagerLike[];
      const permissive = Array.isArray(managers)
        ? managers.some((m) => probeTrustManager(m))
        : false;
      sink.emit("SslTlsCert", "SSLContext.init", { allcert: flag(permissive) });
    },
  },
  {
    className: "javax.net.SocketFactory",
    method: "getDefault",
    handler(_call, sink) {
      // a plain (non-SSL) socket factory implies cleartext transport
      sink.emit("SslTlsCert", "SocketFactory.getDefault", {
        urlprot: text("http"),
      });
    },
  },
  {
    className: "javax.net.ssl.SSLSocketFactory",
    method: "getDefault",
    handler(_call, sink) {
      sink.emit("SslTlsCert", "SSLSocketFactory.getDefault", {
        urlprot: text("https"),
      });
    },
  },
];

function signatureEvent(call: JavaCall, sink: EventSink, api: string): void {
  const params: Record<string, ParamValue> = {};
  const alg = algOf(call.self);
  if (alg) put(params, "alg", text(alg));
  const key = call.args[0] as { bitLength?: () => number } | undefined;
  const bits = key?.bitLength?.();
  if (typeof bits === "number") put(params, "key", uint(bits));
  sink.emit("AsymmEncryption", api, params);
}

function keyStoreEvent(passwordArg: unknown, sink: EventSink, api: string): void {
  const params: Record<string, ParamValue> = {};
  const password = asText(passwordArg);
  if (password !== undefined) put(params, "pass", text(password));
  sink.emit("KeyStorage", api, params);
}

export function installHooks(env: JavaHookEnv, sink: EventSink): void {
  for (const spec of HOOK_TABLE) {
    env.hook(spec.className, spec.method, (call) => {
      try {
        spec.handler(call, sink);
      } catch {
        // logging must never break the instrumented app
      }
    });
  }
}

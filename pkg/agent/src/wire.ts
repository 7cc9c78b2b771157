/**
 * Emitter for the crycheck execution-log wire format.
 *
 * UTF-8 lines: a three-line header, then one event per line:
 *   seq \t class \t api \t key=prefix:value;key=prefix:value
 * Value prefixes: t: escaped text, b: lowercase hex, u: unsigned int,
 * o: boolean 0|1. Parameters are emitted in alphabetical order so the
 * output is canonical.
 */

export type CryptoClass =
  | "MessageDigest"
  | "SymmEncryption"
  | "AsymmEncryption"
  | "KeyDerivation"
  | "RandomGenerator"
  | "KeyStorage"
  | "SslTlsCert";

export type ParamValue =
  | { kind: "t"; value: string }
  | { kind: "b"; value: Uint8Array }
  | { kind: "u"; value: number }
  | { kind: "o"; value: boolean };

export const text = (value: string): ParamValue => ({ kind: "t", value });
export const bytes = (value: Uint8Array): ParamValue => ({ kind: "b", value });
export const uint = (value: number): ParamValue => {
  if (!Number.isInteger(value) || value < 0) {
    throw new Error(`uint param must be a non-negative integer, got ${value}`);
  }
  return { kind: "u", value };
};
export const flag = (value: boolean): ParamValue => ({ kind: "o", value });

export function escapeText(value: string): string {
  return value
    .replace(/\\/g, "\\\\")
    .replace(/;/g, "\\;")
    .replace(/\t/g, "\\t")
    .replace(/\n/g, "\\n");
}

function toHex(data: Uint8Array): string {
  let out = "";
  for (const byte of data) {
    out += byte.toString(16).padStart(2, "0");
  }
  return out;
}

export function encodeValue(value: ParamValue): string {
  switch (value.kind) {
    case "t":
      return `t:${escapeText(value.value)}`;
    case "b":
      return `b:${toHex(value.value)}`;
    case "u":
      return `u:${value.value}`;
    case "o":
      return `o:${value.value ? "1" : "0"}`;
  }
}

export interface LineWriter {
  writeLine(line: string): void;
}

/**
 * Serializes events as they arrive. seq assignment and writing happen
 * in one synchronous step, so ordering holds even when hooks fire from
 * interleaved callbacks.
 */
export class EventSink {
  private seq = 0;

  constructor(
    private readonly writer: LineWriter,
    appId: string,
    executionId: string,
    platform: string,
  ) {
    writer.writeLine("#crylog v1");
    writer.writeLine(`#app ${appId} ${executionId}`);
    writer.writeLine(`#platform ${platform}`);
  }

  emit(cls: CryptoClass, api: string, params: Record<string, ParamValue>): number {
    const seq = this.seq++;
    const encoded = Object.keys(params)
      .sort()
      .map((key) => `${key}=${encodeValue(params[key])}`)
      .join(";");
    this.writer.writeLine(`${seq}\t${cls}\t${api}\t${encoded}`);
    return seq;
  }
}

export class BufferWriter implements LineWriter {
  readonly lines: string[] = [];

  writeLine(line: string): void {
    this.lines.push(line);
  }

  toString(): string {
    return this.lines.join("\n") + "\n";
  }
}

import { describe, expect, it } from "vitest";

import {
  BufferWriter,
  EventSink,
  bytes,
  encodeValue,
  escapeText,
  flag,
  text,
  uint,
} from "../src/wire.js";

function sink(writer: BufferWriter): EventSink {
  return new EventSink(writer, "demo.app", "e1", "jvm-sim");
}

describe("escapeText", () => {
  it("escapes separators and backslashes", () => {
    expect(escapeText("a;b\tc\nd\\e")).toBe("a\\;b\\tc\\nd\\\\e");
  });

  it("leaves plain text alone", () => {
    expect(escapeText("AES/GCM/NoPadding")).toBe("AES/GCM/NoPadding");
  });
});

describe("encodeValue", () => {
  it("hex-encodes bytes lowercase", () => {
    expect(encodeValue(bytes(Uint8Array.from([0, 26, 255])))).toBe("b:001aff");
  });

  it("encodes the other kinds", () => {
    expect(encodeValue(text("SHA1"))).toBe("t:SHA1");
    expect(encodeValue(uint(2048))).toBe("u:2048");
    expect(encodeValue(flag(true))).toBe("o:1");
    expect(encodeValue(flag(false))).toBe("o:0");
  });

  it("rejects negative and fractional uints", () => {
    expect(() => uint(-1)).toThrow();
    expect(() => uint(1.5)).toThrow();
  });
});

describe("EventSink", () => {
  it("writes the three-line header first", () => {
    const writer = new BufferWriter();
    sink(writer);
    expect(writer.lines).toEqual([
      "#crylog v1",
      "#app demo.app e1",
      "#platform jvm-sim",
    ]);
  });

  it("assigns strictly increasing seq numbers", () => {
    const writer = new BufferWriter();
    const s = sink(writer);
    const seqs = [0, 1, 2].map(() =>
      s.emit("MessageDigest", "MessageDigest.digest", { alg: text("SHA-256") }),
    );
    expect(seqs).toEqual([0, 1, 2]);
  });

  it("keeps seq consistent under interleaved emitters", async () => {
    const writer = new BufferWriter();
    const s = sink(writer);
    await Promise.all(
      Array.from({ length: 50 }, (_, i) =>
        Promise.resolve().then(() =>
          s.emit("RandomGenerator", "SecureRandom.nextBytes", {
            alg: text("Secure"),
            out: bytes(Uint8Array.from([i])),
          }),
        ),
      ),
    );
    const seqs = writer.lines.slice(3).map((line) => Number(line.split("\t")[0]));
    expect(seqs).toEqual(Array.from({ length: 50 }, (_, i) => i));
  });

  it("emits params in alphabetical order", () => {
    const writer = new BufferWriter();
    const s = sink(writer);
    s.emit("SymmEncryption", "Cipher.init", {
      mode: text("GCM"),
      alg: text("AES"),
      key: bytes(Uint8Array.from([1, 2])),
    });
    expect(writer.lines[3]).toBe(
      "0\tSymmEncryption\tCipher.init\talg=t:AES;key=b:0102;mode=t:GCM",
    );
  });
});

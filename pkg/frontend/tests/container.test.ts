import { describe, expect, it } from "vitest";

import { decodeBase64, decodeContainer, encodeContainer } from "../src/container.js";

function corrupt(buf: ArrayBuffer, offset: number, value: number): ArrayBuffer {
  const copy = new Uint8Array(buf.slice(0));
  copy[offset] = value;
  return copy.buffer;
}

describe("decodeContainer", () => {
  it("round trips named channels in order", () => {
    const a = new Float32Array([1, 2, 3, 4, 5, 6]);
    const b = new Float32Array([-1, 0.5, 0, 7, 1e-8, 42]);
    const buf = encodeContainer(3, 2, [["temperature", a], ["qx", b]]);
    const out = decodeContainer(buf);
    expect(out.nx).toBe(3);
    expect(out.ny).toBe(2);
    expect(out.names).toEqual(["temperature", "qx"]);
    expect(Array.from(out.channels.get("temperature")!)).toEqual(Array.from(a));
    expect(Array.from(out.channels.get("qx")!)).toEqual(Array.from(b));
  });

  it("keeps float32 values bit-exact", () => {
    const vals = new Float32Array([Math.PI, -Math.E, 1e-38, 3.4e38]);
    const out = decodeContainer(encodeContainer(2, 2, [["t", vals]]));
    const got = out.channels.get("t")!;
    for (let i = 0; i < vals.length; i++) {
      expect(got[i]).toBe(vals[i]);
    }
  });

  it("rejects a bad magic", () => {
    const buf = corrupt(encodeContainer(2, 2, [["t", [0, 0, 0, 0]]]), 0, 0x58);
    expect(() => decodeContainer(buf)).toThrow(/bad magic/);
  });

  it("rejects an unknown version", () => {
    const buf = corrupt(encodeContainer(2, 2, [["t", [0, 0, 0, 0]]]), 4, 9);
    expect(() => decodeContainer(buf)).toThrow(/version/);
  });

  it("rejects truncated payloads", () => {
    const whole = encodeContainer(2, 2, [["t", [1, 2, 3, 4]]]);
    expect(() => decodeContainer(whole.slice(0, 8))).toThrow(/header/);
    expect(() => decodeContainer(whole.slice(0, 20))).toThrow(/name table/);
    expect(() => decodeContainer(whole.slice(0, whole.byteLength - 3)))
      .toThrow(/channel data/);
  });

  it("rejects trailing bytes", () => {
    const whole = new Uint8Array(encodeContainer(2, 2, [["t", [1, 2, 3, 4]]]));
    const padded = new Uint8Array(whole.length + 1);
    padded.set(whole);
    expect(() => decodeContainer(padded.buffer)).toThrow(/trailing/);
  });

  it("decodes base64 payloads", () => {
    const buf = encodeContainer(2, 1, [["t", [10.5, 12.25]]]);
    const b64 = Buffer.from(new Uint8Array(buf)).toString("base64");
    const out = decodeContainer(decodeBase64(b64));
    expect(Array.from(out.channels.get("t")!)).toEqual([10.5, 12.25]);
  });
});

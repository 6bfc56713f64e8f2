import { describe, expect, it } from "vitest";

import { decodeFrame, EnvServerError } from "../src/protocol.js";

function frameOf(values: number[], shape: number[]) {
  const buf = Buffer.alloc(values.length * 4);
  values.forEach((v, i) => buf.writeFloatLE(v, i * 4));
  return { shape, dtype: "float32" as const, data: buf.toString("base64") };
}

describe("decodeFrame", () => {
  it("round-trips little-endian float32 payloads", () => {
    const values = [0, 1, -1, 0.5, 3.25, 1e-7];
    const out = decodeFrame(frameOf(values, [2, 3]));
    expect(out.shape).toEqual([2, 3]);
    expect(Array.from(out.data)).toEqual(values.map((v) => Math.fround(v)));
  });

  it("rejects payloads that do not match the shape", () => {
    const frame = frameOf([1, 2, 3], [2, 2]);
    expect(() => decodeFrame(frame)).toThrowError(EnvServerError);
    try {
      decodeFrame(frame);
    } catch (e) {
      expect((e as EnvServerError).type).toBe("protocol");
    }
  });

  it("rejects unknown dtypes", () => {
    const frame = { ...frameOf([1], [1]), dtype: "float64" as never };
    expect(() => decodeFrame(frame)).toThrowError(/dtype/);
  });
});

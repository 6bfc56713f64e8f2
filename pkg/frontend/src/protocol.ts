/**
 * Wire types for the pulsekit environment server.
 *
 * The server speaks one JSON object per line on stdin/stdout.  Requests
 * carry an `id` echoed by the reply, an `op`, and op-specific fields;
 * replies are `{id, ok: true, result}` or `{id, ok: false, error}`.
 */

export type ErrorType =
  | "config"
  | "closed_handle"
  | "episode_over"
  | "numerical"
  | "protocol"
  | "internal";

export interface WireError {
  type: ErrorType;
  message: string;
}

/** Base64-encoded little-endian C-order float32 array. */
export interface Frame {
  shape: number[];
  dtype: "float32";
  data: string;
}

export interface WireObservation {
  /** Normalized controller setting + step phase, 6 values in [-1, 1]. */
  vector: number[];
  /** Stacked measurement frames, or null when the handle skips images. */
  image: Frame | null;
}

export interface MakeResult {
  handle: number;
  action_dim: number;
  vector_dim: number;
  image_shape: number[];
  horizon: number;
  config_hash: string;
}

export interface ResetResult {
  observation: WireObservation;
  info: Record<string, number>;
}

export interface StepResult {
  observation: WireObservation;
  reward: number;
  /** Always false: episodes end by time limit, never by state. */
  terminated: boolean;
  truncated: boolean;
  info: Record<string, number>;
}

export interface RenderResult {
  image: Frame;
}

export interface Reply {
  id: number | null;
  ok: boolean;
  result?: unknown;
  error?: WireError;
}

export class EnvServerError extends Error {
  readonly type: ErrorType;

  constructor(type: ErrorType, message: string) {
    super(message);
    this.name = "EnvServerError";
    this.type = type;
  }
}

export interface DecodedFrame {
  shape: number[];
  data: Float32Array;
}

/** Decode a wire frame into a flat C-order Float32Array plus its shape. */
export function decodeFrame(frame: Frame): DecodedFrame {
  if (frame.dtype !== "float32") {
    throw new EnvServerError("protocol", `unsupported frame dtype ${frame.dtype}`);
  }
  const bytes = Buffer.from(frame.data, "base64");
  const count = frame.shape.reduce((a, b) => a * b, 1);
  if (bytes.byteLength !== count * 4) {
    throw new EnvServerError(
      "protocol",
      `frame payload is ${bytes.byteLength} bytes, shape ${JSON.stringify(frame.shape)} needs ${count * 4}`,
    );
  }
  // payload is little-endian; read through a DataView so the result is
  // correct on any host
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  const data = new Float32Array(count);
  for (let i = 0; i < count; i++) {
    data[i] = view.getFloat32(i * 4, true);
  }
  return { shape: [...frame.shape], data };
}

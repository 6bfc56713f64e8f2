import type { EnvServerClient } from "./client.js";
import {
  decodeFrame,
  EnvServerError,
  type DecodedFrame,
  type MakeResult,
  type RenderResult,
  type ResetResult,
  type StepResult,
  type WireObservation,
} from "./protocol.js";

export interface Observation {
  vector: number[];
  image: DecodedFrame | null;
}

export interface ResetOutcome {
  observation: Observation;
  info: Record<string, number>;
}

export interface StepOutcome {
  observation: Observation;
  reward: number;
  terminated: boolean;
  truncated: boolean;
  info: Record<string, number>;
}

export interface MakeOptions {
  /** Path to a YAML config; omit for the server's built-in defaults. */
  config?: string;
  /** Skip image payloads for speed; vectors and rewards are unaffected. */
  images?: boolean;
}

function decodeObs(obs: WireObservation): Observation {
  return {
    vector: [...obs.vector],
    image: obs.image === null ? null : decodeFrame(obs.image),
  };
}

/**
 * One remote environment instance.  Thin, typed veneer over the handle
 * operations: reset/step/render/close.  `close` is idempotent; any other
 * call after close rejects with a "closed_handle" error.
 */
export class PulseEnv {
  /** Server-side identity of this instance; stable until close. */
  readonly handle: number;
  readonly actionDim: number;
  readonly vectorDim: number;
  readonly imageShape: number[];
  readonly horizon: number;
  readonly configHash: string;

  private client: EnvServerClient;
  private closed = false;

  constructor(client: EnvServerClient, made: MakeResult) {
    this.client = client;
    this.handle = made.handle;
    this.actionDim = made.action_dim;
    this.vectorDim = made.vector_dim;
    this.imageShape = [...made.image_shape];
    this.horizon = made.horizon;
    this.configHash = made.config_hash;
  }

  async reset(seed?: number): Promise<ResetOutcome> {
    const res = (await this.client.call("reset", {
      handle: this.handle,
      seed: seed ?? null,
    })) as ResetResult;
    return { observation: decodeObs(res.observation), info: res.info };
  }

  async step(action: number[]): Promise<StepOutcome> {
    if (action.length !== this.actionDim) {
      throw new EnvServerError(
        "protocol",
        `action must have ${this.actionDim} components, got ${action.length}`,
      );
    }
    const res = (await this.client.call("step", {
      handle: this.handle,
      action,
    })) as StepResult;
    return {
      observation: decodeObs(res.observation),
      reward: res.reward,
      terminated: res.terminated,
      truncated: res.truncated,
      info: res.info,
    };
  }

  /** Current measurement frame, recomputed server-side on demand. */
  async render(): Promise<DecodedFrame> {
    const res = (await this.client.call("render", {
      handle: this.handle,
    })) as RenderResult;
    return decodeFrame(res.image);
  }

  async close(): Promise<void> {
    if (this.closed) {
      return;
    }
    this.closed = true;
    await this.client.call("close", { handle: this.handle });
  }
}

/** Create an environment on an already-running server. */
export async function makeEnv(
  client: EnvServerClient,
  options: MakeOptions = {},
): Promise<PulseEnv> {
  const made = (await client.call("make", {
    config: options.config ?? null,
    images: options.images ?? true,
  })) as MakeResult;
  return new PulseEnv(client, made);
}

export { EnvServerClient, type ClientOptions } from "./client.js";
export {
  makeEnv,
  PulseEnv,
  type MakeOptions,
  type Observation,
  type ResetOutcome,
  type StepOutcome,
} from "./env.js";
export {
  decodeFrame,
  EnvServerError,
  type DecodedFrame,
  type ErrorType,
  type Frame,
  type MakeResult,
  type Reply,
  type ResetResult,
  type StepResult,
  type WireError,
  type WireObservation,
} from "./protocol.js";

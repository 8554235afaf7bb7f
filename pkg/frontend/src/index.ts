export {
  AgentAction,
  Frame,
  FrameParser,
  Observation,
  decodeAction,
  decodeObservation,
  encodeAction,
  encodeFrame,
  noopAction,
} from "./protocol.js";
export {
  EnvConfig,
  RemoteEnv,
  ServerError,
  SpaceInfo,
  StepResult,
  makeEnv,
} from "./client.js";

export { GroundboxClient } from "./client.js";
export type { ClientOptions } from "./client.js";
export {
  LabelRangeError,
  NotFoundError,
  SampleAlignmentError,
  ServiceError,
  TokenArityError,
  TokenParseError,
} from "./errors.js";
export type { ErrorDetail } from "./errors.js";
export type {
  AssociateRequest,
  Camera,
  ConvgenRequest,
  EvalReport,
  EvalRequest,
  EvalRunResult,
  ExtractedLabel,
  IouKind,
  Label,
  LabelKind,
  MetricKind,
  Profile,
  ProfileMode,
  StandardizeRequest,
  TokenKind,
  VirtualCameraResult,
} from "./types.js";

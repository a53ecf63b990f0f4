/** Typed errors mirroring the service's error taxonomy. */

export interface ErrorDetail {
  error: string;
  message: string;
  offset?: number;
  field?: string;
  expected?: number;
  got?: number;
  missing_gt?: string[];
  missing_pred?: string[];
  [key: string]: unknown;
}

export class ServiceError extends Error {
  readonly status: number;
  readonly detail: ErrorDetail;

  constructor(status: number, detail: ErrorDetail) {
    super(detail.message ?? `service error (${status})`);
    this.name = new.target.name;
    this.status = status;
    this.detail = detail;
  }
}

/** Malformed token text; `offset` is the byte offset of the failure. */
export class TokenParseError extends ServiceError {
  readonly offset: number;

  constructor(status: number, detail: ErrorDetail) {
    super(status, detail);
    this.offset = detail.offset ?? -1;
  }
}

/** Wrong number of token groups for the expected label kind. */
export class TokenArityError extends ServiceError {
  readonly expected: number;
  readonly got: number;

  constructor(status: number, detail: ErrorDetail) {
    super(status, detail);
    this.expected = detail.expected ?? -1;
    this.got = detail.got ?? -1;
  }
}

/** A label field falls outside its quantization range. */
export class LabelRangeError extends ServiceError {
  readonly field: string;

  constructor(status: number, detail: ErrorDetail) {
    super(status, detail);
    this.field = detail.field ?? "";
  }
}

/** Prediction and ground-truth files disagree on the sample id set. */
export class SampleAlignmentError extends ServiceError {
  readonly missingGt: string[];
  readonly missingPred: string[];

  constructor(status: number, detail: ErrorDetail) {
    super(status, detail);
    this.missingGt = detail.missing_gt ?? [];
    this.missingPred = detail.missing_pred ?? [];
  }
}

/** A referenced server-side file does not exist. */
export class NotFoundError extends ServiceError {}

export function errorFromResponse(status: number, body: unknown): ServiceError {
  const detail = (body as { detail?: ErrorDetail })?.detail;
  if (!detail || typeof detail !== "object" || typeof detail.error !== "string") {
    return new ServiceError(status, {
      error: "http",
      message: typeof body === "string" ? body : JSON.stringify(body),
    });
  }
  switch (detail.error) {
    case "parse":
      return new TokenParseError(status, detail);
    case "arity":
      return new TokenArityError(status, detail);
    case "range":
      return new LabelRangeError(status, detail);
    case "alignment":
      return new SampleAlignmentError(status, detail);
    case "not_found":
      return new NotFoundError(status, detail);
    default:
      return new ServiceError(status, detail);
  }
}

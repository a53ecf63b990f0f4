import { errorFromResponse } from "./errors.js";
import type {
  AssociateRequest,
  Camera,
  ConvgenRequest,
  EvalReport,
  EvalRequest,
  EvalRunResult,
  ExtractedLabel,
  IouKind,
  Label,
  Profile,
  StandardizeRequest,
  TokenKind,
  VirtualCameraResult,
} from "./types.js";

export interface ClientOptions {
  /** Request timeout in milliseconds (default 600000, matching batch runs). */
  timeoutMs?: number;
  /** Fetch implementation override, mainly for tests. */
  fetchImpl?: typeof fetch;
}

/**
 * Client for the groundbox service. Stateless and reentrant: each call is one
 * HTTP POST; concurrent calls are safe.
 */
export class GroundboxClient {
  private readonly baseUrl: string;
  private readonly timeoutMs: number;
  private readonly fetchImpl: typeof fetch;

  constructor(baseUrl: string, options: ClientOptions = {}) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.timeoutMs = options.timeoutMs ?? 600_000;
    this.fetchImpl = options.fetchImpl ?? fetch;
  }

  private async request(path: string, payload?: unknown): Promise<Response> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method: payload === undefined ? "GET" : "POST",
      headers: payload === undefined ? undefined : { "content-type": "application/json" },
      body: payload === undefined ? undefined : JSON.stringify(payload),
      signal: AbortSignal.timeout(this.timeoutMs),
    });
    if (!response.ok) {
      let body: unknown;
      try {
        body = await response.json();
      } catch {
        body = await response.text().catch(() => "");
      }
      throw errorFromResponse(response.status, body);
    }
    return response;
  }

  private async post<T>(path: string, payload: unknown): Promise<T> {
    return (await (await this.request(path, payload)).json()) as T;
  }

  async health(): Promise<{ status: string; version: string }> {
    return (await (await this.request("/health")).json()) as { status: string; version: string };
  }

  /** Token string for a label; byte-identical to the primary toolkit's output. */
  async renderLabel(label: Label, profile: Profile): Promise<string> {
    const body = await this.post<{ text: string }>("/v1/codec/render", { label, profile });
    return body.text;
  }

  /** Strict parse of one token string into a dequantized label. */
  async parseLabel(text: string, kind: TokenKind, profile: Profile): Promise<Label> {
    const body = await this.post<{ label: Label }>("/v1/codec/parse", { text, kind, profile });
    return body.label;
  }

  /** All well-formed token groups embedded in free text, left to right. */
  async extractLabels(text: string, profile: Profile): Promise<ExtractedLabel[]> {
    const body = await this.post<{ labels: ExtractedLabel[] }>("/v1/codec/extract", {
      text,
      profile,
    });
    return body.labels;
  }

  /** 2D, BEV, or 3D IoU of two boxes; BEV/3D need the camera. */
  async iou(kind: IouKind, a: Label, b: Label, camera?: Camera): Promise<number> {
    const body = await this.post<{ iou: number }>("/v1/iou", { kind, a, b, camera });
    return body.iou;
  }

  /** Rescale a 3D box (9 values) to the virtual camera. */
  async toVirtualCamera(
    box3d: number[],
    camera: Camera,
    fVirtual = 512.0,
    target: { width: number; height: number } = { width: 672, height: 672 },
  ): Promise<VirtualCameraResult> {
    return this.post<VirtualCameraResult>("/v1/geometry/virtual-camera", {
      box3d,
      camera,
      f_virtual: fVirtual,
      target_width: target.width,
      target_height: target.height,
    });
  }

  /** Axis-aligned 2D projection of a 3D box. */
  async projectBox(box3d: number[], camera: Camera, clip = false): Promise<number[]> {
    const body = await this.post<{ box2d: number[] }>("/v1/geometry/project", {
      box3d,
      camera,
      clip,
    });
    return body.box2d;
  }

  /**
   * Score a prediction file against ground truth on the server. The returned
   * `raw` string is the report's canonical serialization, byte-identical to
   * what the primary CLI writes.
   */
  async evaluateRun(request: EvalRequest): Promise<EvalRunResult> {
    const response = await this.request("/v1/eval/run", request);
    const raw = await response.text();
    return { report: JSON.parse(raw) as EvalReport, raw };
  }

  async standardize(request: StandardizeRequest): Promise<Record<string, unknown>> {
    return this.post("/v1/pipeline/standardize", request);
  }

  async convgen(request: ConvgenRequest): Promise<Record<string, unknown>> {
    return this.post("/v1/pipeline/convgen", request);
  }

  async associate(request: AssociateRequest): Promise<Record<string, unknown>> {
    return this.post("/v1/pipeline/associate", request);
  }
}

/** Wire types mirroring the service's request/response models. */

export type LabelKind = "point2d" | "box2d" | "point3d" | "box3d" | "depth" | "caption";
export type TokenKind = Exclude<LabelKind, "caption">;
export type ProfileMode = "pretrain" | "finetune";
export type IouKind = "2d" | "bev" | "3d";
export type MetricKind = "2d" | "bev" | "3d" | "indoor";

/**
 * A spatial label. Geometric kinds carry `values` in serialization order
 * (point2d [x,y]; box2d [x1,y1,x2,y2]; point3d [x,y,z];
 * box3d [x,y,z,w,h,l,r1,r2,r3]; depth [z]); captions carry `text`.
 */
export interface Label {
  kind: LabelKind;
  values?: number[];
  text?: string;
}

export interface Profile {
  mode: ProfileMode;
  width?: number;
  height?: number;
}

export interface Camera {
  fx: number;
  fy: number;
  cx: number;
  cy: number;
  width: number;
  height: number;
}

export interface ExtractedLabel {
  start: number;
  end: number;
  kind: LabelKind;
  label: Label;
}

export interface VirtualCameraResult {
  box3d: number[];
  camera: Camera;
}

export interface EvalRequest {
  pred_path: string;
  gt_path: string;
  metrics?: MetricKind[];
  threshold_2d?: number;
  profile_a_path?: string | null;
  profile_b_path?: string | null;
  indoor_taus?: number[];
  codec_mode?: ProfileMode;
  width?: number;
  height?: number;
  f_virtual?: number;
}

export interface EvalReport {
  metrics: Record<string, unknown>;
  counts: Record<string, unknown>;
  profiles: Record<string, unknown>;
  config: Record<string, unknown>;
}

/** The evaluation result: parsed report plus the exact bytes the service sent. */
export interface EvalRunResult {
  report: EvalReport;
  raw: string;
}

export interface StandardizeRequest {
  manifest_path: string;
  out_path: string;
  f_virtual?: number;
  width?: number;
  height?: number;
  profile_mode?: ProfileMode;
  seed?: number;
  workers?: number | null;
}

export interface ConvgenRequest {
  scenes_path: string;
  out_path: string;
  n_max?: number;
  stage?: 1 | 2;
  vcot?: boolean;
  specialist?: "gt" | "file" | null;
  specialist_path?: string | null;
  flip_prob?: number;
  seed?: number;
  profile_mode?: ProfileMode;
  width?: number;
  height?: number;
  workers?: number | null;
  manifest_path?: string | null;
  bank_path?: string | null;
}

export interface AssociateRequest {
  labels2d_path: string;
  boxes3d_path: string;
  out_path: string;
  iou_threshold?: number;
  workers?: number | null;
}

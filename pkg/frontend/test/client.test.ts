import path from "node:path";
import { beforeAll, describe, expect, inject, test } from "vitest";

import { GroundboxClient } from "../src/client.js";
import {
  LabelRangeError,
  NotFoundError,
  SampleAlignmentError,
  TokenArityError,
  TokenParseError,
} from "../src/errors.js";
import type { Camera, Profile } from "../src/types.js";

const PROFILE: Profile = { mode: "pretrain", width: 672, height: 672 };
const CAMERA: Camera = { fx: 512, fy: 512, cx: 336, cy: 336, width: 672, height: 672 };

let client: GroundboxClient;
let repoRoot: string;

beforeAll(() => {
  client = new GroundboxClient(inject("serverUrl"));
  repoRoot = inject("repoRoot");
});

describe("health", () => {
  test("reports ok", async () => {
    const body = await client.health();
    expect(body.status).toBe("ok");
  });
});

describe("codec", () => {
  test("extract classifies by arity in order", async () => {
    const found = await client.extractLabels(
      "box [100,200,300,400] then depth [444] then 3d point [010,020,444]",
      PROFILE,
    );
    expect(found.map((e) => e.kind)).toEqual(["box2d", "depth", "point3d"]);
    expect(found[0].start).toBe(4);
  });

  test("malformed string raises a parse error with the primary's byte offset", async () => {
    await expect(client.parseLabel("[10,20]", "point2d", PROFILE)).rejects.toSatisfy(
      (err: unknown) => err instanceof TokenParseError && err.offset === 3,
    );
  });

  test("wrong group count raises an arity error", async () => {
    await expect(client.parseLabel("[100,200,300]", "point2d", PROFILE)).rejects.toSatisfy(
      (err: unknown) => err instanceof TokenArityError && err.expected === 2 && err.got === 3,
    );
  });

  test("out-of-range fields raise a range error naming the field", async () => {
    await expect(
      client.renderLabel(
        { kind: "box3d", values: [100, 100, 10, 16.0, 1, 1, 0, 0, 0] },
        PROFILE,
      ),
    ).rejects.toSatisfy((err: unknown) => err instanceof LabelRangeError && err.field === "w");
  });
});

describe("iou", () => {
  test("half-offset rectangles give one third", async () => {
    const value = await client.iou(
      "2d",
      { kind: "box2d", values: [0, 0, 1, 1] },
      { kind: "box2d", values: [0.5, 0, 1.5, 1] },
    );
    expect(value).toBeCloseTo(1 / 3, 12);
  });

  test("identical boxes have 3D IoU exactly one", async () => {
    const box = { kind: "box3d" as const, values: [336, 336, 10, 1, 1, 1, 0.5, 0, 0] };
    expect(await client.iou("3d", box, box, CAMERA)).toBe(1.0);
    expect(await client.iou("bev", box, box, CAMERA)).toBe(1.0);
  });
});

describe("geometry", () => {
  test("virtual camera halves depth when the focal doubles", async () => {
    const result = await client.toVirtualCamera(
      [336, 336, 10, 1, 1, 1, 0, 0, 0],
      { ...CAMERA, fx: 1024, fy: 1024 },
      512,
    );
    expect(result.box3d[2]).toBe(5.0);
    expect(result.camera.fx).toBe(512.0);
  });

  test("projection brackets the projected center", async () => {
    const box2d = await client.projectBox([336, 336, 10, 1, 1, 1, 0, 0, 0], CAMERA);
    expect(box2d[0]).toBeLessThan(336);
    expect(box2d[2]).toBeGreaterThan(336);
  });
});

describe("eval errors", () => {
  test("missing files raise NotFoundError", async () => {
    await expect(
      client.evaluateRun({ pred_path: "/nope/p.jsonl", gt_path: "/nope/g.jsonl" }),
    ).rejects.toBeInstanceOf(NotFoundError);
  });

  test("sample id mismatches raise SampleAlignmentError with offenders", async () => {
    const gt = path.join(repoRoot, "tests", "data", "parity", "gts.jsonl");
    const { mkdtempSync, writeFileSync } = await import("node:fs");
    const { tmpdir } = await import("node:os");
    const dir = mkdtempSync(path.join(tmpdir(), "groundbox-align-"));
    const pred = path.join(dir, "preds.jsonl");
    writeFileSync(pred, JSON.stringify({ sample_id: "ghost", text: "[444]" }) + "\n");
    await expect(
      client.evaluateRun({ pred_path: pred, gt_path: gt, metrics: ["3d"] }),
    ).rejects.toSatisfy(
      (err: unknown) => err instanceof SampleAlignmentError && err.missingGt.includes("ghost"),
    );
  });
});

"""Regenerate the shared parity fixtures under tests/data/.

The label corpus freezes token strings for 1,000 labels across both codec
profiles; the eval fixture freezes a full canonical report. The TypeScript
client's tests replay the same corpus through the HTTP service and compare
byte for byte.

Usage: python scripts/make_parity_fixtures.py
"""

from __future__ import annotations

import json
import random
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

from groundbox.codec import CodecProfile, Depth, render_label
from groundbox.evaluation import EvalConfig, evaluate_run, load_threshold_profile
from groundbox.geometry import Box2D, Box3D, Point2D, Point3D

from helpers import grid_box3d, random_label

DATA_DIR = ROOT / "tests" / "data" / "parity"
PROFILE_A = ROOT / "src" / "groundbox" / "profiles" / "threshold_a.json"
PROFILE_B = ROOT / "src" / "groundbox" / "profiles" / "threshold_b.json"


def label_payload(label) -> dict:
    if isinstance(label, Point2D):
        return {"kind": "point2d", "values": [label.x, label.y]}
    if isinstance(label, Box2D):
        return {"kind": "box2d", "values": [label.x1, label.y1, label.x2, label.y2]}
    if isinstance(label, Point3D):
        return {"kind": "point3d", "values": [label.xh, label.yh, label.z]}
    if isinstance(label, Box3D):
        return {
            "kind": "box3d",
            "values": [label.xh, label.yh, label.z, label.w, label.h, label.l, label.r1, label.r2, label.r3],
        }
    if isinstance(label, Depth):
        return {"kind": "depth", "values": [label.z]}
    raise TypeError(label)


def make_label_corpus() -> None:
    rng = random.Random(1337)
    kinds = ["point2d", "box2d", "point3d", "box3d", "depth"]
    rows = []
    for mode in ("pretrain", "finetune"):
        profile = CodecProfile.pretrain() if mode == "pretrain" else CodecProfile.finetune()
        for _ in range(500):
            label = random_label(rng, profile, rng.choice(kinds))
            rows.append(
                {
                    "profile": {"mode": mode, "width": 672.0, "height": 672.0},
                    "label": label_payload(label),
                    "expected": render_label(label, profile),
                }
            )
    out = DATA_DIR / "labels.json"
    out.write_text(json.dumps({"labels": rows}, indent=1) + "\n")
    print(f"wrote {len(rows)} labels to {out}")


def make_eval_fixture() -> None:
    rng = random.Random(4711)
    profile = CodecProfile.finetune()
    gts, preds = [], []
    categories = ["car", "truck", "pedestrian", "bicycle"]
    for i in range(40):
        gt = grid_box3d(rng, profile)
        if i % 5 == 0:
            text = "I could not localize the object."
        else:
            # perturb some predictions so the metrics are non-trivial
            pred = gt
            if i % 3 == 0:
                pred = grid_box3d(rng, profile)
            preds_text = render_label(pred, profile)
            text = f"The object is at {preds_text}."
        gts.append(
            {
                "sample_id": f"sample-{i:03d}",
                "category": categories[i % len(categories)],
                "box3d": [gt.xh, gt.yh, gt.z, gt.w, gt.h, gt.l, gt.r1, gt.r2, gt.r3],
            }
        )
        preds.append({"sample_id": f"sample-{i:03d}", "text": text})

    gt_path = DATA_DIR / "gts.jsonl"
    pred_path = DATA_DIR / "preds.jsonl"
    gt_path.write_text("\n".join(json.dumps(r) for r in gts) + "\n")
    pred_path.write_text("\n".join(json.dumps(r) for r in preds) + "\n")

    config = EvalConfig(
        metrics=("bev", "3d", "indoor"),
        profile_a=load_threshold_profile(PROFILE_A),
        profile_b=load_threshold_profile(PROFILE_B),
        codec_mode="finetune",
    )
    report = evaluate_run(pred_path, gt_path, config)
    golden = DATA_DIR / "golden_report.json"
    golden.write_text(report.to_json())
    print(f"wrote eval fixture ({len(gts)} samples) and golden report to {DATA_DIR}")


if __name__ == "__main__":
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    make_label_corpus()
    make_eval_fixture()

"""Grounding metrics: top-1 accuracy at an IoU threshold, per-category
threshold profiles, and the indoor multi-threshold mAP.

"AP" here follows the referring-expression convention: each sample has one
target and one predicted box, so the metric is the percentage of samples whose
prediction beats the IoU threshold (strict ``>``). Predictions that fail to
parse count as misses, never as skips.

Wire formats (one JSON object per line):

* predictions  ``{"sample_id": str, "text": str}`` with raw model output;
  labels are extracted here.
* ground truth ``{"sample_id": str, "category": str, "box2d": [4]?,
  "box3d": [7|9]?, "extra_objects": [{"category"?, "box2d"?, "box3d"?}]?}``.

Reports serialize to canonical JSON (sorted keys) so they diff cleanly.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from .codec import CodecProfile, ExtractedLabel, LabelKind, extract_labels
from .errors import EvalDataError, SampleAlignmentError
from .geometry import Box2D, Box3D, CameraIntrinsics, virtual_intrinsics
from .iou import bev_iou, iou_2d, iou_3d

IOU_KINDS = ("2d", "bev", "3d")
DEFAULT_INDOOR_TAUS = (0.15, 0.25, 0.5)


@dataclass(frozen=True)
class ThresholdProfile:
    """Per-category IoU thresholds with a default for unlisted categories."""

    name: str
    thresholds: Mapping[str, float]
    default: float = 0.5
    source: str = ""

    def __post_init__(self):
        for cat, t in {**dict(self.thresholds), "<default>": self.default}.items():
            if not 0.0 < t <= 1.0:
                raise ValueError(f"profile {self.name!r}: threshold for {cat} must be in (0, 1]")

    def threshold_for(self, category: str) -> float:
        return self.thresholds.get(category, self.default)

    @classmethod
    def uniform(cls, name: str, threshold: float) -> "ThresholdProfile":
        return cls(name=name, thresholds={}, default=threshold)


def load_threshold_profile(path) -> ThresholdProfile:
    with open(path, encoding="utf-8") as fh:
        d = json.load(fh)
    return ThresholdProfile(
        name=str(d["name"]),
        thresholds={str(k): float(v) for k, v in d.get("thresholds", {}).items()},
        default=float(d.get("default", 0.5)),
        source=str(path),
    )


@dataclass(frozen=True)
class GtObject:
    category: str = ""
    box2d: Box2D | None = None
    box3d: Box3D | None = None


@dataclass(frozen=True)
class GroundTruthRecord:
    sample_id: str
    category: str
    box2d: Box2D | None = None
    box3d: Box3D | None = None
    extras: tuple[GtObject, ...] = ()

    def gt_set_3d(self) -> list[Box3D]:
        boxes = [o.box3d for o in (GtObject(self.category, self.box2d, self.box3d),) + self.extras]
        return [b for b in boxes if b is not None]


@dataclass(frozen=True)
class PredictionRecord:
    sample_id: str
    text: str
    labels: tuple[ExtractedLabel, ...]
    confidence: float | None = None

    @property
    def parse_failed(self) -> bool:
        return not self.labels

    def last_label(self, kind: LabelKind):
        for item in reversed(self.labels):
            if item.kind is kind:
                return item.label
        return None


def _box3d_from_list(values: Sequence[float]) -> Box3D:
    vals = [float(v) for v in values]
    if len(vals) == 7:
        vals += [0.0, 0.0]
    if len(vals) != 9:
        raise ValueError(f"box3d needs 7 or 9 values, got {len(vals)}")
    return Box3D(*vals)


def read_ground_truth(path) -> dict[str, GroundTruthRecord]:
    out: dict[str, GroundTruthRecord] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            d = json.loads(line)
            sid = str(d["sample_id"])
            if sid in out:
                raise EvalDataError(f"duplicate ground-truth sample id {sid!r}")
            extras = tuple(
                GtObject(
                    category=str(e.get("category", "")),
                    box2d=Box2D(*map(float, e["box2d"])) if "box2d" in e else None,
                    box3d=_box3d_from_list(e["box3d"]) if "box3d" in e else None,
                )
                for e in d.get("extra_objects", ())
            )
            out[sid] = GroundTruthRecord(
                sample_id=sid,
                category=str(d.get("category", "")),
                box2d=Box2D(*map(float, d["box2d"])) if "box2d" in d else None,
                box3d=_box3d_from_list(d["box3d"]) if "box3d" in d else None,
                extras=extras,
            )
    return out


def read_predictions(path, profile: CodecProfile) -> dict[str, PredictionRecord]:
    out: dict[str, PredictionRecord] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            d = json.loads(line)
            sid = str(d["sample_id"])
            if sid in out:
                raise EvalDataError(f"duplicate prediction sample id {sid!r}")
            text = str(d.get("text", ""))
            conf = d.get("confidence")
            out[sid] = PredictionRecord(
                sample_id=sid,
                text=text,
                labels=tuple(extract_labels(text, profile)),
                confidence=None if conf is None else float(conf),
            )
    return out


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


def _sample_iou(
    pred: PredictionRecord,
    gt: GroundTruthRecord,
    iou_kind: str,
    cam: CameraIntrinsics,
) -> float | None:
    """IoU of the final predicted box of the right kind, or None on parse miss."""
    if iou_kind == "2d":
        if gt.box2d is None:
            raise EvalDataError(f"sample {gt.sample_id!r} has no 2D ground truth")
        box = pred.last_label(LabelKind.BOX2D)
        return None if box is None else iou_2d(box, gt.box2d)
    if iou_kind in ("bev", "3d"):
        if gt.box3d is None:
            raise EvalDataError(f"sample {gt.sample_id!r} has no 3D ground truth")
        box = pred.last_label(LabelKind.BOX3D)
        if box is None:
            return None
        fn = bev_iou if iou_kind == "bev" else iou_3d
        return fn(box, gt.box3d, cam)
    raise ValueError(f"unknown IoU kind {iou_kind!r}; expected one of {IOU_KINDS}")


def _aligned_ids(preds: Mapping[str, Any], gts: Mapping[str, Any]) -> list[str]:
    missing_gt = sorted(set(preds) - set(gts))
    missing_pred = sorted(set(gts) - set(preds))
    if missing_gt or missing_pred:
        raise SampleAlignmentError(missing_gt, missing_pred)
    if not gts:
        raise EvalDataError("no samples to evaluate")
    return sorted(gts)


def grounding_accuracy(
    preds: Mapping[str, PredictionRecord],
    gts: Mapping[str, GroundTruthRecord],
    iou_kind: str,
    threshold: float,
    cam: CameraIntrinsics | None = None,
) -> float:
    """Percentage of samples whose predicted box beats the threshold strictly."""
    cam = cam or virtual_intrinsics()
    ids = _aligned_ids(preds, gts)
    hits = 0
    for sid in ids:
        value = _sample_iou(preds[sid], gts[sid], iou_kind, cam)
        hits += value is not None and value > threshold
    return 100.0 * hits / len(ids)


def ap_profile(
    preds: Mapping[str, PredictionRecord],
    gts: Mapping[str, GroundTruthRecord],
    iou_kind: str,
    profile: ThresholdProfile,
    cam: CameraIntrinsics | None = None,
) -> float:
    """Grounding accuracy with the IoU threshold looked up per GT category."""
    cam = cam or virtual_intrinsics()
    ids = _aligned_ids(preds, gts)
    hits = 0
    for sid in ids:
        value = _sample_iou(preds[sid], gts[sid], iou_kind, cam)
        hits += value is not None and value > profile.threshold_for(gts[sid].category)
    return 100.0 * hits / len(ids)


def indoor_map(
    preds: Mapping[str, PredictionRecord],
    gts: Mapping[str, GroundTruthRecord],
    taus: Sequence[float] = DEFAULT_INDOOR_TAUS,
    cam: CameraIntrinsics | None = None,
) -> float:
    """Mean over tau of precision at 3D IoU > tau, scoring max IoU per sample.

    A sample may carry several ground-truth objects for its prompt; the
    prediction scores against the best of them.
    """
    cam = cam or virtual_intrinsics()
    ids = _aligned_ids(preds, gts)
    per_tau_hits = [0] * len(taus)
    for sid in ids:
        gt_boxes = gts[sid].gt_set_3d()
        if not gt_boxes:
            raise EvalDataError(f"sample {sid!r} has an empty 3D ground-truth set")
        box = preds[sid].last_label(LabelKind.BOX3D)
        best = max((iou_3d(box, g, cam) for g in gt_boxes), default=0.0) if box is not None else 0.0
        for k, tau in enumerate(taus):
            per_tau_hits[k] += best > tau
    n = len(ids)
    return 100.0 * sum(h / n for h in per_tau_hits) / len(taus)


# ---------------------------------------------------------------------------
# Whole-run evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EvalConfig:
    metrics: tuple[str, ...] = ("2d", "bev", "3d")
    threshold_2d: float = 0.5
    profile_a: ThresholdProfile | None = None
    profile_b: ThresholdProfile | None = None
    indoor_taus: tuple[float, ...] = DEFAULT_INDOOR_TAUS
    codec_mode: str = "finetune"
    image_width: float = 672.0
    image_height: float = 672.0
    f_virtual: float = 512.0

    def codec_profile(self) -> CodecProfile:
        factory = CodecProfile.pretrain if self.codec_mode == "pretrain" else CodecProfile.finetune
        return factory(self.image_width, self.image_height)

    def camera(self) -> CameraIntrinsics:
        return virtual_intrinsics(self.f_virtual, self.image_width, self.image_height)


@dataclass
class EvalReport:
    metrics: dict[str, Any] = field(default_factory=dict)
    counts: dict[str, Any] = field(default_factory=dict)
    profiles: dict[str, Any] = field(default_factory=dict)
    config: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "metrics": self.metrics,
            "counts": self.counts,
            "profiles": self.profiles,
            "config": self.config,
        }

    def to_json(self) -> str:
        """Canonical serialization: sorted keys, fixed separators, newline-terminated."""
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def evaluate_run(pred_path, gt_path, config: EvalConfig) -> EvalReport:
    """Score a prediction file against a ground-truth file per the config."""
    profile = config.codec_profile()
    cam = config.camera()
    preds = read_predictions(pred_path, profile)
    gts = read_ground_truth(gt_path)
    ids = _aligned_ids(preds, gts)

    report = EvalReport()
    miss_counts: dict[str, int] = {}
    for kind in config.metrics:
        if kind == "2d":
            report.metrics[f"ap2d_iou{config.threshold_2d:g}"] = grounding_accuracy(
                preds, gts, "2d", config.threshold_2d, cam
            )
            miss_counts["2d"] = sum(preds[s].last_label(LabelKind.BOX2D) is None for s in ids)
        elif kind in ("bev", "3d"):
            block: dict[str, float] = {}
            for key, prof in (("A", config.profile_a), ("B", config.profile_b)):
                if prof is not None:
                    block[key] = ap_profile(preds, gts, kind, prof, cam)
                    # basename only: reports must not vary with checkout location
                    source = os.path.basename(prof.source) if prof.source else ""
                    report.profiles.setdefault(
                        key, {"name": prof.name, "default": prof.default, "source": source}
                    )
            if block:
                report.metrics[f"ap_{kind}"] = block
            miss_counts[kind] = sum(preds[s].last_label(LabelKind.BOX3D) is None for s in ids)
        elif kind == "indoor":
            report.metrics["indoor_map"] = indoor_map(preds, gts, config.indoor_taus, cam)
            report.metrics["indoor_taus"] = list(config.indoor_taus)
            miss_counts.setdefault(
                "3d", sum(preds[s].last_label(LabelKind.BOX3D) is None for s in ids)
            )
        else:
            raise ValueError(f"unknown metric {kind!r}")

    report.counts = {
        "samples": len(ids),
        "unparsed_predictions": sum(preds[s].parse_failed for s in ids),
        "parse_misses": miss_counts,
    }
    report.config = {
        "codec_mode": config.codec_mode,
        "image_size": [config.image_width, config.image_height],
        "f_virtual": config.f_virtual,
        "metrics": list(config.metrics),
        "threshold_2d": config.threshold_2d,
    }
    return report

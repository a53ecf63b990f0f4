"""Batch pipeline drivers shared by the HTTP service and the CLI.

All drivers stream JSONL line by line, derive per-scene seeds from the global
seed so worker count never changes output, and report error counts instead of
dying on the first bad record.
"""

from __future__ import annotations

import json
from typing import Any

from .assoc import AssociationResult, associate
from .codec import CodecProfile
from .convgen import (
    Conversation,
    SpecialistCandidate,
    TemplateBank,
    build_conversation,
    conversation_to_dict,
    maybe_flip,
)
from .dataset import (
    derive_rng,
    filter_objects,
    ingest,
    load_manifest,
    standardize_scene,
    stats,
)
from .errors import GroundboxError
from .evaluation import EvalConfig, EvalReport, evaluate_run
from .geometry import Box2D, Box3D, CameraIntrinsics
from .parallel import ordered_map
from .records import SceneRecord, read_scenes, scene_to_json


def make_profile(mode: str, width: float = 672.0, height: float = 672.0) -> CodecProfile:
    if mode == "pretrain":
        return CodecProfile.pretrain(width, height)
    if mode == "finetune":
        return CodecProfile.finetune(width, height)
    raise GroundboxError(f"unknown profile mode {mode!r}")


# ---------------------------------------------------------------------------
# standardize
# ---------------------------------------------------------------------------


def run_standardize(
    manifest_path: str,
    out_path: str,
    f_virtual: float = 512.0,
    target: tuple[float, float] = (672.0, 672.0),
    profile_mode: str = "pretrain",
    seed: int = 0,
    workers: int | None = None,
) -> dict[str, Any]:
    """Ingest every manifest source, standardize, range-filter, write scene JSONL."""
    manifest = load_manifest(manifest_path)
    profile = make_profile(profile_mode, target[0], target[1])

    ingest_errors: list[dict[str, Any]] = []
    scenes: list[SceneRecord] = []
    for entry in manifest.entries:
        result = ingest(entry.path, entry.adapter)
        for issue in result.issues:
            ingest_errors.append({"source": entry.name, "line": issue.line, "message": issue.message})
        scenes.extend(result.scenes)

    def process(scene: SceneRecord):
        standardized = standardize_scene(scene, f_virtual, target)
        return filter_objects(standardized, profile)

    results = ordered_map(process, scenes, workers)
    kept = [r.scene for r in results]
    removed = sum(r.removed_count for r in results)

    with open(out_path, "w", encoding="utf-8") as fh:
        for scene in kept:
            fh.write(scene_to_json(scene) + "\n")

    summary = stats(kept).to_dict()
    summary["serialized_box3d_fields"] = ["xh", "yh", "z", "w", "h", "l", *profile.angle_fields]
    return {
        "scenes_written": len(kept),
        "objects_removed": removed,
        "ingest_errors": ingest_errors,
        "profile_mode": profile_mode,
        "seed": seed,
        "stats": summary,
    }


# ---------------------------------------------------------------------------
# convgen
# ---------------------------------------------------------------------------


def _load_specialist_file(path: str) -> dict[str, list[SpecialistCandidate]]:
    out: dict[str, list[SpecialistCandidate]] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            d = json.loads(line)
            candidates = [
                SpecialistCandidate(
                    box=Box3D(*map(float, b["box3d"])),
                    confidence=None if b.get("confidence") is None else float(b["confidence"]),
                )
                for b in d.get("boxes", ())
            ]
            out[str(d["scene_ref"])] = candidates
    return out


def run_convgen(
    scenes_path: str,
    out_path: str,
    n_max: int = 30,
    stage: int = 2,
    vcot: bool = False,
    specialist: str | None = None,
    specialist_path: str | None = None,
    flip_prob: float = 0.0,
    seed: int = 0,
    profile_mode: str = "pretrain",
    width: float = 672.0,
    height: float = 672.0,
    workers: int | None = None,
    manifest_path: str | None = None,
    bank_path: str | None = None,
) -> dict[str, Any]:
    """Generate one conversation per scene into a JSONL file.

    ``specialist`` is "gt" (scene's own boxes as system-prompt candidates) or
    "file" with ``specialist_path`` pointing at per-scene candidates.
    """
    profile = make_profile(profile_mode, width, height)
    bank = TemplateBank.load(bank_path)
    scenes = list(read_scenes(scenes_path))

    source_2d_only: dict[str, bool] = {}
    if manifest_path:
        manifest = load_manifest(manifest_path)
        source_2d_only = {e.name: e.stage1_2d_only for e in manifest.entries}

    candidates_by_scene: dict[str, list[SpecialistCandidate]] = {}
    if specialist == "file":
        if not specialist_path:
            raise GroundboxError("specialist mode 'file' needs a candidate file path")
        candidates_by_scene = _load_specialist_file(specialist_path)
    elif specialist not in (None, "gt", "file"):
        raise GroundboxError(f"unknown specialist mode {specialist!r}")

    def process(indexed: tuple[int, SceneRecord]) -> Conversation:
        index, scene = indexed
        rng = derive_rng("convgen", seed, index, scene.image_ref)
        if flip_prob > 0:
            scene = maybe_flip(scene, rng, flip_prob)
        cands = None
        if specialist == "gt":
            cands = [SpecialistCandidate(o.box3d) for o in scene.objects if o.box3d is not None]
        elif specialist == "file":
            cands = candidates_by_scene.get(scene.image_ref, [])
        use_2d_only = source_2d_only.get(scene.source, True) if stage == 1 else False
        return build_conversation(
            scene,
            profile=profile,
            bank=bank,
            rng=rng,
            n_max=n_max,
            stage=stage,
            use_2d_only=use_2d_only,
            vcot=vcot,
            specialist=cands,
            seed=seed,
        )

    conversations = ordered_map(process, list(enumerate(scenes)), workers)
    pairs = 0
    with open(out_path, "w", encoding="utf-8") as fh:
        for conv in conversations:
            fh.write(json.dumps(conversation_to_dict(conv), separators=(",", ":")) + "\n")
            pairs += conv.n_pairs
    return {
        "conversations_written": len(conversations),
        "qa_pairs": pairs,
        "seed": seed,
        "stage": stage,
        "vcot": vcot,
    }


# ---------------------------------------------------------------------------
# associate
# ---------------------------------------------------------------------------


def _read_jsonl(path: str) -> list[dict[str, Any]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out


def run_associate(
    labels2d_path: str,
    boxes3d_path: str,
    out_path: str,
    iou_threshold: float = 0.35,
    workers: int | None = None,
) -> dict[str, Any]:
    """Associate per-scene labeled 2D boxes with 3D boxes by projected IoU.

    Inputs are JSONL keyed by scene_ref: labels carry ``boxes2d`` ([x1,y1,x2,y2]
    lists), boxes carry ``camera`` and ``boxes3d`` (9-value lists).
    """
    label_rows = _read_jsonl(labels2d_path)
    labels_by_scene = {str(d["scene_ref"]): d for d in label_rows}
    boxes_by_scene = {str(d["scene_ref"]): d for d in _read_jsonl(boxes3d_path)}
    missing = sorted(set(labels_by_scene) ^ set(boxes_by_scene))
    if missing:
        raise GroundboxError(f"scene_ref mismatch between inputs: {missing[:10]}")

    refs = [str(d["scene_ref"]) for d in label_rows]

    def process(ref: str) -> tuple[str, AssociationResult]:
        labels = [Box2D(*map(float, b)) for b in labels_by_scene[ref].get("boxes2d", ())]
        raw = boxes_by_scene[ref]
        cam = CameraIntrinsics(**{k: float(v) for k, v in raw["camera"].items() if k != "virtual"})
        boxes = [Box3D(*map(float, b)) for b in raw.get("boxes3d", ())]
        return ref, associate(labels, boxes, cam, iou_threshold)

    results = ordered_map(process, refs, workers)
    total_pairs = 0
    total_skipped = 0
    with open(out_path, "w", encoding="utf-8") as fh:
        for ref, res in results:
            total_pairs += len(res.pairs)
            total_skipped += len(res.skipped)
            fh.write(
                json.dumps(
                    {
                        "scene_ref": ref,
                        "pairs": [
                            {"label_index": p.label_index, "box_index": p.box_index, "iou": p.iou}
                            for p in res.pairs
                        ],
                        "skipped": [
                            {"box_index": s.box_index, "reason": s.reason} for s in res.skipped
                        ],
                    },
                    separators=(",", ":"),
                )
                + "\n"
            )
    return {"scenes": len(results), "pairs_kept": total_pairs, "boxes_skipped": total_skipped}


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------


def run_eval(pred_path: str, gt_path: str, config: EvalConfig) -> EvalReport:
    return evaluate_run(pred_path, gt_path, config)

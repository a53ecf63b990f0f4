"""Dataset ingestion, virtual-camera standardization, range filtering, sampling.

Sources are described by a YAML manifest listing per-source annotation files
and their stage-1 / stage-2 sampling multiples:

    sources:
      - name: nuscenes-front
        path: exports/nuscenes.jsonl
        adapter: scene
        stage1_multiple: 1.0
        stage2_multiple: 2.0
        has_3d: true
        flip_allowed: true
        stage1_2d_only: true

Adapters turn one JSONL line into a SceneRecord; the native ``scene`` adapter
reads the schema documented in records.py, and ``simple2d`` covers flat 2D
exports without camera calibration.
"""

from __future__ import annotations

import hashlib
import random
from collections import Counter
from dataclasses import dataclass, replace
from typing import Any, Callable, Iterable, Mapping

import json

import yaml

from .codec import CodecProfile, QuantSpec
from .errors import GroundboxError, StandardizeError
from .geometry import Box2D, CameraIntrinsics, Point2D, to_virtual_camera
from .records import (
    ObjectRecord,
    SceneRecord,
    caption_mentions_orientation,
    scene_from_dict,
)


def derive_rng(*parts: Any) -> random.Random:
    """A deterministic RNG keyed by the given parts.

    Hash-based derivation keeps per-scene streams independent of worker
    scheduling, so parallel runs reproduce sequential output byte for byte.
    """
    key = "\x1f".join(str(p) for p in parts).encode("utf-8")
    seed = int.from_bytes(hashlib.sha256(key).digest()[:8], "big")
    return random.Random(seed)


# ---------------------------------------------------------------------------
# Manifest
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ManifestEntry:
    name: str
    path: str
    adapter: str = "scene"
    stage1_multiple: float = 0.0
    stage2_multiple: float = 0.0
    has_3d: bool = False
    flip_allowed: bool = True
    stage1_2d_only: bool = True

    def __post_init__(self):
        if self.stage1_multiple < 0 or self.stage2_multiple < 0:
            raise ValueError(f"source {self.name!r}: multiples must be >= 0")

    def multiple(self, stage: int) -> float:
        return self.stage1_multiple if stage == 1 else self.stage2_multiple


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[ManifestEntry, ...]

    def __post_init__(self):
        names = [e.name for e in self.entries]
        if len(names) != len(set(names)):
            raise ValueError("duplicate source names in manifest")


def load_manifest(path) -> DatasetManifest:
    with open(path, encoding="utf-8") as fh:
        doc = yaml.safe_load(fh) or {}
    entries = []
    for raw in doc.get("sources", []):
        entries.append(
            ManifestEntry(
                name=str(raw["name"]),
                path=str(raw["path"]),
                adapter=str(raw.get("adapter", "scene")),
                stage1_multiple=float(raw.get("stage1_multiple", 0.0)),
                stage2_multiple=float(raw.get("stage2_multiple", 0.0)),
                has_3d=bool(raw.get("has_3d", False)),
                flip_allowed=bool(raw.get("flip_allowed", True)),
                stage1_2d_only=bool(raw.get("stage1_2d_only", True)),
            )
        )
    return DatasetManifest(entries=tuple(entries))


# ---------------------------------------------------------------------------
# Ingestion
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IngestIssue:
    line: int
    message: str


@dataclass
class IngestResult:
    scenes: list[SceneRecord]
    issues: list[IngestIssue]


def _adapt_scene(d: dict[str, Any]) -> SceneRecord:
    return scene_from_dict(d)


def _adapt_simple2d(d: dict[str, Any]) -> SceneRecord:
    """Flat 2D export: image size plus a list of category/bbox objects.

    2D-only sources carry no calibration, so a nominal camera with a centered
    principal point stands in; it is never used for metric geometry.
    """
    width = float(d["width"])
    height = float(d["height"])
    cam = CameraIntrinsics(
        fx=max(width, height),
        fy=max(width, height),
        cx=width / 2.0,
        cy=height / 2.0,
        width=width,
        height=height,
    )
    objects = []
    for i, raw in enumerate(d.get("objects", [])):
        x1, y1, x2, y2 = map(float, raw["bbox"])
        caption = raw.get("caption")
        objects.append(
            ObjectRecord(
                id=str(raw.get("id", f"obj{i}")),
                category=str(raw["category"]),
                attributes=tuple(str(a) for a in raw.get("attributes", ())),
                caption=caption,
                box2d=Box2D(x1, y1, x2, y2),
                orientation_sensitive=caption_mentions_orientation(caption),
            )
        )
    return SceneRecord(
        image_ref=str(d["image"]),
        intrinsics=cam,
        objects=tuple(objects),
        source=str(d.get("source", "")),
        split=str(d.get("split", "train")),
    )


ADAPTERS: dict[str, Callable[[dict[str, Any]], SceneRecord]] = {
    "scene": _adapt_scene,
    "simple2d": _adapt_simple2d,
}


def ingest(path, adapter: str = "scene") -> IngestResult:
    """Read one JSONL annotation file into SceneRecords.

    Bad lines are collected into the issue list with their line numbers, never
    silently dropped.
    """
    try:
        adapt = ADAPTERS[adapter]
    except KeyError:
        raise GroundboxError(f"unknown adapter {adapter!r}; have {sorted(ADAPTERS)}") from None
    scenes: list[SceneRecord] = []
    issues: list[IngestIssue] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                scenes.append(adapt(json.loads(line)))
            except (ValueError, KeyError, TypeError) as exc:
                issues.append(IngestIssue(lineno, f"{type(exc).__name__}: {exc}"))
    return IngestResult(scenes=scenes, issues=issues)


# ---------------------------------------------------------------------------
# Standardization and filtering
# ---------------------------------------------------------------------------


def standardize_scene(
    scene: SceneRecord,
    f_virtual: float = 512.0,
    target: tuple[float, float] = (672.0, 672.0),
) -> SceneRecord:
    """Rescale a scene to the virtual camera; idempotent once standardized."""
    cam = scene.intrinsics
    tw, th = float(target[0]), float(target[1])
    if not (tw > 0 and th > 0) or not f_virtual > 0:
        raise ValueError(f"degenerate target size {target} or focal {f_virtual}")
    sx = tw / cam.width
    sy = th / cam.height
    vcam = CameraIntrinsics(
        fx=f_virtual, fy=f_virtual, cx=cam.cx * sx, cy=cam.cy * sy, width=tw, height=th
    )
    new_objects = []
    for o in scene.objects:
        try:
            box3d = None
            if o.box3d is not None:
                box3d, _ = to_virtual_camera(o.box3d, cam, f_virtual, target)
            box2d = None
            if o.box2d is not None:
                box2d = Box2D(o.box2d.x1 * sx, o.box2d.y1 * sy, o.box2d.x2 * sx, o.box2d.y2 * sy)
            point2d = None
            if o.point2d is not None:
                point2d = Point2D(o.point2d.x * sx, o.point2d.y * sy)
        except (ValueError, GroundboxError) as exc:
            raise StandardizeError(o.id, str(exc)) from exc
        new_objects.append(replace(o, box2d=box2d, box3d=box3d, point2d=point2d))
    return replace(scene, intrinsics=vcam, objects=tuple(new_objects), standardized=True)


@dataclass(frozen=True)
class RemovedObject:
    object_id: str
    field: str
    value: float


@dataclass
class FilterResult:
    scene: SceneRecord
    removed: tuple[RemovedObject, ...]

    @property
    def removed_count(self) -> int:
        return len(self.removed)


def _range_checks(o: ObjectRecord, profile: CodecProfile) -> list[tuple[str, float, QuantSpec]]:
    checks: list[tuple[str, float, QuantSpec]] = []
    if o.box3d is not None:
        b = o.box3d
        checks += [
            ("box3d.xh", b.xh, profile.x),
            ("box3d.yh", b.yh, profile.y),
            ("box3d.z", b.z, profile.z),
            ("box3d.w", b.w, profile.w),
            ("box3d.h", b.h, profile.h),
            ("box3d.l", b.l, profile.l),
        ]
        for name in profile.angle_fields:
            checks.append((f"box3d.{name}", getattr(b, name), getattr(profile, name)))
    if o.box2d is not None:
        checks += [
            ("box2d.x1", o.box2d.x1, profile.x),
            ("box2d.y1", o.box2d.y1, profile.y),
            ("box2d.x2", o.box2d.x2, profile.x),
            ("box2d.y2", o.box2d.y2, profile.y),
        ]
    if o.point2d is not None:
        checks += [("point2d.x", o.point2d.x, profile.x), ("point2d.y", o.point2d.y, profile.y)]
    return checks


def filter_objects(scene: SceneRecord, profile: CodecProfile) -> FilterResult:
    """Drop objects with any serialized field outside its quantization range."""
    kept = []
    removed = []
    for o in scene.objects:
        bad = next(
            ((name, value) for name, value, spec in _range_checks(o, profile) if not spec.contains(value)),
            None,
        )
        if bad is None:
            kept.append(o)
        else:
            removed.append(RemovedObject(o.id, bad[0], bad[1]))
    return FilterResult(scene=replace(scene, objects=tuple(kept)), removed=tuple(removed))


_VOWELS = "aeiou"


def enrich_caption(o: ObjectRecord) -> str:
    """Deterministic referring text from attributes and class name.

    The attribute order is preserved; the article follows the first word.
    """
    category = o.category.strip().lower()
    if not category:
        raise ValueError(f"object {o.id!r} has an empty category")
    words = [a.strip().lower() for a in o.attributes if a.strip()]
    words.append(category)
    article = "an" if words[0][0] in _VOWELS else "a"
    return " ".join([article] + words)


# ---------------------------------------------------------------------------
# Epoch sampling and statistics
# ---------------------------------------------------------------------------


def count_lines(path) -> int:
    n = 0
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                n += 1
    return n


def epoch_sample(
    manifest: DatasetManifest,
    stage: int,
    seed: int,
    sizes: Mapping[str, int] | None = None,
) -> list[tuple[str, int]]:
    """One epoch's (source, scene index) order under the stage multiples.

    A multiple m contributes floor(m) full passes plus a fresh seeded random
    subset of round(frac(m) * N) distinct indices, then the whole list is
    shuffled. Identical seeds give identical output.
    """
    if stage not in (1, 2):
        raise ValueError(f"stage must be 1 or 2, got {stage}")
    if sizes is None:
        sizes = {e.name: count_lines(e.path) for e in manifest.entries}
    picks: list[tuple[str, int]] = []
    for entry in manifest.entries:
        m = entry.multiple(stage)
        n = sizes.get(entry.name, 0)
        if n <= 0 or m <= 0:
            continue
        whole = int(m)
        indices = list(range(n)) * whole
        k = int(round((m - whole) * n))
        if k > 0:
            indices += derive_rng("epoch", seed, stage, entry.name).sample(range(n), k)
        picks += [(entry.name, i) for i in indices]
    derive_rng("epoch-order", seed, stage).shuffle(picks)
    return picks


@dataclass
class DatasetStats:
    images: int = 0
    objects: int = 0
    per_category: dict[str, int] = None  # type: ignore[assignment]
    with_box2d: int = 0
    with_box3d: int = 0
    with_point2d: int = 0
    with_caption: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "images": self.images,
            "objects": self.objects,
            "per_category": dict(sorted(self.per_category.items())),
            "with_box2d": self.with_box2d,
            "with_box3d": self.with_box3d,
            "with_point2d": self.with_point2d,
            "with_caption": self.with_caption,
        }


def stats(scenes: Iterable[SceneRecord]) -> DatasetStats:
    counts = Counter()
    out = DatasetStats(per_category=counts)
    for s in scenes:
        out.images += 1
        for o in s.objects:
            out.objects += 1
            counts[o.category] += 1
            out.with_box2d += o.box2d is not None
            out.with_box3d += o.box3d is not None
            out.with_point2d += o.point2d is not None
            out.with_caption += o.caption is not None
    return out

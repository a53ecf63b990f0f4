"""Scene and object records plus the normative scene JSONL schema.

One scene per line. Units are pixels for image coordinates, meters for depth
and extents, radians for angles:

    {"image": str, "source": str, "split": "train"|"val"|"test",
     "camera": {"fx", "fy", "cx", "cy", "width", "height", "virtual": bool},
     "objects": [{"id": str, "category": str, "attributes": [str, ...],
                  "caption": str (optional),
                  "box2d": [x1, y1, x2, y2] (optional),
                  "box3d": [xh, yh, z, w, h, l, r1, r2, r3] (optional),
                  "point2d": [x, y] (optional),
                  "orientation_sensitive": bool}]}

``camera.virtual`` is true once the scene has been standardized to the
virtual camera. Optional keys are omitted when absent, so a read-write cycle
is lossless.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Any, Iterable, Iterator

from .geometry import (
    Box2D,
    Box3D,
    CameraIntrinsics,
    Point2D,
    flip_box2d,
    flip_box3d,
    flip_point2d,
)

SPLITS = ("train", "val", "test")


@dataclass(frozen=True)
class ObjectRecord:
    """One annotated object. At least one of box2d / box3d / point2d must be set."""

    id: str
    category: str
    attributes: tuple[str, ...] = ()
    caption: str | None = None
    box2d: Box2D | None = None
    box3d: Box3D | None = None
    point2d: Point2D | None = None
    orientation_sensitive: bool = False

    def __post_init__(self):
        if self.box2d is None and self.box3d is None and self.point2d is None:
            raise ValueError(f"object {self.id!r} has no geometry")


@dataclass(frozen=True)
class SceneRecord:
    """One image with its camera and annotated objects."""

    image_ref: str
    intrinsics: CameraIntrinsics
    objects: tuple[ObjectRecord, ...]
    source: str = ""
    split: str = "train"
    standardized: bool = False

    def __post_init__(self):
        if self.split not in SPLITS:
            raise ValueError(f"unknown split {self.split!r}")
        ids = [o.id for o in self.objects]
        if len(ids) != len(set(ids)):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ValueError(f"duplicate object ids in scene: {dupes}")


_ORIENTATION_WORDS = ("left", "right", "leftmost", "rightmost")


def caption_mentions_orientation(text: str | None) -> bool:
    if not text:
        return False
    words = {w.strip(".,!?;:'\"()").lower() for w in text.split()}
    return any(w in words for w in _ORIENTATION_WORDS)


def object_to_dict(o: ObjectRecord) -> dict[str, Any]:
    d: dict[str, Any] = {"id": o.id, "category": o.category}
    if o.attributes:
        d["attributes"] = list(o.attributes)
    if o.caption is not None:
        d["caption"] = o.caption
    if o.box2d is not None:
        d["box2d"] = [o.box2d.x1, o.box2d.y1, o.box2d.x2, o.box2d.y2]
    if o.box3d is not None:
        b = o.box3d
        d["box3d"] = [b.xh, b.yh, b.z, b.w, b.h, b.l, b.r1, b.r2, b.r3]
    if o.point2d is not None:
        d["point2d"] = [o.point2d.x, o.point2d.y]
    d["orientation_sensitive"] = o.orientation_sensitive
    return d


def object_from_dict(d: dict[str, Any]) -> ObjectRecord:
    box2d = Box2D(*map(float, d["box2d"])) if "box2d" in d else None
    box3d = Box3D(*map(float, d["box3d"])) if "box3d" in d else None
    point2d = Point2D(*map(float, d["point2d"])) if "point2d" in d else None
    caption = d.get("caption")
    sensitive = d.get("orientation_sensitive")
    if sensitive is None:
        sensitive = caption_mentions_orientation(caption)
    return ObjectRecord(
        id=str(d["id"]),
        category=str(d["category"]),
        attributes=tuple(str(a) for a in d.get("attributes", ())),
        caption=caption,
        box2d=box2d,
        box3d=box3d,
        point2d=point2d,
        orientation_sensitive=bool(sensitive),
    )


def scene_to_dict(s: SceneRecord) -> dict[str, Any]:
    cam = s.intrinsics
    return {
        "image": s.image_ref,
        "source": s.source,
        "split": s.split,
        "camera": {
            "fx": cam.fx,
            "fy": cam.fy,
            "cx": cam.cx,
            "cy": cam.cy,
            "width": cam.width,
            "height": cam.height,
            "virtual": s.standardized,
        },
        "objects": [object_to_dict(o) for o in s.objects],
    }


def scene_from_dict(d: dict[str, Any]) -> SceneRecord:
    cam = d["camera"]
    intrinsics = CameraIntrinsics(
        fx=float(cam["fx"]),
        fy=float(cam["fy"]),
        cx=float(cam["cx"]),
        cy=float(cam["cy"]),
        width=float(cam["width"]),
        height=float(cam["height"]),
    )
    return SceneRecord(
        image_ref=str(d["image"]),
        intrinsics=intrinsics,
        objects=tuple(object_from_dict(o) for o in d.get("objects", ())),
        source=str(d.get("source", "")),
        split=str(d.get("split", "train")),
        standardized=bool(cam.get("virtual", False)),
    )


def scene_to_json(s: SceneRecord) -> str:
    return json.dumps(scene_to_dict(s), separators=(",", ":"))


def scene_from_json(line: str) -> SceneRecord:
    return scene_from_dict(json.loads(line))


def write_scenes(path, scenes: Iterable[SceneRecord]) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for s in scenes:
            fh.write(scene_to_json(s) + "\n")
            n += 1
    return n


def read_scenes(path) -> Iterator[SceneRecord]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield scene_from_json(line)


def flip_object(o: ObjectRecord, width: float) -> ObjectRecord:
    return replace(
        o,
        box2d=flip_box2d(o.box2d, width) if o.box2d is not None else None,
        box3d=flip_box3d(o.box3d, width) if o.box3d is not None else None,
        point2d=flip_point2d(o.point2d, width) if o.point2d is not None else None,
    )


def horizontal_flip(scene: SceneRecord) -> SceneRecord:
    """Mirror every object about the vertical image axis.

    The camera and all non-geometric fields are unchanged; applying the flip
    twice restores the original geometry.
    """
    width = scene.intrinsics.width
    return replace(scene, objects=tuple(flip_object(o, width) for o in scene.objects))

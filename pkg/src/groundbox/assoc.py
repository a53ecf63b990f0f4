"""Association of labeled 2D boxes to 3D boxes via projected IoU.

Each 3D box is projected to a 2D box and matched greedily against the labeled
2D boxes in descending IoU order, one match per side, keeping only pairs whose
IoU strictly exceeds the threshold. Ties break on (label index, box index) so
the output is fully deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import BehindCameraError
from .geometry import Box2D, Box3D, CameraIntrinsics, project_box3d_to_box2d
from .iou import iou_2d

DEFAULT_IOU_THRESHOLD = 0.35


@dataclass(frozen=True)
class AssociationPair:
    label_index: int
    box_index: int
    iou: float


@dataclass(frozen=True)
class SkippedBox:
    box_index: int
    reason: str


@dataclass
class AssociationResult:
    pairs: list[AssociationPair]
    skipped: list[SkippedBox]


def associate(
    labels2d: Sequence[Box2D],
    boxes3d: Sequence[Box3D],
    cam: CameraIntrinsics,
    threshold: float = DEFAULT_IOU_THRESHOLD,
    clip: bool = True,
) -> AssociationResult:
    """Match 2D labels to projected 3D boxes; IoU must exceed ``threshold`` strictly.

    Boxes with corners behind the camera are skipped and reported, not errors.
    """
    projected: list[tuple[int, Box2D]] = []
    skipped: list[SkippedBox] = []
    for j, b in enumerate(boxes3d):
        try:
            projected.append((j, project_box3d_to_box2d(b, cam, clip=clip)))
        except BehindCameraError as exc:
            skipped.append(SkippedBox(j, str(exc)))

    candidates = []
    for i, label in enumerate(labels2d):
        for j, proj in projected:
            value = iou_2d(label, proj)
            if value > threshold:
                candidates.append((-value, i, j))
    candidates.sort()

    pairs: list[AssociationPair] = []
    used_labels: set[int] = set()
    used_boxes: set[int] = set()
    for neg_iou, i, j in candidates:
        if i in used_labels or j in used_boxes:
            continue
        used_labels.add(i)
        used_boxes.add(j)
        pairs.append(AssociationPair(i, j, -neg_iou))
    return AssociationResult(pairs=pairs, skipped=skipped)

from __future__ import annotations

import itertools
import random

from groundbox.assoc import associate
from groundbox.geometry import Box2D, Box3D, CameraIntrinsics, project_box3d_to_box2d
from groundbox.iou import iou_2d

from helpers import VCAM, box3d_from_metric


def oracle_greedy_matching(labels, projected, threshold):
    """Independent oracle: the greedy result is the lexicographically first
    maximal conflict-free candidate subset under (-iou, i, j) order."""
    candidates = []
    for i, lab in enumerate(labels):
        for j, proj in projected:
            v = iou_2d(lab, proj)
            if v > threshold:
                candidates.append((-v, i, j))
    candidates.sort()
    m = len(candidates)
    assert m <= 16, "oracle needs a small candidate set"

    def independent(subset):
        used_i, used_j = set(), set()
        for k in subset:
            _, i, j = candidates[k]
            if i in used_i or j in used_j:
                return False
            used_i.add(i)
            used_j.add(j)
        return True

    def maximal(subset):
        chosen = set(subset)
        for k in range(m):
            if k not in chosen and independent(sorted(chosen | {k})):
                return False
        return True

    best = None
    for r in range(m + 1):
        for subset in itertools.combinations(range(m), r):
            if independent(subset) and maximal(subset):
                if best is None or list(subset) < list(best):
                    best = subset
    if best is None:
        return []
    return [(candidates[k][1], candidates[k][2], -candidates[k][0]) for k in sorted(best)]


def make_projectable_box(rng, cam=VCAM):
    z = rng.uniform(8.0, 40.0)
    return box3d_from_metric(
        rng.uniform(-0.2, 0.2) * z,
        rng.uniform(-0.1, 0.1) * z,
        z,
        rng.uniform(0.8, 4.0),
        rng.uniform(0.8, 3.0),
        rng.uniform(1.0, 6.0),
        rng.uniform(0.0, 6.2),
        cam=cam,
    )


class TestAssociate:
    def test_identical_projection_kept_with_iou_one(self, rng):
        box = make_projectable_box(rng)
        label = project_box3d_to_box2d(box, VCAM, clip=True)
        result = associate([label], [box], VCAM)
        assert len(result.pairs) == 1
        pair = result.pairs[0]
        assert (pair.label_index, pair.box_index, pair.iou) == (0, 0, 1.0)

    def test_iou_exactly_at_threshold_dropped(self):
        # Camera and box chosen so the projection is exactly [0, 0, 3.5, 2]:
        # against the label [0, 0, 5, 4] that is IoU 7/20 == 0.35 in floats.
        cam = CameraIntrinsics(fx=1.0, fy=1.0, cx=0.0, cy=0.0, width=100.0, height=100.0)
        box = Box3D(xh=1.75 / 2.0, yh=1.0 / 2.0, z=2.0, w=3.5, h=2.0, l=2.0)
        proj = project_box3d_to_box2d(box, cam)
        assert (proj.x1, proj.y1, proj.x2, proj.y2) == (0.0, 0.0, 3.5, 2.0)
        label = Box2D(0.0, 0.0, 5.0, 4.0)
        assert iou_2d(label, proj) == 0.35
        assert associate([label], [box], cam, threshold=0.35).pairs == []
        assert len(associate([label], [box], cam, threshold=0.3499).pairs) == 1

    def test_behind_camera_boxes_skipped_and_reported(self, rng):
        good = make_projectable_box(rng)
        bad = Box3D(xh=VCAM.cx, yh=VCAM.cy, z=1.0, w=1.0, h=1.0, l=4.0)  # rear corners behind
        label = project_box3d_to_box2d(good, VCAM, clip=True)
        result = associate([label], [bad, good], VCAM)
        assert [s.box_index for s in result.skipped] == [0]
        assert [p.box_index for p in result.pairs] == [1]

    def test_injective_both_sides(self, rng):
        boxes = [make_projectable_box(rng) for _ in range(5)]
        labels = [project_box3d_to_box2d(b, VCAM, clip=True) for b in boxes[:3]]
        result = associate(labels, boxes, VCAM)
        assert len({p.label_index for p in result.pairs}) == len(result.pairs)
        assert len({p.box_index for p in result.pairs}) == len(result.pairs)

    def test_strictly_above_threshold(self, rng):
        for _ in range(50):
            boxes = [make_projectable_box(rng) for _ in range(4)]
            labels = [project_box3d_to_box2d(b, VCAM, clip=True) for b in boxes[:2]]
            result = associate(labels, boxes, VCAM, threshold=0.6)
            assert all(p.iou > 0.6 for p in result.pairs)

    def test_two_labels_three_boxes_matches_oracle(self, rng):
        boxes = [make_projectable_box(rng) for _ in range(3)]
        labels = [project_box3d_to_box2d(boxes[0], VCAM, clip=True), project_box3d_to_box2d(boxes[2], VCAM, clip=True)]
        projected = [(j, project_box3d_to_box2d(b, VCAM, clip=True)) for j, b in enumerate(boxes)]
        expected = oracle_greedy_matching(labels, projected, 0.35)
        got = [(p.label_index, p.box_index, p.iou) for p in associate(labels, boxes, VCAM).pairs]
        assert sorted(got) == sorted(expected)

    def test_random_instances_match_oracle(self):
        rng = random.Random(314)
        for _ in range(60):
            n_boxes = rng.randint(1, 5)
            boxes = [make_projectable_box(rng) for _ in range(n_boxes)]
            labels = []
            for b in boxes[: rng.randint(0, n_boxes)]:
                base = project_box3d_to_box2d(b, VCAM, clip=True)
                x1, x2 = sorted((base.x1 + rng.uniform(-15, 15), base.x2 + rng.uniform(-15, 15)))
                y1, y2 = sorted((base.y1 + rng.uniform(-15, 15), base.y2 + rng.uniform(-15, 15)))
                labels.append(
                    Box2D(
                        max(0.0, x1),
                        max(0.0, y1),
                        min(VCAM.width, max(x2, x1 + 1.0)),
                        min(VCAM.height, max(y2, y1 + 1.0)),
                    )
                )
            projected = [(j, project_box3d_to_box2d(b, VCAM, clip=True)) for j, b in enumerate(boxes)]
            expected = oracle_greedy_matching(labels, projected, 0.35)
            got = [(p.label_index, p.box_index, p.iou) for p in associate(labels, boxes, VCAM).pairs]
            assert sorted(got) == sorted(expected)

    def test_deterministic_tie_break(self):
        cam = CameraIntrinsics(fx=1.0, fy=1.0, cx=0.0, cy=0.0, width=100.0, height=100.0)
        # two identical boxes projecting to the same rectangle: ties break on
        # (label index, box index)
        box = Box3D(xh=1.0, yh=0.5, z=2.0, w=4.0, h=2.0, l=2.0)
        label = project_box3d_to_box2d(box, cam)
        result = associate([label, label], [box, box], cam)
        assert [(p.label_index, p.box_index) for p in result.pairs] == [(0, 0), (1, 1)]

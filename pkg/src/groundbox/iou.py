"""Exact 2D, rotated bird's-eye-view, and 3D intersection-over-union.

The 3D overlap is computed by clipping one box's polyhedron against the six
half-spaces of the other and integrating the resulting convex volume; no
sampling is involved. A seeded Monte-Carlo estimator is included purely as a
test oracle for the exact path.

All functions are pure and symmetric in their two box arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    Box2D,
    Box3D,
    CameraIntrinsics,
    box_corners,
    corners_from_pose,
    rotation_matrix,
    unproject_center,
)

# Half-plane / half-space sidedness tolerance.
_EPS = 1e-12
# Polygons below this area are collapsed to empty.
_MIN_AREA = 1e-12


def _signed_area(vertices) -> float:
    s = 0.0
    n = len(vertices)
    for i in range(n):
        x1, y1 = vertices[i]
        x2, y2 = vertices[(i + 1) % n]
        s += x1 * y2 - x2 * y1
    return 0.5 * s


@dataclass(frozen=True)
class ConvexPolygon2D:
    """A convex polygon with counter-clockwise vertices; may be empty."""

    vertices: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        n = len(self.vertices)
        if n in (1, 2):
            raise ValueError("a polygon needs at least 3 vertices (or none)")
        if n >= 3 and _signed_area(self.vertices) < -1e-9:
            raise ValueError("vertices must be in counter-clockwise order")

    @property
    def area(self) -> float:
        if not self.vertices:
            return 0.0
        return max(_signed_area(self.vertices), 0.0)

    @property
    def is_empty(self) -> bool:
        return not self.vertices


_EMPTY_POLYGON = ConvexPolygon2D()


def clip_convex(subject: ConvexPolygon2D, clipper: ConvexPolygon2D) -> ConvexPolygon2D:
    """Sutherland-Hodgman intersection of two convex CCW polygons."""
    if subject.is_empty or clipper.is_empty:
        return _EMPTY_POLYGON
    output = list(subject.vertices)
    m = len(clipper.vertices)
    for i in range(m):
        if not output:
            break
        ax, ay = clipper.vertices[i]
        bx, by = clipper.vertices[(i + 1) % m]
        ex, ey = bx - ax, by - ay
        inputs = output
        output = []
        prev = inputs[-1]
        prev_side = ex * (prev[1] - ay) - ey * (prev[0] - ax)
        for cur in inputs:
            cur_side = ex * (cur[1] - ay) - ey * (cur[0] - ax)
            if cur_side >= -_EPS:
                if prev_side < -_EPS:
                    output.append(_intersect_2d(prev, cur, prev_side, cur_side))
                output.append(cur)
            elif prev_side >= -_EPS:
                output.append(_intersect_2d(prev, cur, prev_side, cur_side))
            prev, prev_side = cur, cur_side
    output = _dedupe_ring(output)
    if len(output) < 3 or _signed_area(output) < _MIN_AREA:
        return _EMPTY_POLYGON
    return ConvexPolygon2D(tuple(output))


def _intersect_2d(p, q, sp, sq):
    t = sp / (sp - sq)
    return (p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]))


def _dedupe_ring(points):
    out = []
    for p in points:
        if not out or abs(p[0] - out[-1][0]) > 1e-9 or abs(p[1] - out[-1][1]) > 1e-9:
            out.append(p)
    if len(out) > 1 and abs(out[0][0] - out[-1][0]) <= 1e-9 and abs(out[0][1] - out[-1][1]) <= 1e-9:
        out.pop()
    return out


def iou_2d(a: Box2D, b: Box2D) -> float:
    """Axis-aligned rectangle IoU; zero-area union gives 0."""
    ix = min(a.x2, b.x2) - max(a.x1, b.x1)
    iy = min(a.y2, b.y2) - max(a.y1, b.y1)
    inter = max(ix, 0.0) * max(iy, 0.0)
    union = a.area + b.area - inter
    return inter / union if union > 0 else 0.0


def _rect_polygon(center: tuple[float, float], dims: tuple[float, float], angle: float) -> ConvexPolygon2D:
    """CCW rectangle of extents ``dims`` rotated by ``angle`` about ``center``."""
    cx, cy = center
    hw, hl = dims[0] / 2.0, dims[1] / 2.0
    ca, sa = math.cos(angle), math.sin(angle)
    local = ((hw, hl), (-hw, hl), (-hw, -hl), (hw, -hl))
    return ConvexPolygon2D(
        tuple((cx + ca * u - sa * v, cy + sa * u + ca * v) for u, v in local)
    )


def rotated_rect_iou(
    center_a: tuple[float, float],
    dims_a: tuple[float, float],
    angle_a: float,
    center_b: tuple[float, float],
    dims_b: tuple[float, float],
    angle_b: float,
) -> float:
    pa = _rect_polygon(center_a, dims_a, angle_a)
    pb = _rect_polygon(center_b, dims_b, angle_b)
    inter = clip_convex(pa, pb).area
    union = pa.area + pb.area - inter
    return inter / union if union > 0 else 0.0


def bev_footprint(b: Box3D, cam: CameraIntrinsics) -> ConvexPolygon2D:
    """Ground-plane (x, z) footprint of a box: a w-by-l rectangle rotated by yaw."""
    c = unproject_center(b.center, cam)
    return _rect_polygon((float(c[0]), float(c[2])), (b.w, b.l), b.r1)


def _box_key(b: Box3D) -> tuple:
    return (b.xh, b.yh, b.z, b.w, b.h, b.l, b.r1, b.r2, b.r3)


def _ordered(a: Box3D, b: Box3D) -> tuple[Box3D, Box3D]:
    # Clipping is float-asymmetric in argument order; canonicalizing the pair
    # makes iou(a, b) == iou(b, a) bit-exact.
    return (a, b) if _box_key(a) <= _box_key(b) else (b, a)


def bev_iou(a: Box3D, b: Box3D, cam: CameraIntrinsics) -> float:
    """IoU of the yaw-rotated ground-plane footprints; pitch and roll are ignored."""
    if a == b:
        return 1.0
    a, b = _ordered(a, b)
    pa = bev_footprint(a, cam)
    pb = bev_footprint(b, cam)
    inter = clip_convex(pa, pb).area
    union = pa.area + pb.area - inter
    return inter / union if union > 0 else 0.0


# ---------------------------------------------------------------------------
# Exact 3D overlap by successive half-space clipping.
# ---------------------------------------------------------------------------

# Corner indices of the six quad faces, cyclic order, matching box corner layout.
_FACE_INDICES = (
    (0, 1, 3, 2),  # -x
    (4, 5, 7, 6),  # +x
    (0, 1, 5, 4),  # -y
    (2, 3, 7, 6),  # +y
    (0, 2, 6, 4),  # -z
    (1, 3, 7, 5),  # +z
)


def _box_faces(corners: np.ndarray) -> list[list[np.ndarray]]:
    return [[corners[i] for i in face] for face in _FACE_INDICES]


def _box_halfspaces(center: np.ndarray, rot: np.ndarray, dims) -> list[tuple[np.ndarray, float]]:
    """Six (normal, offset) pairs with inside defined as normal . x <= offset."""
    out = []
    for axis in range(3):
        n = rot[:, axis]
        c = float(n @ center)
        half = dims[axis] / 2.0
        out.append((n, c + half))
        out.append((-n, -c + half))
    return out


def _clip_face(face: list[np.ndarray], n: np.ndarray, d: float) -> list[np.ndarray]:
    output: list[np.ndarray] = []
    prev = face[-1]
    prev_side = float(n @ prev) - d
    for cur in face:
        cur_side = float(n @ cur) - d
        if cur_side <= _EPS:
            if prev_side > _EPS:
                t = prev_side / (prev_side - cur_side)
                output.append(prev + t * (cur - prev))
            output.append(cur)
        elif prev_side <= _EPS:
            t = prev_side / (prev_side - cur_side)
            output.append(prev + t * (cur - prev))
        prev, prev_side = cur, cur_side
    return output


def _unique_points(points: list[np.ndarray], tol: float) -> list[np.ndarray]:
    out: list[np.ndarray] = []
    for p in points:
        if all(float(np.max(np.abs(p - q))) > tol for q in out):
            out.append(p)
    return out


def _cap_face(on_plane: list[np.ndarray], n: np.ndarray) -> list[np.ndarray] | None:
    """Order coplanar points angularly around their centroid to form the cut face."""
    pts = _unique_points(on_plane, 1e-9)
    if len(pts) < 3:
        return None
    # Orthonormal basis spanning the plane.
    ref = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = np.cross(n, ref)
    u /= np.linalg.norm(u)
    v = np.cross(n, u)
    centroid = np.mean(pts, axis=0)
    angles = [math.atan2(float((p - centroid) @ v), float((p - centroid) @ u)) for p in pts]
    return [p for _, p in sorted(zip(angles, pts), key=lambda t: t[0])]


def _clip_polyhedron(
    faces: list[list[np.ndarray]], halfspaces: list[tuple[np.ndarray, float]]
) -> list[list[np.ndarray]]:
    for n, d in halfspaces:
        new_faces: list[list[np.ndarray]] = []
        boundary: list[np.ndarray] = []
        plane_tol = 1e-9 * (1.0 + abs(d))
        face_on_plane = False
        for face in faces:
            clipped = _clip_face(face, n, d)
            if len(clipped) >= 3:
                new_faces.append(clipped)
            on_plane = [p for p in clipped if abs(float(n @ p) - d) <= plane_tol]
            boundary.extend(on_plane)
            if len(clipped) >= 3 and len(on_plane) == len(clipped):
                face_on_plane = True
        # A whole face in the cutting plane means the plane merely supports
        # the polyhedron; adding a cap would duplicate that face and
        # double-count its volume.
        if not face_on_plane:
            cap = _cap_face(boundary, n)
            if cap is not None:
                new_faces.append(cap)
        faces = new_faces
        if not faces:
            return []
    return faces


def _polyhedron_volume(faces: list[list[np.ndarray]]) -> float:
    if not faces:
        return 0.0
    interior = np.mean([p for face in faces for p in face], axis=0)
    vol = 0.0
    for face in faces:
        a = face[0] - interior
        for i in range(1, len(face) - 1):
            b = face[i] - interior
            c = face[i + 1] - interior
            vol += abs(float(np.dot(a, np.cross(b, c)))) / 6.0
    return vol


def _pose(b: Box3D, cam: CameraIntrinsics):
    center = unproject_center(b.center, cam)
    rot = rotation_matrix(b.r1, b.r2, b.r3)
    dims = (b.w, b.h, b.l)
    return center, rot, dims


def intersection_volume_3d(a: Box3D, b: Box3D, cam: CameraIntrinsics) -> float:
    """Exact intersection volume of two boxes via half-space clipping."""
    ca, ra, da = _pose(a, cam)
    cb, rb, db = _pose(b, cam)
    faces = _box_faces(corners_from_pose(ca, ra, da))
    clipped = _clip_polyhedron(faces, _box_halfspaces(cb, rb, db))
    return _polyhedron_volume(clipped)


def _vertical_overlap(a: Box3D, b: Box3D, cam: CameraIntrinsics) -> float:
    ya = float(unproject_center(a.center, cam)[1])
    yb = float(unproject_center(b.center, cam)[1])
    lo = max(ya - a.h / 2.0, yb - b.h / 2.0)
    hi = min(ya + a.h / 2.0, yb + b.h / 2.0)
    return max(hi - lo, 0.0)


def iou_3d(a: Box3D, b: Box3D, cam: CameraIntrinsics) -> float:
    """Exact 3D IoU. Yaw-only pairs take a footprint-times-height fast path."""
    if a == b:
        return 1.0
    a, b = _ordered(a, b)
    vol_a = a.w * a.h * a.l
    vol_b = b.w * b.h * b.l
    if min(vol_a, vol_b) <= 0:
        raise ValueError("degenerate zero-volume box")
    if a.r2 == 0.0 and a.r3 == 0.0 and b.r2 == 0.0 and b.r3 == 0.0:
        footprint = clip_convex(bev_footprint(a, cam), bev_footprint(b, cam)).area
        inter = footprint * _vertical_overlap(a, b, cam)
    else:
        inter = intersection_volume_3d(a, b, cam)
    inter = min(inter, vol_a, vol_b)
    union = vol_a + vol_b - inter
    return inter / union if union > 0 else 0.0


def clipped_iou_3d(a: Box3D, b: Box3D, cam: CameraIntrinsics) -> float:
    """The general clipping path without the yaw-only shortcut (for cross-checks)."""
    if a == b:
        return 1.0
    a, b = _ordered(a, b)
    vol_a = a.w * a.h * a.l
    vol_b = b.w * b.h * b.l
    inter = min(intersection_volume_3d(a, b, cam), vol_a, vol_b)
    union = vol_a + vol_b - inter
    return inter / union if union > 0 else 0.0


def monte_carlo_iou_3d(
    a: Box3D, b: Box3D, cam: CameraIntrinsics, samples: int = 1_000_000, seed: int = 0
) -> float:
    """Rejection-sampling IoU estimate over the union's bounding box.

    Deterministic for a fixed seed; used only to validate the exact path.
    Samples are drawn in float32 chunks: the boundary blur that introduces is
    orders of magnitude below the estimator's own noise.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    ca, ra, da = _pose(a, cam)
    cb, rb, db = _pose(b, cam)
    corners = np.vstack([box_corners(a, cam), box_corners(b, cam)])
    lo = corners.min(axis=0).astype(np.float32)
    span = (corners.max(axis=0) - corners.min(axis=0)).astype(np.float32)
    # One fused transform covers both boxes: columns 0-2 are a's local frame,
    # 3-5 are b's.
    rot = np.hstack([ra, rb]).astype(np.float32)
    shift = np.concatenate([ca @ ra, cb @ rb]).astype(np.float32)
    half = np.concatenate([np.asarray(da) / 2.0, np.asarray(db) / 2.0]).astype(np.float32)
    rng = np.random.default_rng(seed)
    inter = 0
    union = 0
    remaining = samples
    while remaining > 0:
        n = min(remaining, 262_144)
        remaining -= n
        pts = rng.random((n, 3), dtype=np.float32)
        pts *= span
        pts += lo
        local = pts @ rot
        local -= shift
        np.abs(local, out=local)
        inside = local <= half
        in_a = inside[:, :3].all(axis=1)
        in_b = inside[:, 3:].all(axis=1)
        union += int(np.count_nonzero(in_a | in_b))
        inter += int(np.count_nonzero(in_a & in_b))
    if union == 0:
        return 0.0
    return inter / union

"""Shared generators and independent oracles for the test suite.

The oracles here intentionally re-derive results through different code paths
(scipy rotations, direct per-corner projection, brute-force enumeration) so
they can catch sign and convention mistakes in the package itself.
"""

from __future__ import annotations

import math
import random

import numpy as np
from scipy.spatial.transform import Rotation

from groundbox.codec import Caption, CodecProfile, Depth, dequantize
from groundbox.geometry import (
    TWO_PI,
    Box2D,
    Box3D,
    CameraIntrinsics,
    Point2D,
    Point3D,
    virtual_intrinsics,
)
from groundbox.records import ObjectRecord, SceneRecord

VCAM = virtual_intrinsics()


def snap(x: float, bits: int) -> float:
    """Round to a dyadic grid of spacing 2**-bits (exact in binary floating point)."""
    scale = float(2**bits)
    return round(x * scale) / scale


def oracle_rotation(r1: float, r2: float, r3: float) -> np.ndarray:
    """Independent rotation: yaw about -y, pitch about +x, roll about +z.

    Extrinsic 'zxy' composition in scipy applies R_y @ R_x @ R_z left to right.
    """
    return Rotation.from_euler("zxy", [r3, r2, -r1]).as_matrix()


def oracle_project_box(b: Box3D, cam: CameraIntrinsics, rot: np.ndarray | None = None):
    """Brute-force per-corner projection, no shared code with the package."""
    if rot is None:
        rot = oracle_rotation(b.r1, b.r2, b.r3)
    cx = (b.xh - cam.cx) / cam.fx * b.z
    cy = (b.yh - cam.cy) / cam.fy * b.z
    center = np.array([cx, cy, b.z])
    xs, ys = [], []
    for sx in (-0.5, 0.5):
        for sy in (-0.5, 0.5):
            for sz in (-0.5, 0.5):
                offset = rot @ np.array([sx * b.w, sy * b.h, sz * b.l])
                px, py, pz = center + offset
                assert pz > 0, "oracle requires corners in front of the camera"
                xs.append(cam.fx * px / pz + cam.cx)
                ys.append(cam.fy * py / pz + cam.cy)
    return min(xs), min(ys), max(xs), max(ys)


def box3d_from_metric(
    x: float,
    y: float,
    z: float,
    w: float,
    h: float,
    l: float,
    r1: float = 0.0,
    r2: float = 0.0,
    r3: float = 0.0,
    cam: CameraIntrinsics = VCAM,
) -> Box3D:
    """Box3D whose metric center is (x, y, z) in the camera frame."""
    return Box3D(
        xh=cam.fx * x / z + cam.cx,
        yh=cam.fy * y / z + cam.cy,
        z=z,
        w=w,
        h=h,
        l=l,
        r1=r1,
        r2=r2,
        r3=r3,
    )


def rand_box2d(rng: random.Random, lo: float = 0.0, hi: float = 600.0) -> Box2D:
    x1, x2 = sorted(rng.uniform(lo, hi) for _ in range(2))
    y1, y2 = sorted(rng.uniform(lo, hi) for _ in range(2))
    return Box2D(x1, y1, x2, y2)


def random_inrange_box3d(
    rng: random.Random, profile: CodecProfile, cam: CameraIntrinsics = VCAM
) -> Box3D:
    """A box valid under the profile's ranges, away from degenerate first bins."""
    if profile.z.scale == "log":
        z = math.exp(rng.uniform(profile.z.lo + 0.01, profile.z.hi - 0.01))
    else:
        span = profile.z.hi - profile.z.lo
        z = rng.uniform(profile.z.lo + span / 500.0, profile.z.hi)
    dims = [rng.uniform(0.1, profile.w.hi - 0.1) for _ in range(3)]
    return Box3D(
        xh=rng.uniform(0.0, cam.width),
        yh=rng.uniform(0.0, cam.height),
        z=z,
        w=dims[0],
        h=dims[1],
        l=dims[2],
        r1=rng.uniform(0.0, TWO_PI - 1e-9),
        r2=rng.uniform(0.0, TWO_PI - 1e-9),
        r3=rng.uniform(0.0, TWO_PI - 1e-9),
    )


def random_label(rng: random.Random, profile: CodecProfile, kind: str):
    cam_w, cam_h = profile.x.hi, profile.y.hi
    if kind == "point2d":
        return Point2D(rng.uniform(0, cam_w), rng.uniform(0, cam_h))
    if kind == "box2d":
        x1, x2 = sorted(rng.uniform(0, cam_w) for _ in range(2))
        y1, y2 = sorted(rng.uniform(0, cam_h) for _ in range(2))
        return Box2D(x1, y1, x2, y2)
    if kind == "point3d":
        b = random_inrange_box3d(rng, profile)
        return Point3D(b.xh, b.yh, b.z)
    if kind == "box3d":
        return random_inrange_box3d(rng, profile)
    if kind == "depth":
        return Depth(random_inrange_box3d(rng, profile).z)
    return Caption("a fixture object")


def random_overlapping_pair(rng: random.Random, cam: CameraIntrinsics = VCAM, yaw_only: bool = False):
    """Two boxes that usually overlap; exercises every IoU regime."""
    z = rng.uniform(4.0, 60.0)
    x = rng.uniform(-0.25, 0.25) * z
    y = rng.uniform(-0.15, 0.15) * z
    dims = [rng.uniform(0.5, 6.0) for _ in range(3)]
    angles = [rng.uniform(0.0, TWO_PI) for _ in range(3)]
    if yaw_only:
        angles[1] = angles[2] = 0.0
    a = box3d_from_metric(x, y, z, *dims, *angles, cam=cam)
    dims_b = [max(0.3, d * rng.uniform(0.6, 1.4)) for d in dims]
    angles_b = [(ang + rng.uniform(-0.5, 0.5)) % TWO_PI for ang in angles]
    if yaw_only:
        angles_b[1] = angles_b[2] = 0.0
    shift = [rng.uniform(-0.8, 0.8) * d for d in dims]
    b = box3d_from_metric(
        x + shift[0], y + shift[1], z + shift[2], *dims_b, *angles_b, cam=cam
    )
    return a, b


def grid_box3d(rng: random.Random, profile: CodecProfile, cam: CameraIntrinsics = VCAM) -> Box3D:
    """An in-range box snapped to the dequantization lattice.

    Rendering such a box and parsing it back reproduces it exactly, which the
    gt-as-predictions acceptance fixtures rely on.
    """

    def snap_spec(value, spec):
        t = math.log(value) if spec.scale == "log" else value
        k = round((spec.bins - 1) * (t - spec.lo) / (spec.hi - spec.lo))
        k = min(max(k, 1), spec.bins - 1)
        return dequantize(k, spec)

    b = random_inrange_box3d(rng, profile, cam)
    return Box3D(
        xh=snap_spec(b.xh, profile.x),
        yh=snap_spec(b.yh, profile.y),
        z=snap_spec(b.z, profile.z),
        w=snap_spec(b.w, profile.w),
        h=snap_spec(b.h, profile.h),
        l=snap_spec(b.l, profile.l),
        r1=snap_spec(b.r1, profile.r1) if "r1" in profile.angle_fields else 0.0,
        r2=snap_spec(b.r2, profile.r2) if "r2" in profile.angle_fields else 0.0,
        r3=snap_spec(b.r3, profile.r3) if "r3" in profile.angle_fields else 0.0,
    )


_CATEGORIES = ("car", "truck", "pedestrian", "bicycle", "bus", "chair", "sofa")
_ATTRIBUTES = ("parked", "moving", "standing", "walking", "red", "white", "small")


def dyadic_scene(rng: random.Random, n_objects: int = 4, cam: CameraIntrinsics = VCAM) -> SceneRecord:
    """A standardized scene on flip-exact grids.

    2D coordinates are dyadic multiples (2**-40 px) and angles are multiples of
    2**-50 rad, so mirroring twice is provably bit-exact.
    """
    angle_unit = 2.0**-50
    angle_steps = int(TWO_PI / angle_unit) - 2

    def grid_angle():
        return rng.randrange(angle_steps) * angle_unit

    objects = []
    for i in range(n_objects):
        xh = snap(rng.uniform(1.0, cam.width - 1.0), 40)
        yh = snap(rng.uniform(1.0, cam.height - 1.0), 40)
        box3d = Box3D(
            xh=xh,
            yh=yh,
            z=snap(rng.uniform(1.0, 80.0), 40),
            w=snap(rng.uniform(0.3, 5.0), 40),
            h=snap(rng.uniform(0.3, 5.0), 40),
            l=snap(rng.uniform(0.3, 5.0), 40),
            r1=grid_angle(),
            r2=grid_angle(),
            r3=grid_angle(),
        )
        x1, x2 = sorted(snap(rng.uniform(0.0, cam.width), 40) for _ in range(2))
        y1, y2 = sorted(snap(rng.uniform(0.0, cam.height), 40) for _ in range(2))
        objects.append(
            ObjectRecord(
                id=f"obj{i}",
                category=rng.choice(_CATEGORIES),
                attributes=(rng.choice(_ATTRIBUTES),),
                caption=None,
                box2d=Box2D(x1, y1, x2, y2),
                box3d=box3d,
                point2d=Point2D(xh, yh),
                orientation_sensitive=False,
            )
        )
    return SceneRecord(
        image_ref=f"scene-{rng.randrange(10**9)}.jpg",
        intrinsics=cam,
        objects=tuple(objects),
        source="fixture",
        split="train",
        standardized=True,
    )


def codec_scene(
    rng: random.Random,
    profile: CodecProfile,
    n_objects: int = 3,
    cam: CameraIntrinsics = VCAM,
    grid: bool = False,
) -> SceneRecord:
    """A standardized scene whose objects all render cleanly under the profile."""
    objects = []
    for i in range(n_objects):
        box3d = grid_box3d(rng, profile, cam) if grid else random_inrange_box3d(rng, profile, cam)
        x1, x2 = sorted(rng.uniform(0.0, cam.width) for _ in range(2))
        y1, y2 = sorted(rng.uniform(0.0, cam.height) for _ in range(2))
        objects.append(
            ObjectRecord(
                id=f"obj{i}",
                category=rng.choice(_CATEGORIES),
                attributes=(rng.choice(_ATTRIBUTES),),
                caption=None,
                box2d=Box2D(x1, y1, x2, y2),
                box3d=box3d,
                orientation_sensitive=False,
            )
        )
    return SceneRecord(
        image_ref=f"scene-{rng.randrange(10**9)}.jpg",
        intrinsics=cam,
        objects=tuple(objects),
        source="fixture",
        split="train",
        standardized=True,
    )

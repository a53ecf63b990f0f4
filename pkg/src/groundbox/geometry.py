"""Pinhole cameras, projected-center 3D boxes, and frame transforms.

Conventions, used consistently by the codec, IoU, and evaluation modules:

* Camera frame: +x right, +y down, +z forward (standard computer vision).
* A 3D box is stored as ``(xh, yh, z, w, h, l, r1, r2, r3)``: the pixel
  coordinates of its projected center, metric depth along the camera axis,
  metric extents, and Euler angles in yaw, pitch, roll order.
* Yaw rotates about -y (the up axis), pitch about +x, roll about +z, and the
  object-to-camera rotation composes as ``R = R_yaw @ R_pitch @ R_roll``.
* Box extents attach to local axes as: w along local x, h along local y
  (vertical), l along local z.
* All angles are normalized to [0, 2*pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BehindCameraError

TWO_PI = 2.0 * math.pi

# The eight (sx, sy, sz) sign triples of a box corner, in a fixed order.
_CORNER_SIGNS = np.array(
    [[sx, sy, sz] for sx in (-1.0, 1.0) for sy in (-1.0, 1.0) for sz in (-1.0, 1.0)]
)


def wrap_angle(a: float) -> float:
    """Map an angle into [0, 2*pi). Values already in range pass through unchanged.

    The float TWO_PI is itself below the real 2*pi, so it is kept as-is; this
    lets the top quantization bin of an angle round-trip exactly.
    """
    if 0.0 <= a <= TWO_PI:
        return a
    a = math.fmod(a, TWO_PI)
    return a + TWO_PI if a < 0.0 else a


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics in pixels: x = fx*X/Z + cx, y = fy*Y/Z + cy."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: float
    height: float

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")
        if not (self.width > 0 and self.height > 0):
            raise ValueError(f"image size must be positive, got {self.width}x{self.height}")
        if not (0 <= self.cx <= self.width and 0 <= self.cy <= self.height):
            raise ValueError(
                f"principal point ({self.cx}, {self.cy}) outside image {self.width}x{self.height}"
            )


def virtual_intrinsics(f: float = 512.0, width: float = 672.0, height: float = 672.0) -> CameraIntrinsics:
    """The canonical virtual camera: fixed focal length, centered principal point."""
    return CameraIntrinsics(fx=f, fy=f, cx=width / 2.0, cy=height / 2.0, width=width, height=height)


@dataclass(frozen=True)
class Point2D:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite point ({self.x}, {self.y})")


@dataclass(frozen=True)
class Box2D:
    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        if not (self.x1 <= self.x2 and self.y1 <= self.y2):
            raise ValueError(f"corners out of order: ({self.x1},{self.y1})-({self.x2},{self.y2})")

    @property
    def area(self) -> float:
        return (self.x2 - self.x1) * (self.y2 - self.y1)


@dataclass(frozen=True)
class Point3D:
    """Projected pixel position plus metric depth."""

    xh: float
    yh: float
    z: float

    def __post_init__(self):
        if not self.z > 0:
            raise ValueError(f"depth must be positive, got {self.z}")


@dataclass(frozen=True)
class Box3D:
    """Projected-center 3D box. Field order is the serialization order."""

    xh: float
    yh: float
    z: float
    w: float
    h: float
    l: float
    r1: float = 0.0
    r2: float = 0.0
    r3: float = 0.0

    def __post_init__(self):
        if not self.z > 0:
            raise ValueError(f"depth must be positive, got {self.z}")
        if not (self.w > 0 and self.h > 0 and self.l > 0):
            raise ValueError(f"extents must be positive, got ({self.w}, {self.h}, {self.l})")
        object.__setattr__(self, "r1", wrap_angle(self.r1))
        object.__setattr__(self, "r2", wrap_angle(self.r2))
        object.__setattr__(self, "r3", wrap_angle(self.r3))

    @property
    def center(self) -> Point3D:
        return Point3D(self.xh, self.yh, self.z)


def rotation_matrix(r1: float, r2: float, r3: float) -> np.ndarray:
    """Object-to-camera rotation from yaw, pitch, roll: R = R_yaw @ R_pitch @ R_roll.

    Yaw rotates about -y, pitch about +x, roll about +z. The result is a
    proper rotation (orthonormal, det +1) for any finite angles.
    """
    a, b, c = wrap_angle(r1), wrap_angle(r2), wrap_angle(r3)
    ca, sa = math.cos(a), math.sin(a)
    cb, sb = math.cos(b), math.sin(b)
    cc, sc = math.cos(c), math.sin(c)
    r_yaw = np.array([[ca, 0.0, -sa], [0.0, 1.0, 0.0], [sa, 0.0, ca]])
    r_pitch = np.array([[1.0, 0.0, 0.0], [0.0, cb, -sb], [0.0, sb, cb]])
    r_roll = np.array([[cc, -sc, 0.0], [sc, cc, 0.0], [0.0, 0.0, 1.0]])
    return r_yaw @ r_pitch @ r_roll


def unproject_center(p: Point3D, cam: CameraIntrinsics) -> np.ndarray:
    """Metric camera-frame position of a projected point at its stored depth."""
    if not p.z > 0:
        raise BehindCameraError(f"depth must be positive, got {p.z}")
    x = (p.xh - cam.cx) / cam.fx * p.z
    y = (p.yh - cam.cy) / cam.fy * p.z
    return np.array([x, y, p.z])


def project_point(q, cam: CameraIntrinsics) -> Point2D:
    """Project a metric camera-frame point to pixels. Raises behind the camera."""
    x, y, z = float(q[0]), float(q[1]), float(q[2])
    if not z > 0:
        raise BehindCameraError(f"point at Z={z} is behind the camera")
    return Point2D(cam.fx * x / z + cam.cx, cam.fy * y / z + cam.cy)


def box_corners(b: Box3D, cam: CameraIntrinsics) -> np.ndarray:
    """The 8 metric corners of a box, shape (8, 3), centered on unproject_center."""
    center = unproject_center(b.center, cam)
    rot = rotation_matrix(b.r1, b.r2, b.r3)
    half = np.array([b.w / 2.0, b.h / 2.0, b.l / 2.0])
    return center + (_CORNER_SIGNS * half) @ rot.T


def corners_from_pose(center, rot: np.ndarray, dims) -> np.ndarray:
    """Corners of a box given directly in metric pose (no camera involved)."""
    half = np.asarray(dims, dtype=float) / 2.0
    return np.asarray(center, dtype=float) + (_CORNER_SIGNS * half) @ rot.T


def project_box3d_to_box2d(b: Box3D, cam: CameraIntrinsics, clip: bool = False) -> Box2D:
    """Axis-aligned pixel bounding box of the 8 projected corners.

    Any corner behind the camera raises BehindCameraError; callers typically
    discard such objects rather than clip the frustum. With ``clip`` the
    result is intersected with the image rectangle.
    """
    corners = box_corners(b, cam)
    if np.any(corners[:, 2] <= 0):
        raise BehindCameraError("box has corners behind the camera")
    xs = cam.fx * corners[:, 0] / corners[:, 2] + cam.cx
    ys = cam.fy * corners[:, 1] / corners[:, 2] + cam.cy
    x1, x2 = float(xs.min()), float(xs.max())
    y1, y2 = float(ys.min()), float(ys.max())
    if clip:
        x1 = min(max(x1, 0.0), cam.width)
        x2 = min(max(x2, 0.0), cam.width)
        y1 = min(max(y1, 0.0), cam.height)
        y2 = min(max(y2, 0.0), cam.height)
    return Box2D(x1, y1, x2, y2)


def to_virtual_camera(
    b: Box3D,
    cam: CameraIntrinsics,
    f_virtual: float = 512.0,
    target: tuple[float, float] = (672.0, 672.0),
) -> tuple[Box3D, CameraIntrinsics]:
    """Rescale a box to a virtual camera of focal length ``f_virtual``.

    The projected center follows the image resize; depth is rescaled by
    f_virtual / f_eff with f_eff = fy * (target_height / source_height), so an
    object keeps the apparent size that the source camera gave it. Extents and
    angles are unchanged. Applying the transform a second time with the same
    arguments is an exact identity.
    """
    tw, th = float(target[0]), float(target[1])
    if not (tw > 0 and th > 0) or not f_virtual > 0:
        raise ValueError(f"degenerate target size {target} or focal {f_virtual}")
    sx = tw / cam.width
    sy = th / cam.height
    f_eff = cam.fy * sy
    out = Box3D(
        xh=b.xh * sx,
        yh=b.yh * sy,
        z=b.z * (f_virtual / f_eff),
        w=b.w,
        h=b.h,
        l=b.l,
        r1=b.r1,
        r2=b.r2,
        r3=b.r3,
    )
    vcam = CameraIntrinsics(
        fx=f_virtual, fy=f_virtual, cx=cam.cx * sx, cy=cam.cy * sy, width=tw, height=th
    )
    return out, vcam


def flip_point2d(p: Point2D, width: float) -> Point2D:
    return Point2D(width - p.x, p.y)


def flip_box2d(b: Box2D, width: float) -> Box2D:
    return Box2D(width - b.x2, b.y1, width - b.x1, b.y2)


def flip_angle(a: float) -> float:
    """Mirror an angle in [0, 2*pi): a -> (2*pi - a) mod 2*pi."""
    if a == 0.0:
        return 0.0
    out = TWO_PI - a
    return 0.0 if out >= TWO_PI else out


def flip_box3d(b: Box3D, width: float) -> Box3D:
    """Mirror a box about the vertical image axis.

    xh reflects, yaw and roll negate (mod 2*pi), pitch is mirror-invariant
    under this axis convention. Mirror-exactness of the projected footprint
    assumes a centered principal point, which standardization guarantees.
    """
    return Box3D(
        xh=width - b.xh,
        yh=b.yh,
        z=b.z,
        w=b.w,
        h=b.h,
        l=b.l,
        r1=flip_angle(b.r1),
        r2=b.r2,
        r3=flip_angle(b.r3),
    )

"""Pydantic request/response models for the HTTP service.

Labels travel as a tagged value: geometric kinds carry ``values`` in their
serialization field order, captions carry ``text``.
"""

from __future__ import annotations

from typing import Any, Literal, Optional

from pydantic import BaseModel, Field

from ..codec import Caption, CodecProfile, Depth, Label, LabelKind
from ..geometry import Box2D, Box3D, CameraIntrinsics, Point2D, Point3D


class CameraModel(BaseModel):
    fx: float
    fy: float
    cx: float
    cy: float
    width: float
    height: float

    def to_intrinsics(self) -> CameraIntrinsics:
        return CameraIntrinsics(self.fx, self.fy, self.cx, self.cy, self.width, self.height)

    @classmethod
    def from_intrinsics(cls, cam: CameraIntrinsics) -> "CameraModel":
        return cls(fx=cam.fx, fy=cam.fy, cx=cam.cx, cy=cam.cy, width=cam.width, height=cam.height)


class ProfileModel(BaseModel):
    mode: Literal["pretrain", "finetune"] = "pretrain"
    width: float = 672.0
    height: float = 672.0

    def to_profile(self) -> CodecProfile:
        factory = CodecProfile.pretrain if self.mode == "pretrain" else CodecProfile.finetune
        return factory(self.width, self.height)


class LabelModel(BaseModel):
    kind: Literal["point2d", "box2d", "point3d", "box3d", "depth", "caption"]
    values: Optional[list[float]] = None
    text: Optional[str] = None

    def to_label(self) -> Label:
        if self.kind == "caption":
            return Caption(self.text or "")
        if self.values is None:
            raise ValueError(f"label kind {self.kind!r} needs values")
        v = [float(x) for x in self.values]
        if self.kind == "point2d":
            return Point2D(*v)
        if self.kind == "box2d":
            return Box2D(*v)
        if self.kind == "point3d":
            return Point3D(*v)
        if self.kind == "depth":
            return Depth(*v)
        if len(v) == 7:
            v = v + [0.0, 0.0]
        return Box3D(*v)

    @classmethod
    def from_label(cls, label: Label) -> "LabelModel":
        kind = LabelKind.of(label)
        if isinstance(label, Caption):
            return cls(kind="caption", text=label.text)
        if isinstance(label, Point2D):
            values = [label.x, label.y]
        elif isinstance(label, Box2D):
            values = [label.x1, label.y1, label.x2, label.y2]
        elif isinstance(label, Point3D):
            values = [label.xh, label.yh, label.z]
        elif isinstance(label, Depth):
            values = [label.z]
        else:
            values = [label.xh, label.yh, label.z, label.w, label.h, label.l, label.r1, label.r2, label.r3]
        return cls(kind=kind.value, values=values)


class RenderRequest(BaseModel):
    label: LabelModel
    profile: ProfileModel = Field(default_factory=ProfileModel)


class RenderResponse(BaseModel):
    text: str


class ParseRequest(BaseModel):
    text: str
    kind: Literal["point2d", "box2d", "point3d", "box3d", "depth"]
    profile: ProfileModel = Field(default_factory=ProfileModel)


class ParseResponse(BaseModel):
    label: LabelModel


class ExtractRequest(BaseModel):
    text: str
    profile: ProfileModel = Field(default_factory=ProfileModel)


class ExtractedLabelModel(BaseModel):
    start: int
    end: int
    kind: str
    label: LabelModel


class ExtractResponse(BaseModel):
    labels: list[ExtractedLabelModel]


class IouRequest(BaseModel):
    kind: Literal["2d", "bev", "3d"]
    a: LabelModel
    b: LabelModel
    camera: Optional[CameraModel] = None


class IouResponse(BaseModel):
    iou: float


class VirtualCameraRequest(BaseModel):
    box3d: list[float]
    camera: CameraModel
    f_virtual: float = 512.0
    target_width: float = 672.0
    target_height: float = 672.0


class VirtualCameraResponse(BaseModel):
    box3d: list[float]
    camera: CameraModel


class ProjectRequest(BaseModel):
    box3d: list[float]
    camera: CameraModel
    clip: bool = False


class ProjectResponse(BaseModel):
    box2d: list[float]


class StandardizeRequest(BaseModel):
    manifest_path: str
    out_path: str
    f_virtual: float = 512.0
    width: float = 672.0
    height: float = 672.0
    profile_mode: Literal["pretrain", "finetune"] = "pretrain"
    seed: int = 0
    workers: Optional[int] = None


class ConvgenRequest(BaseModel):
    scenes_path: str
    out_path: str
    n_max: int = 30
    stage: Literal[1, 2] = 2
    vcot: bool = False
    specialist: Optional[Literal["gt", "file"]] = None
    specialist_path: Optional[str] = None
    flip_prob: float = 0.0
    seed: int = 0
    profile_mode: Literal["pretrain", "finetune"] = "pretrain"
    width: float = 672.0
    height: float = 672.0
    workers: Optional[int] = None
    manifest_path: Optional[str] = None
    bank_path: Optional[str] = None


class AssociateRequest(BaseModel):
    labels2d_path: str
    boxes3d_path: str
    out_path: str
    iou_threshold: float = 0.35
    workers: Optional[int] = None


class EvalRequest(BaseModel):
    pred_path: str
    gt_path: str
    metrics: list[Literal["2d", "bev", "3d", "indoor"]] = ["2d", "bev", "3d"]
    threshold_2d: float = 0.5
    profile_a_path: Optional[str] = None
    profile_b_path: Optional[str] = None
    indoor_taus: list[float] = [0.15, 0.25, 0.5]
    codec_mode: Literal["pretrain", "finetune"] = "finetune"
    width: float = 672.0
    height: float = 672.0
    f_virtual: float = 512.0


class ErrorDetail(BaseModel):
    error: str
    message: str
    offset: Optional[int] = None
    field: Optional[str] = None
    extra: Optional[dict[str, Any]] = None

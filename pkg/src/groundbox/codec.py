"""Token codec for spatial labels: quantization to 0-999 bins and 3-digit text.

Every label serializes as zero-padded 3-digit integers in brackets, e.g.
``[021,521]`` for a 2D point. Field order is fixed by the label kind:

* point2d  ``[x, y]``
* box2d    ``[x1, y1, x2, y2]``
* point3d  ``[x, y, z]``
* box3d    ``[x, y, z, w, h, l, r1, r2, r3]`` (pretrain) or
           ``[x, y, z, w, h, l, r1]`` (finetune, yaw only)
* depth    ``[z]``

Out-of-range values are an error at render time, never clamped; range
filtering belongs to the dataset stage. The parse grammar is strict and
documented as EBNF in the README.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum

from .errors import LabelRangeError, TokenArityError, TokenParseError
from .geometry import TWO_PI, Box2D, Box3D, Point2D, Point3D


@dataclass(frozen=True)
class QuantSpec:
    """Range and scale for one field; values map to bins 0..bins-1."""

    lo: float
    hi: float
    bins: int = 1000
    scale: str = "linear"

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"empty range [{self.lo}, {self.hi}]")
        if self.bins < 2:
            raise ValueError(f"need at least 2 bins, got {self.bins}")
        if self.scale not in ("linear", "log"):
            raise ValueError(f"unknown scale {self.scale!r}")

    def transform(self, value: float) -> float:
        if self.scale == "log":
            if value <= 0:
                raise LabelRangeError("value", value, self.lo, self.hi, self.scale)
            return math.log(value)
        return value

    def contains(self, value: float) -> bool:
        if self.scale == "log" and value <= 0:
            return False
        return self.lo <= self.transform(value) <= self.hi


def quantize(value: float, spec: QuantSpec, field: str = "value") -> int:
    """Bin index of a value; raises LabelRangeError outside [lo, hi]."""
    if spec.scale == "log" and value <= 0:
        raise LabelRangeError(field, value, spec.lo, spec.hi, spec.scale)
    t = spec.transform(value)
    if not spec.lo <= t <= spec.hi:
        raise LabelRangeError(field, value, spec.lo, spec.hi, spec.scale)
    x = (spec.bins - 1) * (t - spec.lo) / (spec.hi - spec.lo)
    return min(max(int(math.floor(x + 0.5)), 0), spec.bins - 1)


def dequantize(bin_index: int, spec: QuantSpec) -> float:
    """Representative value of a bin (the lattice point quantize maps back to it)."""
    if not 0 <= bin_index <= spec.bins - 1:
        raise ValueError(f"bin {bin_index} outside 0..{spec.bins - 1}")
    t = spec.lo + (bin_index / (spec.bins - 1)) * (spec.hi - spec.lo)
    return math.exp(t) if spec.scale == "log" else t


@dataclass(frozen=True)
class Depth:
    """A standalone metric depth answer."""

    z: float

    def __post_init__(self):
        if not math.isfinite(self.z):
            raise ValueError(f"non-finite depth {self.z}")


@dataclass(frozen=True)
class Caption:
    text: str


Label = Point2D | Box2D | Point3D | Box3D | Depth | Caption


class LabelKind(str, Enum):
    POINT2D = "point2d"
    BOX2D = "box2d"
    POINT3D = "point3d"
    BOX3D = "box3d"
    DEPTH = "depth"
    CAPTION = "caption"

    @classmethod
    def of(cls, label: Label) -> "LabelKind":
        for kind, typ in _KIND_TYPES.items():
            if isinstance(label, typ):
                return kind
        raise TypeError(f"not a label: {label!r}")


_KIND_TYPES = {
    LabelKind.POINT2D: Point2D,
    LabelKind.BOX2D: Box2D,
    LabelKind.POINT3D: Point3D,
    LabelKind.BOX3D: Box3D,
    LabelKind.DEPTH: Depth,
    LabelKind.CAPTION: Caption,
}

_ANGLE_PREFIX = ("r1", "r2", "r3")


@dataclass(frozen=True)
class CodecProfile:
    """Per-field quantization specs plus the serialized angle set."""

    mode: str
    x: QuantSpec
    y: QuantSpec
    z: QuantSpec
    w: QuantSpec
    h: QuantSpec
    l: QuantSpec
    r1: QuantSpec
    r2: QuantSpec
    r3: QuantSpec
    angle_fields: tuple[str, ...]
    token_style: str = "int3"

    def __post_init__(self):
        if self.mode not in ("pretrain", "finetune"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.token_style != "int3":
            raise ValueError(f"unsupported token style {self.token_style!r}")
        if self.angle_fields != _ANGLE_PREFIX[: len(self.angle_fields)] or not self.angle_fields:
            raise ValueError(f"angle fields must be a prefix of {_ANGLE_PREFIX}")

    @property
    def box3d_arity(self) -> int:
        return 6 + len(self.angle_fields)

    @classmethod
    def pretrain(cls, width: float = 672.0, height: float = 672.0) -> "CodecProfile":
        """Pretraining ranges: log depth in [-4, 5], extents in [0, 15] m, all angles."""
        angle = QuantSpec(0.0, TWO_PI)
        extent = QuantSpec(0.0, 15.0)
        return cls(
            mode="pretrain",
            x=QuantSpec(0.0, float(width)),
            y=QuantSpec(0.0, float(height)),
            z=QuantSpec(-4.0, 5.0, scale="log"),
            w=extent,
            h=extent,
            l=extent,
            r1=angle,
            r2=angle,
            r3=angle,
            angle_fields=("r1", "r2", "r3"),
        )

    @classmethod
    def finetune(cls, width: float = 672.0, height: float = 672.0) -> "CodecProfile":
        """Fine-tuning ranges: metric depth in [0, 140] m, yaw only."""
        angle = QuantSpec(0.0, TWO_PI)
        extent = QuantSpec(0.0, 15.0)
        return cls(
            mode="finetune",
            x=QuantSpec(0.0, float(width)),
            y=QuantSpec(0.0, float(height)),
            z=QuantSpec(0.0, 140.0),
            w=extent,
            h=extent,
            l=extent,
            r1=angle,
            r2=angle,
            r3=angle,
            angle_fields=("r1",),
        )


def _token_fields(label: Label, profile: CodecProfile) -> list[tuple[str, float, QuantSpec]]:
    if isinstance(label, Point2D):
        return [("x", label.x, profile.x), ("y", label.y, profile.y)]
    if isinstance(label, Box2D):
        return [
            ("x1", label.x1, profile.x),
            ("y1", label.y1, profile.y),
            ("x2", label.x2, profile.x),
            ("y2", label.y2, profile.y),
        ]
    if isinstance(label, Point3D):
        return [("xh", label.xh, profile.x), ("yh", label.yh, profile.y), ("z", label.z, profile.z)]
    if isinstance(label, Box3D):
        fields = [
            ("xh", label.xh, profile.x),
            ("yh", label.yh, profile.y),
            ("z", label.z, profile.z),
            ("w", label.w, profile.w),
            ("h", label.h, profile.h),
            ("l", label.l, profile.l),
        ]
        for name in profile.angle_fields:
            fields.append((name, getattr(label, name), getattr(profile, name)))
        return fields
    if isinstance(label, Depth):
        return [("z", label.z, profile.z)]
    raise TypeError(f"not a token label: {label!r}")


def render_label(label: Label, profile: CodecProfile) -> str:
    """Token string of a label; captions pass through as plain text."""
    if isinstance(label, Caption):
        return label.text
    bins = [quantize(value, spec, field) for field, value, spec in _token_fields(label, profile)]
    return "[" + ",".join(f"{b:03d}" for b in bins) + "]"


_ARITY = {
    LabelKind.POINT2D: 2,
    LabelKind.BOX2D: 4,
    LabelKind.POINT3D: 3,
    LabelKind.DEPTH: 1,
}


def expected_arity(kind: LabelKind, profile: CodecProfile) -> int:
    if kind is LabelKind.BOX3D:
        return profile.box3d_arity
    if kind is LabelKind.CAPTION:
        raise ValueError("captions are not token labels")
    return _ARITY[kind]


def _label_from_bins(bins: list[int], kind: LabelKind, profile: CodecProfile) -> Label:
    want = expected_arity(kind, profile)
    if len(bins) != want:
        raise TokenArityError(want, len(bins), kind.value)
    try:
        if kind is LabelKind.POINT2D:
            return Point2D(dequantize(bins[0], profile.x), dequantize(bins[1], profile.y))
        if kind is LabelKind.BOX2D:
            return Box2D(
                dequantize(bins[0], profile.x),
                dequantize(bins[1], profile.y),
                dequantize(bins[2], profile.x),
                dequantize(bins[3], profile.y),
            )
        if kind is LabelKind.POINT3D:
            return Point3D(
                dequantize(bins[0], profile.x),
                dequantize(bins[1], profile.y),
                dequantize(bins[2], profile.z),
            )
        if kind is LabelKind.DEPTH:
            return Depth(dequantize(bins[0], profile.z))
        angles = [dequantize(b, getattr(profile, n)) for n, b in zip(profile.angle_fields, bins[6:])]
        angles += [0.0] * (3 - len(angles))
        return Box3D(
            dequantize(bins[0], profile.x),
            dequantize(bins[1], profile.y),
            dequantize(bins[2], profile.z),
            dequantize(bins[3], profile.w),
            dequantize(bins[4], profile.h),
            dequantize(bins[5], profile.l),
            angles[0],
            angles[1],
            angles[2],
        )
    except ValueError as exc:
        # Syntactically valid tokens can still decode to impossible geometry
        # (e.g. depth bin 0 under a linear spec starting at 0).
        raise TokenParseError(f"tokens decode to invalid geometry: {exc}", 0) from exc


def _scan_groups(text: str, i: int) -> tuple[list[int], int]:
    """Scan ``[ddd,ddd,...]`` starting at ``i``; returns (bins, next offset)."""
    n = len(text)
    if i >= n or text[i] != "[":
        raise TokenParseError("expected '['", i)
    i += 1
    bins: list[int] = []
    while True:
        for k in range(3):
            if i + k >= n or not "0" <= text[i + k] <= "9":
                raise TokenParseError("expected 3-digit group", i + k)
        bins.append(int(text[i : i + 3]))
        i += 3
        if i >= n:
            raise TokenParseError("expected ',' or ']'", i)
        if text[i] == ",":
            i += 1
            continue
        if text[i] == "]":
            return bins, i + 1
        raise TokenParseError("expected ',' or ']'", i)


def parse_label(text: str, kind: LabelKind, profile: CodecProfile) -> Label:
    """Strict parse of one token string into a dequantized label.

    Raises TokenParseError (with byte offset) on malformed syntax and
    TokenArityError when the group count does not match the kind and profile.
    """
    n = len(text)
    i = 0
    while i < n and text[i].isspace():
        i += 1
    bins, i = _scan_groups(text, i)
    while i < n and text[i].isspace():
        i += 1
    if i != n:
        raise TokenParseError("unexpected trailing text", i)
    return _label_from_bins(bins, kind, profile)


@dataclass(frozen=True)
class ExtractedLabel:
    start: int
    end: int
    kind: LabelKind
    label: Label


_GROUP_RE = re.compile(r"\[\d{3}(?:,\d{3})*\]")


def extract_labels(text: str, profile: CodecProfile) -> list[ExtractedLabel]:
    """All well-formed token groups embedded in free text, left to right.

    Groups are classified by arity (1 depth, 2 point2d, 3 point3d, 4 box2d,
    and the profile's box3d arity). Anything else, including groups that
    decode to invalid geometry, is skipped.
    """
    kinds = dict(_ARITY_TO_KIND)
    kinds[profile.box3d_arity] = LabelKind.BOX3D
    out: list[ExtractedLabel] = []
    for match in _GROUP_RE.finditer(text):
        bins = [int(g) for g in match.group(0)[1:-1].split(",")]
        kind = kinds.get(len(bins))
        if kind is None:
            continue
        try:
            label = _label_from_bins(bins, kind, profile)
        except (TokenParseError, TokenArityError):
            continue
        out.append(ExtractedLabel(match.start(), match.end(), kind, label))
    return out


_ARITY_TO_KIND = {
    1: LabelKind.DEPTH,
    2: LabelKind.POINT2D,
    3: LabelKind.POINT3D,
    4: LabelKind.BOX2D,
}

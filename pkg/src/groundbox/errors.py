"""Shared exception taxonomy.

Errors that callers are expected to branch on get their own class; everything
carries a plain message so batch drivers can log and keep going.
"""

from __future__ import annotations


class GroundboxError(Exception):
    """Base class for all toolkit errors."""


class BehindCameraError(GroundboxError):
    """A 3D point or box corner has non-positive depth along the camera axis."""


class LabelRangeError(GroundboxError):
    """A label field falls outside its quantization range."""

    def __init__(self, field: str, value: float, lo: float, hi: float, scale: str = "linear"):
        self.field = field
        self.value = value
        self.lo = lo
        self.hi = hi
        self.scale = scale
        domain = "log-domain " if scale == "log" else ""
        super().__init__(
            f"field {field!r}: value {value!r} outside {domain}range [{lo}, {hi}]"
        )


class TokenParseError(GroundboxError):
    """Malformed token text. ``offset`` is the byte offset of the failure."""

    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} (at offset {offset})")


class TokenArityError(GroundboxError):
    """A token group has the wrong number of values for the expected label kind."""

    def __init__(self, expected: int, got: int, kind: str):
        self.expected = expected
        self.got = got
        self.kind = kind
        super().__init__(f"expected {expected} values for {kind}, got {got}")


class TemplateBankError(GroundboxError):
    """The template bank is missing or malformed for a requested task pair."""


class TaskNotApplicableError(GroundboxError):
    """An object lacks the labels a requested task needs."""


class StandardizeError(GroundboxError):
    """A geometry error during scene standardization, tagged with the object id."""

    def __init__(self, object_id: str, message: str):
        self.object_id = object_id
        super().__init__(f"object {object_id!r}: {message}")


class SampleAlignmentError(GroundboxError):
    """Prediction and ground-truth files disagree on the sample id set."""

    def __init__(self, missing_gt: list[str], missing_pred: list[str]):
        self.missing_gt = missing_gt
        self.missing_pred = missing_pred
        parts = []
        if missing_gt:
            parts.append(f"predictions without ground truth: {missing_gt[:10]}")
        if missing_pred:
            parts.append(f"ground truth without predictions: {missing_pred[:10]}")
        super().__init__("; ".join(parts) or "sample id mismatch")


class EvalDataError(GroundboxError):
    """Ground-truth data is unusable for a requested metric."""

"""Multi-turn conversation generation from annotated scenes.

Each object contributes question/answer pairs over its derivable properties
(2D point and box, caption, depth, 3D point and box). A conversation samples
up to ``n_max`` pairs round-robin over the shuffled object list. Step-by-step
mode replaces an eligible object's contribution with an interleaved
easy-to-hard block: 2D box question and answer, then the 3D box question
answered with the 2D answer still in context.

Generation is a pure function of (scene, profile, bank, seed).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from typing import Any, Iterable, Sequence

from .codec import Caption, CodecProfile, Depth, Label, render_label
from .dataset import enrich_caption
from .errors import TaskNotApplicableError, TemplateBankError
from .geometry import (
    Box3D,
    CameraIntrinsics,
    Point2D,
    Point3D,
    project_box3d_to_box2d,
)
from .records import ObjectRecord, SceneRecord, horizontal_flip

SPECIALIST_HEADER = "Here is the list of 3D bounding boxes of all objects around the camera:"


class PropertyKind(str, Enum):
    POINT2D = "point2d"
    BOX2D = "box2d"
    CAPTION = "caption"
    DEPTH = "depth"
    POINT3D = "point3d"
    BOX3D = "box3d"


QUESTION_KINDS = (
    PropertyKind.POINT2D,
    PropertyKind.BOX2D,
    PropertyKind.CAPTION,
    PropertyKind.POINT3D,
    PropertyKind.BOX3D,
)
ANSWER_KINDS = (
    PropertyKind.POINT2D,
    PropertyKind.BOX2D,
    PropertyKind.CAPTION,
    PropertyKind.DEPTH,
    PropertyKind.POINT3D,
    PropertyKind.BOX3D,
)
_3D_KINDS = frozenset({PropertyKind.DEPTH, PropertyKind.POINT3D, PropertyKind.BOX3D})


@dataclass(frozen=True)
class Template:
    id: str
    q: PropertyKind
    a: PropertyKind
    pattern: str

    def __post_init__(self):
        if self.q is PropertyKind.DEPTH:
            raise ValueError(f"template {self.id!r}: depth cannot be a question kind")
        placeholder = "<caption>" if self.q is PropertyKind.CAPTION else "<label>"
        if self.pattern.count(placeholder) != 1:
            raise ValueError(f"template {self.id!r}: pattern needs exactly one {placeholder}")

    def fill(self, value: str) -> str:
        placeholder = "<caption>" if self.q is PropertyKind.CAPTION else "<label>"
        return self.pattern.replace(placeholder, value)


class TemplateBank:
    """Question templates indexed by (question kind, answer kind)."""

    def __init__(self, templates: Iterable[Template]):
        self._by_id: dict[str, Template] = {}
        self._by_pair: dict[tuple[PropertyKind, PropertyKind], list[Template]] = {}
        for t in templates:
            if t.id in self._by_id:
                raise TemplateBankError(f"duplicate template id {t.id!r}")
            self._by_id[t.id] = t
            self._by_pair.setdefault((t.q, t.a), []).append(t)

    @classmethod
    def from_dicts(cls, raw: Iterable[dict[str, Any]]) -> "TemplateBank":
        return cls(
            Template(
                id=str(d["id"]),
                q=PropertyKind(d["q"]),
                a=PropertyKind(d["a"]),
                pattern=str(d["pattern"]),
            )
            for d in raw
        )

    @classmethod
    def load(cls, path=None) -> "TemplateBank":
        if path is None:
            text = resources.files("groundbox").joinpath("templates.json").read_text("utf-8")
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        return cls.from_dicts(json.loads(text)["templates"])

    def for_pair(self, q: PropertyKind, a: PropertyKind) -> list[Template]:
        out = self._by_pair.get((q, a), [])
        if not out:
            raise TemplateBankError(f"no template for pair ({q.value} -> {a.value})")
        return out

    def by_id(self, template_id: str) -> Template:
        try:
            return self._by_id[template_id]
        except KeyError:
            raise TemplateBankError(f"no template with id {template_id!r}") from None


@dataclass(frozen=True)
class Turn:
    role: str
    text: str

    def __post_init__(self):
        if self.role not in ("system", "user", "assistant"):
            raise ValueError(f"unknown role {self.role!r}")


@dataclass(frozen=True)
class Conversation:
    turns: tuple[Turn, ...]
    scene_ref: str
    seed: int

    def __post_init__(self):
        roles = [t.role for t in self.turns]
        if roles and roles[0] == "system":
            roles = roles[1:]
        for i, role in enumerate(roles):
            if role != ("user" if i % 2 == 0 else "assistant"):
                raise ValueError("turns must alternate user/assistant after an optional system turn")

    @property
    def n_pairs(self) -> int:
        return sum(t.role == "assistant" for t in self.turns)


def conversation_to_dict(c: Conversation) -> dict[str, Any]:
    return {
        "scene_ref": c.scene_ref,
        "seed": c.seed,
        "turns": [{"role": t.role, "text": t.text} for t in c.turns],
    }


def conversation_from_dict(d: dict[str, Any]) -> Conversation:
    return Conversation(
        turns=tuple(Turn(t["role"], t["text"]) for t in d["turns"]),
        scene_ref=str(d["scene_ref"]),
        seed=int(d["seed"]),
    )


# ---------------------------------------------------------------------------
# Property derivation
# ---------------------------------------------------------------------------


def property_value(
    o: ObjectRecord, kind: PropertyKind, cam: CameraIntrinsics, profile: CodecProfile
) -> Label:
    """The label carrying one property of an object, deriving it if needed."""
    if kind is PropertyKind.CAPTION:
        return Caption(o.caption if o.caption is not None else enrich_caption(o))
    if kind is PropertyKind.BOX2D:
        if o.box2d is not None:
            return o.box2d
        if o.box3d is not None:
            return project_box3d_to_box2d(o.box3d, cam, clip=True)
    if kind is PropertyKind.POINT2D:
        if o.point2d is not None:
            return o.point2d
        if o.box2d is not None:
            return Point2D((o.box2d.x1 + o.box2d.x2) / 2.0, (o.box2d.y1 + o.box2d.y2) / 2.0)
        if o.box3d is not None:
            return Point2D(o.box3d.xh, o.box3d.yh)
    if o.box3d is not None:
        if kind is PropertyKind.DEPTH:
            return Depth(o.box3d.z)
        if kind is PropertyKind.POINT3D:
            return Point3D(o.box3d.xh, o.box3d.yh, o.box3d.z)
        if kind is PropertyKind.BOX3D:
            return o.box3d
    raise TaskNotApplicableError(f"object {o.id!r} has no data for {kind.value}")


def _available_kinds(o: ObjectRecord) -> set[PropertyKind]:
    kinds = {PropertyKind.CAPTION}
    if o.point2d is not None or o.box2d is not None or o.box3d is not None:
        kinds.add(PropertyKind.POINT2D)
    if o.box2d is not None or o.box3d is not None:
        kinds.add(PropertyKind.BOX2D)
    if o.box3d is not None:
        kinds |= _3D_KINDS
    return kinds


def enumerate_tasks(
    o: ObjectRecord, stage: int = 2, use_2d_only: bool = False
) -> list[tuple[PropertyKind, PropertyKind]]:
    """All (question, answer) property pairs derivable for an object.

    Stage-1 sources restricted to 2D contribute no 3D kinds on either side.
    Identical question/answer kinds are excluded; everything else, including
    duplicates in text once templated, is allowed.
    """
    kinds = _available_kinds(o)
    if stage == 1 and use_2d_only:
        kinds -= _3D_KINDS
    qs = [k for k in QUESTION_KINDS if k in kinds]
    ans = [k for k in ANSWER_KINDS if k in kinds]
    return [(q, a) for q in qs for a in ans if q != a]


def _question_value(o, kind, cam, profile) -> str:
    value = property_value(o, kind, cam, profile)
    if isinstance(value, Caption):
        return value.text
    return render_label(value, profile)


def build_qa(
    o: ObjectRecord,
    pair: tuple[PropertyKind, PropertyKind],
    bank: TemplateBank,
    profile: CodecProfile,
    cam: CameraIntrinsics,
    rng: random.Random,
) -> tuple[str, str]:
    """One (question, answer) pair from a uniformly sampled template."""
    q_kind, a_kind = pair
    template = rng.choice(bank.for_pair(q_kind, a_kind))
    question = template.fill(_question_value(o, q_kind, cam, profile))
    answer_label = property_value(o, a_kind, cam, profile)
    answer = render_label(answer_label, profile)
    return question, answer


def build_vcot(
    o: ObjectRecord,
    bank: TemplateBank,
    profile: CodecProfile,
    cam: CameraIntrinsics,
) -> tuple[Turn, ...]:
    """The four-turn easy-to-hard block: 2D question/answer, then 3D."""
    if o.box3d is None:
        raise TaskNotApplicableError(f"object {o.id!r} has no 3D box for step-by-step prompting")
    caption = _question_value(o, PropertyKind.CAPTION, cam, profile)
    q2d = bank.by_id("vcot.box2d").fill(caption)
    a2d = render_label(property_value(o, PropertyKind.BOX2D, cam, profile), profile)
    q3d = bank.by_id("vcot.box3d").fill(caption)
    a3d = render_label(o.box3d, profile)
    return (
        Turn("user", q2d),
        Turn("assistant", a2d),
        Turn("user", q3d),
        Turn("assistant", a3d),
    )


@dataclass(frozen=True)
class SpecialistCandidate:
    box: Box3D
    confidence: float | None = None


def build_specialist_prompt(
    candidates: Sequence[SpecialistCandidate],
    profile: CodecProfile,
    top_k: int = 30,
) -> Turn:
    """System turn listing up to ``top_k`` candidate boxes, one per line.

    When every candidate carries a confidence the list is confidence-descending
    (stable under ties); otherwise input order is kept.
    """
    ordered = list(candidates)
    if ordered and all(c.confidence is not None for c in ordered):
        ordered.sort(key=lambda c: -c.confidence)
    lines = [render_label(c.box, profile) for c in ordered[:top_k]]
    text = SPECIALIST_HEADER if not lines else SPECIALIST_HEADER + "\n" + "\n".join(lines)
    return Turn("system", text)


# Size classes for indoor location prompts: upper bounds on max(w, h, l) and
# the minimum depth at which a location cue is considered unambiguous.
_SIZE_CLASSES = (("small", 0.5, 1.0), ("medium", 2.0, 4.0), ("large", 3.0, 10.0))
_CLOSE_DEPTH = 0.8


def indoor_location_prompt(o: ObjectRecord, cam: CameraIntrinsics) -> str:
    """Class text augmented with a location cue for indoor grounding prompts.

    Emits "close to camera" under 0.8 m; "on the left" / "on the right" /
    "at the center" when the projected center lies in the respective 20% band
    and the object is far enough for its size class; otherwise the plain text.
    """
    if o.box3d is None:
        raise TaskNotApplicableError(f"object {o.id!r} has no 3D box")
    base = o.caption if o.caption is not None else enrich_caption(o)
    b = o.box3d
    if b.z < _CLOSE_DEPTH:
        return f"{base} close to camera"
    max_dim = max(b.w, b.h, b.l)
    for _, bound, min_depth in _SIZE_CLASSES:
        if max_dim < bound:
            if b.z >= min_depth:
                width = cam.width
                if b.xh <= 0.2 * width:
                    return f"{base} on the left"
                if b.xh >= 0.8 * width:
                    return f"{base} on the right"
                if 0.4 * width <= b.xh <= 0.6 * width:
                    return f"{base} at the center"
            return base
    return base


def maybe_flip(scene: SceneRecord, rng: random.Random, p: float = 0.5) -> SceneRecord:
    """Randomly mirror a scene unless any caption is orientation-sensitive."""
    if any(o.orientation_sensitive for o in scene.objects):
        return scene
    if rng.random() < p:
        return horizontal_flip(scene)
    return scene


# ---------------------------------------------------------------------------
# Conversation assembly
# ---------------------------------------------------------------------------


def _vcot_eligible(o: ObjectRecord) -> bool:
    return o.box3d is not None


def build_conversation(
    scene: SceneRecord,
    profile: CodecProfile,
    bank: TemplateBank,
    rng: random.Random,
    n_max: int = 30,
    stage: int = 2,
    use_2d_only: bool = False,
    vcot: bool = False,
    specialist: Sequence[SpecialistCandidate] | None = None,
    seed: int = 0,
) -> Conversation:
    """Sample up to ``n_max`` question/answer pairs for one scene.

    Objects are shuffled, each object's task pairs are shuffled, and pairs are
    drawn round-robin until the budget or every pool is exhausted. With
    ``vcot`` an object holding a 3D box contributes a single four-turn block
    (costing two pairs) instead of standalone pairs. A scene with no eligible
    objects yields an empty conversation.
    """
    cam = scene.intrinsics
    objects = list(scene.objects)
    rng.shuffle(objects)

    allow_3d = not (stage == 1 and use_2d_only)
    pools: list[list[tuple[str, Any]]] = []
    for o in objects:
        if vcot and allow_3d and _vcot_eligible(o):
            pools.append([("vcot", o)])
            continue
        pairs = enumerate_tasks(o, stage=stage, use_2d_only=use_2d_only)
        rng.shuffle(pairs)
        pools.append([("pair", (o, p)) for p in pairs])

    turns: list[Turn] = []
    if specialist is not None:
        turns.append(build_specialist_prompt(specialist, profile))

    budget = n_max
    progressed = True
    while budget > 0 and progressed:
        progressed = False
        for pool in pools:
            if not pool or budget <= 0:
                continue
            kind, payload = pool[0]
            cost = 2 if kind == "vcot" else 1
            if cost > budget:
                continue
            pool.pop(0)
            progressed = True
            if kind == "vcot":
                turns.extend(build_vcot(payload, bank, profile, cam))
            else:
                o, pair = payload
                q, a = build_qa(o, pair, bank, profile, cam, rng)
                turns.append(Turn("user", q))
                turns.append(Turn("assistant", a))
            budget -= cost
    return Conversation(turns=tuple(turns), scene_ref=scene.image_ref, seed=seed)

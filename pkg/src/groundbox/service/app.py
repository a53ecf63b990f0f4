"""FastAPI service wrapping the core toolkit.

Element-wise endpoints (codec, IoU, geometry) serve training pipelines that
need bit-identical token handling; pipeline endpoints run the batch drivers on
server-local paths. The eval endpoint returns the report in its canonical
serialization so clients can compare it byte for byte against CLI output.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response

from .. import __version__
from ..codec import LabelKind, extract_labels, parse_label, render_label
from ..errors import (
    GroundboxError,
    LabelRangeError,
    SampleAlignmentError,
    TokenArityError,
    TokenParseError,
)
from ..evaluation import EvalConfig, load_threshold_profile
from ..geometry import Box3D, project_box3d_to_box2d, to_virtual_camera
from ..iou import bev_iou, iou_2d, iou_3d
from ..pipeline import run_associate, run_convgen, run_eval, run_standardize
from . import schemas as s


def _error_response(status: int, error: str, message: str, **extra) -> JSONResponse:
    payload = {"error": error, "message": message}
    payload.update({k: v for k, v in extra.items() if v is not None})
    return JSONResponse(status_code=status, content={"detail": payload})


def create_app() -> FastAPI:
    app = FastAPI(title="groundbox", version=__version__)

    @app.exception_handler(TokenParseError)
    async def _parse_error(request: Request, exc: TokenParseError):
        return _error_response(422, "parse", str(exc), offset=exc.offset)

    @app.exception_handler(TokenArityError)
    async def _arity_error(request: Request, exc: TokenArityError):
        return _error_response(422, "arity", str(exc), expected=exc.expected, got=exc.got)

    @app.exception_handler(LabelRangeError)
    async def _range_error(request: Request, exc: LabelRangeError):
        return _error_response(422, "range", str(exc), field=exc.field)

    @app.exception_handler(SampleAlignmentError)
    async def _alignment_error(request: Request, exc: SampleAlignmentError):
        return _error_response(
            422,
            "alignment",
            str(exc),
            missing_gt=exc.missing_gt[:50],
            missing_pred=exc.missing_pred[:50],
        )

    @app.exception_handler(FileNotFoundError)
    async def _missing_file(request: Request, exc: FileNotFoundError):
        return _error_response(404, "not_found", str(exc))

    @app.exception_handler(GroundboxError)
    async def _domain_error(request: Request, exc: GroundboxError):
        return _error_response(422, "domain", str(exc))

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return _error_response(422, "invalid", str(exc))

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    # -- codec ---------------------------------------------------------------

    @app.post("/v1/codec/render", response_model=s.RenderResponse)
    def codec_render(req: s.RenderRequest) -> s.RenderResponse:
        text = render_label(req.label.to_label(), req.profile.to_profile())
        return s.RenderResponse(text=text)

    @app.post("/v1/codec/parse", response_model=s.ParseResponse)
    def codec_parse(req: s.ParseRequest) -> s.ParseResponse:
        label = parse_label(req.text, LabelKind(req.kind), req.profile.to_profile())
        return s.ParseResponse(label=s.LabelModel.from_label(label))

    @app.post("/v1/codec/extract", response_model=s.ExtractResponse)
    def codec_extract(req: s.ExtractRequest) -> s.ExtractResponse:
        found = extract_labels(req.text, req.profile.to_profile())
        return s.ExtractResponse(
            labels=[
                s.ExtractedLabelModel(
                    start=e.start,
                    end=e.end,
                    kind=e.kind.value,
                    label=s.LabelModel.from_label(e.label),
                )
                for e in found
            ]
        )

    # -- geometry and IoU ----------------------------------------------------

    @app.post("/v1/iou", response_model=s.IouResponse)
    def iou_endpoint(req: s.IouRequest) -> s.IouResponse:
        a = req.a.to_label()
        b = req.b.to_label()
        if req.kind == "2d":
            return s.IouResponse(iou=iou_2d(a, b))
        cam = (req.camera or _default_camera()).to_intrinsics()
        fn = bev_iou if req.kind == "bev" else iou_3d
        return s.IouResponse(iou=fn(a, b, cam))

    @app.post("/v1/geometry/virtual-camera", response_model=s.VirtualCameraResponse)
    def virtual_camera(req: s.VirtualCameraRequest) -> s.VirtualCameraResponse:
        box = Box3D(*map(float, req.box3d))
        out, cam = to_virtual_camera(
            box, req.camera.to_intrinsics(), req.f_virtual, (req.target_width, req.target_height)
        )
        return s.VirtualCameraResponse(
            box3d=[out.xh, out.yh, out.z, out.w, out.h, out.l, out.r1, out.r2, out.r3],
            camera=s.CameraModel.from_intrinsics(cam),
        )

    @app.post("/v1/geometry/project", response_model=s.ProjectResponse)
    def project(req: s.ProjectRequest) -> s.ProjectResponse:
        box = Box3D(*map(float, req.box3d))
        out = project_box3d_to_box2d(box, req.camera.to_intrinsics(), clip=req.clip)
        return s.ProjectResponse(box2d=[out.x1, out.y1, out.x2, out.y2])

    # -- pipelines -----------------------------------------------------------

    @app.post("/v1/pipeline/standardize")
    def pipeline_standardize(req: s.StandardizeRequest):
        return run_standardize(
            req.manifest_path,
            req.out_path,
            f_virtual=req.f_virtual,
            target=(req.width, req.height),
            profile_mode=req.profile_mode,
            seed=req.seed,
            workers=req.workers,
        )

    @app.post("/v1/pipeline/convgen")
    def pipeline_convgen(req: s.ConvgenRequest):
        return run_convgen(
            req.scenes_path,
            req.out_path,
            n_max=req.n_max,
            stage=req.stage,
            vcot=req.vcot,
            specialist=req.specialist,
            specialist_path=req.specialist_path,
            flip_prob=req.flip_prob,
            seed=req.seed,
            profile_mode=req.profile_mode,
            width=req.width,
            height=req.height,
            workers=req.workers,
            manifest_path=req.manifest_path,
            bank_path=req.bank_path,
        )

    @app.post("/v1/pipeline/associate")
    def pipeline_associate(req: s.AssociateRequest):
        return run_associate(
            req.labels2d_path,
            req.boxes3d_path,
            req.out_path,
            iou_threshold=req.iou_threshold,
            workers=req.workers,
        )

    @app.post("/v1/eval/run")
    def eval_run(req: s.EvalRequest) -> Response:
        config = EvalConfig(
            metrics=tuple(req.metrics),
            threshold_2d=req.threshold_2d,
            profile_a=load_threshold_profile(req.profile_a_path) if req.profile_a_path else None,
            profile_b=load_threshold_profile(req.profile_b_path) if req.profile_b_path else None,
            indoor_taus=tuple(req.indoor_taus),
            codec_mode=req.codec_mode,
            image_width=req.width,
            image_height=req.height,
            f_virtual=req.f_virtual,
        )
        report = run_eval(req.pred_path, req.gt_path, config)
        # Canonical bytes, not FastAPI's re-serialization, so CLI and HTTP
        # clients see identical report text.
        return Response(content=report.to_json(), media_type="application/json")

    return app


def _default_camera() -> "s.CameraModel":
    return s.CameraModel(fx=512.0, fy=512.0, cx=336.0, cy=336.0, width=672.0, height=672.0)


app = create_app()

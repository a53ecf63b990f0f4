"""Command-line client for the toolkit service.

Every subcommand builds the same request the HTTP API accepts and sends it
either to an in-process app (the default, no server needed) or to a running
server given with ``--server``. Exit code is 0 only when the run recorded no
errors.
"""

from __future__ import annotations

import json
import sys

import click
import httpx

from .parallel import WORKERS_ENV


class ServiceClient:
    """Minimal POST/GET wrapper over a remote or in-process service.

    The underlying client is created on first use, so commands that never
    issue a request (like ``serve``) do not spin up the in-process app.
    """

    def __init__(self, server: str | None = None):
        self._server = server
        self._client = None

    def _connect(self):
        if self._client is None:
            if self._server:
                self._client = httpx.Client(base_url=self._server.rstrip("/"), timeout=600.0)
            else:
                from fastapi.testclient import TestClient

                from .service.app import create_app

                self._client = TestClient(create_app(), raise_server_exceptions=False)
        return self._client

    def post(self, path: str, payload: dict) -> httpx.Response:
        return self._connect().post(path, json=payload)

    def get(self, path: str) -> httpx.Response:
        return self._connect().get(path)


def _fail(response: httpx.Response) -> None:
    try:
        detail = response.json().get("detail", response.text)
    except ValueError:
        detail = response.text
    click.echo(f"error ({response.status_code}): {json.dumps(detail)}", err=True)
    sys.exit(1)


def _post_or_die(client: ServiceClient, path: str, payload: dict) -> httpx.Response:
    response = client.post(path, payload)
    if response.status_code != 200:
        _fail(response)
    return response


def _parse_size(size: str) -> tuple[float, float]:
    try:
        w, h = size.lower().split("x")
        return float(w), float(h)
    except ValueError:
        raise click.BadParameter(f"expected WIDTHxHEIGHT, got {size!r}")


@click.group()
@click.option("--server", default=None, help="Service base URL; default runs in-process.")
@click.pass_context
def main(ctx: click.Context, server: str | None):
    """Dataset construction and evaluation toolkit for 2D/3D grounding."""
    ctx.obj = ServiceClient(server)


@main.command()
@click.argument("manifest", type=click.Path())
@click.option("-o", "--out", required=True, type=click.Path(), help="Output scene JSONL.")
@click.option("--f-virtual", default=512.0, show_default=True)
@click.option("--size", default="672x672", show_default=True, help="Target size WIDTHxHEIGHT.")
@click.option("--profile", "profile_mode", type=click.Choice(["pretrain", "finetune"]), default="pretrain", show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--workers", default=None, type=int, help=f"Worker count (or ${WORKERS_ENV}).")
@click.pass_obj
def standardize(client: ServiceClient, manifest, out, f_virtual, size, profile_mode, seed, workers):
    """Ingest manifest sources, standardize to the virtual camera, range-filter."""
    width, height = _parse_size(size)
    response = _post_or_die(
        client,
        "/v1/pipeline/standardize",
        {
            "manifest_path": str(manifest),
            "out_path": str(out),
            "f_virtual": f_virtual,
            "width": width,
            "height": height,
            "profile_mode": profile_mode,
            "seed": seed,
            "workers": workers,
        },
    )
    summary = response.json()
    click.echo(json.dumps(summary, indent=2, sort_keys=True))
    if summary.get("ingest_errors"):
        click.echo(f"{len(summary['ingest_errors'])} ingest error(s); see report above", err=True)
        sys.exit(1)


@main.command()
@click.argument("scenes", type=click.Path())
@click.option("-o", "--out", required=True, type=click.Path(), help="Output conversation JSONL.")
@click.option("--n-max", default=30, show_default=True)
@click.option("--stage", type=click.Choice(["1", "2"]), default="2", show_default=True)
@click.option("--vcot", is_flag=True, help="Emit easy-to-hard 2D-then-3D blocks per object.")
@click.option("--specialist", default=None, help="'gt' or 'file=CANDIDATES.jsonl'.")
@click.option("--flip-prob", default=0.0, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--profile", "profile_mode", type=click.Choice(["pretrain", "finetune"]), default="pretrain", show_default=True)
@click.option("--size", default="672x672", show_default=True)
@click.option("--manifest", "manifest_path", default=None, type=click.Path(), help="Manifest for per-source stage-1 flags.")
@click.option("--templates", "bank_path", default=None, type=click.Path(), help="Custom template bank JSON.")
@click.option("--workers", default=None, type=int)
@click.pass_obj
def convgen(client, scenes, out, n_max, stage, vcot, specialist, flip_prob, seed, profile_mode, size, manifest_path, bank_path, workers):
    """Generate multi-turn conversations from standardized scenes."""
    width, height = _parse_size(size)
    mode, spec_path = None, None
    if specialist:
        if specialist == "gt":
            mode = "gt"
        elif specialist.startswith("file="):
            mode, spec_path = "file", specialist[len("file="):]
        else:
            raise click.BadParameter("--specialist must be 'gt' or 'file=PATH'")
    response = _post_or_die(
        client,
        "/v1/pipeline/convgen",
        {
            "scenes_path": str(scenes),
            "out_path": str(out),
            "n_max": n_max,
            "stage": int(stage),
            "vcot": vcot,
            "specialist": mode,
            "specialist_path": spec_path,
            "flip_prob": flip_prob,
            "seed": seed,
            "profile_mode": profile_mode,
            "width": width,
            "height": height,
            "workers": workers,
            "manifest_path": str(manifest_path) if manifest_path else None,
            "bank_path": str(bank_path) if bank_path else None,
        },
    )
    click.echo(json.dumps(response.json(), indent=2, sort_keys=True))


@main.command()
@click.argument("labels2d", type=click.Path())
@click.argument("boxes3d", type=click.Path())
@click.option("-o", "--out", required=True, type=click.Path(), help="Output association JSONL.")
@click.option("--iou-threshold", default=0.35, show_default=True)
@click.option("--workers", default=None, type=int)
@click.pass_obj
def associate(client, labels2d, boxes3d, out, iou_threshold, workers):
    """Match labeled 2D boxes to projected 3D boxes, keeping IoU > threshold."""
    response = _post_or_die(
        client,
        "/v1/pipeline/associate",
        {
            "labels2d_path": str(labels2d),
            "boxes3d_path": str(boxes3d),
            "out_path": str(out),
            "iou_threshold": iou_threshold,
            "workers": workers,
        },
    )
    click.echo(json.dumps(response.json(), indent=2, sort_keys=True))


@main.command(name="eval")
@click.argument("preds", type=click.Path())
@click.argument("gts", type=click.Path())
@click.option("--metrics", default="2d,bev,3d", show_default=True, help="Comma-separated subset of 2d,bev,3d,indoor.")
@click.option("--threshold-2d", default=0.5, show_default=True)
@click.option("--profile-a", default=None, type=click.Path(exists=True), help="Category-threshold profile JSON (A).")
@click.option("--profile-b", default=None, type=click.Path(exists=True), help="Category-threshold profile JSON (B).")
@click.option("--indoor", is_flag=True, help="Add the indoor multi-threshold mAP.")
@click.option("--codec", "codec_mode", type=click.Choice(["pretrain", "finetune"]), default="finetune", show_default=True)
@click.option("--size", default="672x672", show_default=True)
@click.option("--f-virtual", default=512.0, show_default=True)
@click.option("-o", "--out", default=None, type=click.Path(), help="Write report JSON here instead of stdout.")
@click.pass_obj
def eval_cmd(client, preds, gts, metrics, threshold_2d, profile_a, profile_b, indoor, codec_mode, size, f_virtual, out):
    """Score predictions against ground truth; writes a canonical JSON report."""
    width, height = _parse_size(size)
    metric_list = [m.strip() for m in metrics.split(",") if m.strip()]
    if indoor and "indoor" not in metric_list:
        metric_list.append("indoor")
    response = _post_or_die(
        client,
        "/v1/eval/run",
        {
            "pred_path": str(preds),
            "gt_path": str(gts),
            "metrics": metric_list,
            "threshold_2d": threshold_2d,
            "profile_a_path": str(profile_a) if profile_a else None,
            "profile_b_path": str(profile_b) if profile_b else None,
            "codec_mode": codec_mode,
            "width": width,
            "height": height,
            "f_virtual": f_virtual,
        },
    )
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(response.text)
    else:
        click.echo(response.text, nl=False)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8304, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()

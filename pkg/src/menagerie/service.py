"""HTTP facade over the library, agents, meshing, and rendering modules.

Every endpoint is a thin adapter: it parses the request, calls the module
operation, and serializes with the same canonical encoders the modules
expose, so responses are byte-identical to direct invocation. The only
state is the library snapshot loaded at startup.
"""

from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import Body, FastAPI, Query, Request, Response
from fastapi.middleware.cors import CORSMiddleware

from . import agents, balloon, library, render, skeleton
from .camera import Camera, CameraError, project_keypoints
from .guidance import ScheduleConfig
from .report import schedule_curve

log = logging.getLogger("menagerie.service")

ENV_CHAT_URL = "CHAT_API_URL"
ENV_CHAT_KEY = "CHAT_API_KEY"
ENV_LIBRARY_DIR = "LIBRARY_DIR"


class ServiceError(Exception):
    pass


class LibraryLoadError(ServiceError):
    pass


@dataclass(frozen=True)
class ApiConfig:
    host: str = "127.0.0.1"
    port: int = 8420
    library_path: str = library.BUILTIN
    backend: str = "mock"                # "mock" | "external"
    chat_url: str | None = None
    chat_key: str | None = None
    transcripts_dir: str | None = None   # mock fixtures; bundled when unset
    cors_origins: tuple[str, ...] = ("*",)

    def __post_init__(self):
        if not 0 < self.port < 65536:
            raise ServiceError(f"invalid port: {self.port}")
        if self.backend not in ("mock", "external"):
            raise ServiceError(f"backend must be 'mock' or 'external', got {self.backend!r}")
        if self.backend == "external" and not self.chat_url:
            raise ServiceError("external backend requires a chat URL")

    @classmethod
    def from_env(cls, **overrides) -> "ApiConfig":
        """Environment-driven config; the mock backend is used without a key."""
        url = os.environ.get(ENV_CHAT_URL) or None
        key = os.environ.get(ENV_CHAT_KEY) or None
        values = {
            "library_path": os.environ.get(ENV_LIBRARY_DIR) or library.BUILTIN,
            "backend": "external" if (url and key) else "mock",
            "chat_url": url,
            "chat_key": key,
        }
        values.update(overrides)
        return cls(**values)


def canonical_json(obj: object) -> bytes:
    """The byte encoding used for every JSON response."""
    return (json.dumps(obj, ensure_ascii=False, indent=2) + "\n").encode("utf-8")


def _json_response(obj: object, status: int = 200) -> Response:
    return Response(canonical_json(obj), status_code=status, media_type="application/json")


def _error(status: int, message: str) -> Response:
    return _json_response({"error": message}, status)


def _make_backend(cfg: ApiConfig) -> agents.ChatBackend:
    if cfg.backend == "external":
        return agents.HttpChatBackend(cfg.chat_url, cfg.chat_key)
    if cfg.transcripts_dir:
        return agents.MockChatBackend.from_fixture_dir(cfg.transcripts_dir)
    return agents.MockChatBackend.bundled()


def entry_summary(e: library.LibraryEntry) -> dict:
    return {"animal": e.animal_name, "pose": e.pose_label}


def entry_detail(result: library.LookupResult) -> dict:
    e = result.entry
    return {
        "animal": e.animal_name,
        "pose": e.pose_label,
        "ambiguous": result.ambiguous,
        "skeleton": skeleton.skeleton_to_dict(e.skeleton),
    }


def _skeleton_from_payload(payload: dict) -> skeleton.Skeleton:
    doc = payload.get("skeleton") if isinstance(payload.get("skeleton"), dict) else payload
    return skeleton.skeleton_from_dict(doc)


def create_app(cfg: ApiConfig | None = None) -> FastAPI:
    cfg = cfg or ApiConfig.from_env()
    try:
        lib = library.load_library(cfg.library_path)
    except (OSError, skeleton.SchemaError) as exc:
        raise LibraryLoadError(f"cannot load library from {cfg.library_path}: {exc}") from exc

    app = FastAPI(title="menagerie", version="0.1.0")
    if cfg.cors_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(cfg.cors_origins),
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.middleware("http")
    async def _log_requests(request: Request, call_next):
        start = time.perf_counter()
        response = await call_next(request)
        log.info(
            json.dumps(
                {
                    "method": request.method,
                    "path": request.url.path,
                    "status": response.status_code,
                    "ms": round((time.perf_counter() - start) * 1000, 2),
                }
            )
        )
        return response

    @app.get("/v1/animals")
    def list_animals() -> Response:
        return _json_response([entry_summary(e) for e in lib.entries])

    @app.get("/v1/animals/{name}")
    def get_animal(name: str, pose: str | None = Query(default=None)) -> Response:
        try:
            result = library.lookup(lib, name, pose)
        except library.NotFoundError as exc:
            return _error(404, str(exc))
        return _json_response(entry_detail(result))

    @app.post("/v1/adapt")
    def adapt(payload: dict = Body(...)) -> Response:
        animal = payload.get("animal")
        pose = payload.get("pose", "")
        if not isinstance(animal, str) or not animal:
            return _error(422, "body must carry a non-empty 'animal'")
        if not isinstance(pose, str):
            return _error(422, "'pose' must be a string")
        backend = _make_backend(cfg)
        try:
            record = agents.adapt_pose(backend, lib, animal, pose)
        except (agents.AgentError, library.LibraryError) as exc:
            return _error(422, str(exc))
        return Response(record.to_json().encode("utf-8"), media_type="application/json")

    @app.post("/v1/skeleton/validate")
    def validate(payload: dict = Body(...)) -> Response:
        try:
            s = _skeleton_from_payload(payload)
        except skeleton.SchemaError as exc:
            return _error(422, str(exc))
        return _json_response(skeleton.validate_skeleton(s).to_dict())

    @app.post("/v1/skeleton/appendage")
    def appendage(payload: dict = Body(...)) -> Response:
        try:
            s = _skeleton_from_payload(payload)
            kind = skeleton.AppendageKind(payload.get("kind"))
            anchor = payload.get("anchor")
            if not isinstance(anchor, str):
                return _error(422, "'anchor' must be a keypoint name")
            grown = skeleton.add_appendage(s, kind, anchor)
        except (skeleton.SkeletonError, ValueError) as exc:
            return _error(422, str(exc))
        return Response(skeleton.serialize(grown).encode("utf-8"), media_type="application/json")

    @app.post("/v1/mesh")
    def mesh(payload: dict = Body(...)) -> Response:
        try:
            s = _skeleton_from_payload(payload)
        except skeleton.SchemaError as exc:
            return _error(422, str(exc))
        report = skeleton.validate_skeleton(s)
        if not report.ok:
            return _json_response(report.to_dict(), 422)
        params = balloon.PrimitiveParams.from_dict(payload.get("params") or {})
        m = balloon.build_mesh(s, params)
        return Response(balloon.export_obj(m).encode("utf-8"), media_type="text/plain")

    @app.post("/v1/project")
    def project(payload: dict = Body(...)) -> Response:
        try:
            s = _skeleton_from_payload(payload)
            cam = Camera.from_dict(payload["camera"])
        except (skeleton.SchemaError, CameraError, KeyError, TypeError, ValueError) as exc:
            return _error(422, f"bad request: {exc}")
        proj = project_keypoints(s, cam)
        image = render.rasterize_pose_image(proj, s.bones)
        return Response(image.to_png_bytes(), media_type="image/png")

    @app.post("/v1/depth")
    def depth(payload: dict = Body(...)) -> Response:
        try:
            cam = Camera.from_dict(payload["camera"])
            if isinstance(payload.get("mesh_obj"), str):
                m = balloon.parse_obj(payload["mesh_obj"])
            else:
                s = _skeleton_from_payload(payload)
                report = skeleton.validate_skeleton(s)
                if not report.ok:
                    return _json_response(report.to_dict(), 422)
                params = balloon.PrimitiveParams.from_dict(payload.get("params") or {})
                m = balloon.build_mesh(s, params)
        except (skeleton.SchemaError, balloon.MeshError, CameraError, KeyError, TypeError, ValueError) as exc:
            return _error(422, f"bad request: {exc}")
        return Response(render.render_depth(m, cam).to_png_bytes(), media_type="image/png")

    @app.get("/v1/schedule")
    def schedule(steps: int = Query(default=11, ge=1, le=100_000)) -> Response:
        return _json_response(schedule_curve(ScheduleConfig(), steps))

    return app


def serve(cfg: ApiConfig | None = None) -> None:
    """Run the service until interrupted; uvicorn handles graceful shutdown."""
    import uvicorn

    cfg = cfg or ApiConfig.from_env()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    app = create_app(cfg)
    uvicorn.run(app, host=cfg.host, port=cfg.port, log_level="info")

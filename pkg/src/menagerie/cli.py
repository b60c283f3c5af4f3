"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data/runtime error. Report-style
commands (``schedule preview``, ``sds demo``) write CSV next to rendered
matplotlib figures.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__, agents, balloon, library, render, skeleton
from .camera import Camera, CameraError, project_keypoints, sample_camera
from .guidance import (
    GuidanceError,
    NoiseSchedule,
    ScheduleConfig,
    TargetOracle,
    optimize_toy,
)
from .report import plot_schedule, plot_trace, schedule_csv, schedule_curve, trace_csv
from .service import ApiConfig, LibraryLoadError, ServiceError, serve

_DATA_ERRORS = (
    OSError,
    json.JSONDecodeError,
    skeleton.SkeletonError,
    library.LibraryError,
    agents.AgentError,
    balloon.MeshError,
    CameraError,
    GuidanceError,
    ServiceError,
    LibraryLoadError,
    ValueError,
)


def _load_config_file(path: Path) -> dict:
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".toml":
        try:
            import tomllib  # py311+
        except ModuleNotFoundError:
            import tomli as tomllib
        return tomllib.loads(text)
    return json.loads(text)


def _read_skeleton(path: Path) -> skeleton.Skeleton:
    return skeleton.deserialize(path.read_text(encoding="utf-8"))


def _camera_options(fn):
    """Shared camera flags: explicit JSON file, or sampled from ranges."""
    for option in reversed(
        (
            click.option("--camera", "camera_file", type=click.Path(path_type=Path),
                         default=None, help="Camera JSON file; overrides sampling flags."),
            click.option("--seed", type=int, default=None,
                         help="Sample the camera from the ranges with this seed."),
            click.option("--radius-range", nargs=2, type=float, default=(1.0, 2.0),
                         show_default=True),
            click.option("--azimuth-range", nargs=2, type=float, default=(0.0, 360.0),
                         show_default=True),
            click.option("--polar-range", nargs=2, type=float, default=(60.0, 120.0),
                         show_default=True),
            click.option("--size", type=int, default=512, show_default=True,
                         help="Square output resolution in pixels."),
        )
    ):
        fn = option(fn)
    return fn


def _resolve_camera(camera_file: Path | None, seed: int | None, radius_range,
                    azimuth_range, polar_range, size: int) -> Camera:
    if camera_file is not None:
        return Camera.from_dict(json.loads(camera_file.read_text(encoding="utf-8")))
    if seed is not None:
        return sample_camera(
            seed,
            radius_range=tuple(radius_range),
            azimuth_range=tuple(azimuth_range),
            polar_range=tuple(polar_range),
            image_size=(size, size),
        )
    return Camera(1.5, 30.0, 75.0, image_size=(size, size))


@click.group(name="menagerie")
@click.version_option(__version__)
def root() -> None:
    """Skeleton posing, balloon meshing, rendering, and guidance schedules."""


@root.group(name="library")
def lib_group() -> None:
    """Pose library commands."""


@lib_group.command(name="list")
@click.option("--library", "library_path", default=library.BUILTIN, show_default=True,
              help="Library directory, or 'builtin'.")
def library_list(library_path: str) -> None:
    """Print every entry as 'animal | pose'."""
    lib = library.load_library(library_path)
    for entry in lib.entries:
        click.echo(f"{entry.animal_name} | {entry.pose_label}")


@root.command()
@click.argument("animal")
@click.argument("pose")
@click.option("--library", "library_path", default=library.BUILTIN, show_default=True)
@click.option("--backend", type=click.Choice(["mock", "external"]), default=None,
              help="Default: external when CHAT_API_URL/KEY are set, else mock.")
@click.option("--transcripts", type=click.Path(path_type=Path), default=None,
              help="Mock transcript fixture directory (default: bundled).")
@click.option("-o", "--output", type=click.Path(path_type=Path), default=None,
              help="Write the adaptation record JSON here (default: stdout).")
def adapt(animal: str, pose: str, library_path: str, backend: str | None,
          transcripts: Path | None, output: Path | None) -> None:
    """Adapt a library pose to ANIMAL in the described POSE."""
    overrides: dict = {
        "library_path": library_path,
        "transcripts_dir": str(transcripts) if transcripts else None,
    }
    if backend is not None:
        overrides["backend"] = backend
    cfg = ApiConfig.from_env(**overrides)
    lib = library.load_library(library_path)
    from .service import _make_backend

    record = agents.adapt_pose(_make_backend(cfg), lib, animal, pose)
    text = record.to_json()
    if output:
        output.write_text(text, encoding="utf-8")
        click.echo(f"wrote {output}")
    else:
        click.echo(text, nl=False)
    click.echo(
        f"# finder chose: {record.finder.chosen.animal_name} ({record.finder.chosen.pose_label})",
        err=True,
    )


@root.command()
@click.argument("skeleton_file", type=click.Path(path_type=Path))
@click.option("-o", "--output", type=click.Path(path_type=Path), required=True)
@click.option("--params", "params_file", type=click.Path(path_type=Path), default=None,
              help="PrimitiveParams overrides (TOML or JSON).")
def mesh(skeleton_file: Path, output: Path, params_file: Path | None) -> None:
    """Build the balloon mesh for a skeleton JSON file and write OBJ."""
    if not skeleton_file.exists():
        raise click.ClickException(f"file not found: {skeleton_file}")
    s = _read_skeleton(skeleton_file)
    params = balloon.PrimitiveParams.from_dict(
        _load_config_file(params_file) if params_file else {}
    )
    m = balloon.build_mesh(s, params)
    output.write_text(balloon.export_obj(m), encoding="utf-8")
    click.echo(f"wrote {output} ({len(m.vertices)} vertices, {len(m.triangles)} triangles)")
    for note in m.skipped:
        click.echo(f"note: {note}", err=True)


@root.command()
@click.argument("skeleton_file", type=click.Path(path_type=Path))
@_camera_options
@click.option("-o", "--output", type=click.Path(path_type=Path), required=True)
def project(skeleton_file: Path, camera_file: Path | None, seed: int | None,
            radius_range, azimuth_range, polar_range, size: int, output: Path) -> None:
    """Render the pose-control image for a skeleton and camera."""
    if not skeleton_file.exists():
        raise click.ClickException(f"file not found: {skeleton_file}")
    s = _read_skeleton(skeleton_file)
    cam = _resolve_camera(camera_file, seed, radius_range, azimuth_range, polar_range, size)
    image = render.rasterize_pose_image(project_keypoints(s, cam), s.bones)
    output.write_bytes(image.to_png_bytes())
    click.echo(f"wrote {output}")


@root.command()
@click.argument("mesh_file", type=click.Path(path_type=Path))
@_camera_options
@click.option("-o", "--output", type=click.Path(path_type=Path), required=True)
def depth(mesh_file: Path, camera_file: Path | None, seed: int | None,
          radius_range, azimuth_range, polar_range, size: int, output: Path) -> None:
    """Render a normalized depth map of an OBJ mesh (or skeleton JSON)."""
    if not mesh_file.exists():
        raise click.ClickException(f"file not found: {mesh_file}")
    if mesh_file.suffix.lower() == ".json":
        m = balloon.build_mesh(_read_skeleton(mesh_file))
    else:
        m = balloon.parse_obj(mesh_file.read_text(encoding="utf-8"))
    cam = _resolve_camera(camera_file, seed, radius_range, azimuth_range, polar_range, size)
    output.write_bytes(render.render_depth(m, cam).to_png_bytes())
    click.echo(f"wrote {output}")


@root.group()
def schedule() -> None:
    """Schedule inspection commands."""


@schedule.command()
@click.option("--steps", type=int, default=11, show_default=True,
              help="Number of sample points spanning the run.")
@click.option("--config", "config_file", type=click.Path(path_type=Path), default=None,
              help="ScheduleConfig overrides (TOML or JSON).")
@click.option("-o", "--output", type=click.Path(path_type=Path), default=None,
              help="Also write the curve as CSV.")
@click.option("--figure", type=click.Path(path_type=Path), default=None,
              help="Also render the curves with matplotlib.")
def preview(steps: int, config_file: Path | None, output: Path | None,
            figure: Path | None) -> None:
    """Print sampled schedule values; optionally write CSV and a figure."""
    cfg = ScheduleConfig.from_dict(_load_config_file(config_file) if config_file else {})
    rows = schedule_curve(cfg, steps)
    click.echo("step	t	control_scale	guidance_scale")
    for r in rows:
        click.echo(f"{r['step']}	{r['t']:.6f}	{r['control_scale']:.6f}	{r['guidance_scale']:.6f}")
    if output:
        output.write_text(schedule_csv(rows), encoding="utf-8")
        click.echo(f"wrote {output}", err=True)
    if figure:
        plot_schedule(rows, figure)
        click.echo(f"wrote {figure}", err=True)


@root.group()
def sds() -> None:
    """Score-distillation demo commands."""


@sds.command()
@click.option("--config", "config_file", type=click.Path(path_type=Path), default=None,
              help="Demo config (TOML or JSON): iters, step_size, seed, size, "
                   "lambda_rgb, plus ScheduleConfig fields under [schedule].")
@click.option("--outdir", type=click.Path(path_type=Path), default=Path("sds_demo"),
              show_default=True)
def demo(config_file: Path | None, outdir: Path) -> None:
    """Optimize a pixel grid toward a procedural target and report the run."""
    doc = _load_config_file(config_file) if config_file else {}
    cfg = ScheduleConfig.from_dict(doc.get("schedule", {}))
    iters = int(doc.get("iters", 2000))
    step_size = float(doc.get("step_size", 0.5))
    seed = int(doc.get("seed", 0))
    size = int(doc.get("size", 16))
    lambda_rgb = float(doc.get("lambda_rgb", 0.01))

    # Smooth two-lobe target in [0, 1]; any image works, this one is compact.
    ys, xs = np.mgrid[0:size, 0:size] / max(size - 1, 1)
    target = 0.5 + 0.5 * np.sin(2.0 * np.pi * xs) * np.cos(np.pi * ys)

    sched = NoiseSchedule.ddpm_linear()
    result = optimize_toy(
        TargetOracle(target, sched), cfg, iters=iters, step_size=step_size,
        seed=seed, shape=(size, size), lambda_rgb=lambda_rgb, sched=sched,
    )
    err = float(np.abs(result.asset.pixels - target).max())

    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "trace.csv").write_text(trace_csv(result.trace), encoding="utf-8")
    plot_trace(result.trace, outdir / "trace.png")
    _save_gray(target, outdir / "target.png")
    _save_gray(result.asset.pixels, outdir / "final.png")
    click.echo(f"iterations: {iters}")
    click.echo(f"final max abs error vs target: {err:.6f}")
    click.echo(f"wrote {outdir}/trace.csv, trace.png, target.png, final.png")


def _save_gray(grid: np.ndarray, path: Path) -> None:
    from PIL import Image

    arr = np.round(np.clip(grid, 0.0, 1.0) * 255.0).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(path)


@root.command(name="serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8420, show_default=True)
@click.option("--library", "library_path", default=None,
              help="Library directory; default LIBRARY_DIR or builtin.")
def serve_cmd(host: str, port: int, library_path: str | None) -> None:
    """Run the HTTP service."""
    overrides = {"host": host, "port": port}
    if library_path:
        overrides["library_path"] = library_path
    serve(ApiConfig.from_env(**overrides))


def cli(argv: list[str] | None = None) -> int:
    """Programmatic entry point returning the exit code."""
    try:
        root.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.ClickException as exc:
        exc.show()
        return 2
    except _DATA_ERRORS as exc:
        click.echo(f"error: {exc}", err=True)
        return 2


def main() -> None:
    sys.exit(cli(sys.argv[1:]))


if __name__ == "__main__":
    main()

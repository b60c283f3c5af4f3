"""Delimited output and figures for schedule curves and optimization traces."""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .guidance import ScheduleConfig, TraceRow, anneal_timestep, control_scale, guidance_scale

SCHEDULE_FIELDS = ("step", "t", "control_scale", "guidance_scale")
TRACE_FIELDS = ("iter", "t", "control_scale", "guidance_scale", "sds_norm", "rgb_loss")


def schedule_curve(cfg: ScheduleConfig, steps: int) -> list[dict]:
    """Evaluate all three schedules at ``steps`` points spanning the run.

    ``steps=2`` gives exactly the first and last training step.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if steps == 1:
        indices = [0]
    else:
        indices = [round(k * cfg.max_step / (steps - 1)) for k in range(steps)]
    return [
        {
            "step": i,
            "t": anneal_timestep(i, cfg),
            "control_scale": control_scale(i, cfg),
            "guidance_scale": guidance_scale(i, cfg),
        }
        for i in indices
    ]


def schedule_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SCHEDULE_FIELDS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def trace_csv(trace: Sequence[TraceRow]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=TRACE_FIELDS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(row.to_dict() for row in trace)
    return buf.getvalue()


def plot_schedule(rows: Sequence[dict], path: str | Path) -> Path:
    """Render the three schedule curves to an image file next to the CSV."""
    steps = [r["step"] for r in rows]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    (l_control,) = ax.plot(steps, [r["control_scale"] for r in rows], label="control scale")
    (l_t,) = ax.plot(steps, [r["t"] for r in rows], label="timestep t")
    ax.set_xlabel("training step")
    ax.set_ylabel("control scale / t")
    ax2 = ax.twinx()
    (l_guidance,) = ax2.plot(
        steps, [r["guidance_scale"] for r in rows], color="tab:green", label="guidance scale"
    )
    ax2.set_ylabel("guidance scale")
    lines = [l_control, l_t, l_guidance]
    ax.legend(lines, [ln.get_label() for ln in lines], loc="center right")
    ax.set_title("control / guidance / timestep schedules")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_trace(trace: Sequence[TraceRow], path: str | Path) -> Path:
    """Loss-trace figure: SDS gradient norm and RGB loss over iterations."""
    iters = [r.iteration for r in trace]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    ax1.plot(iters, [r.sds_norm for r in trace], color="tab:blue")
    ax1.set_ylabel("SDS gradient norm")
    ax1.set_yscale("log")
    ax2.plot(iters, [r.rgb_loss for r in trace], color="tab:orange")
    ax2.set_ylabel("RGB loss")
    ax2.set_xlabel("iteration")
    ax2.set_yscale("log")
    fig.suptitle("toy optimization trace")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path

"""Deterministic offline runs: walk script in, WAV + event log + report out."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

from .analytics import EngagementEvent, EngagementReport, accumulate_report, write_report
from .engine import Engine
from .geometry import Pose2D, wrap_angle
from .positioning import Odometry
from .render import write_wav
from .scene import Scene, WalkScript, load_scene, load_walk, pose_at


@dataclass(frozen=True)
class RunConfig:
    scene_path: str
    walk_path: str
    seed: int
    wav_path: str
    log_path: str
    report_path: Optional[str] = None
    duration: Optional[float] = None

    def __post_init__(self) -> None:
        if self.duration is not None and not self.duration > 0:
            raise ValueError(f"duration must be positive, got {self.duration}")


def derive_odometry(walk: WalkScript, t_prev: float, t_now: float) -> Odometry:
    """True motion increment between two script times (noise enters later,
    inside dead reckoning)."""
    if not t_now > t_prev:
        raise ValueError(f"need t_now > t_prev, got {t_prev} -> {t_now}")
    a = pose_at(walk, t_prev)
    b = pose_at(walk, t_now)
    return Odometry(
        dpos=(b.x - a.x, b.y - a.y),
        dheading=wrap_angle(b.heading - a.heading),
        dt=t_now - t_prev,
    )


def block_count(duration: float, params) -> int:
    return math.ceil(duration * params.sample_rate / params.block)


def run_engine(
    scene: Scene,
    seed: int,
    pose_fn: Callable[[float], Pose2D],
    n_blocks: int,
    start_pose: Optional[Pose2D] = None,
    record_trace: bool = False,
):
    """Drive an engine for n_blocks with pose_fn(t) as ground truth.

    Returns (engine, frames, events); events include the closing records.
    """
    if start_pose is None:
        start_pose = pose_fn(0.0)
    engine = Engine(scene, seed, start_pose=start_pose, record_trace=record_trace)
    frames = []
    events: list[EngagementEvent] = []
    for k in range(n_blocks):
        t = k * engine.block_dt
        block, evs = engine.step(pose_fn(t))
        frames.append(block.frames)
        events.extend(evs)
    events.extend(engine.final_events())
    return engine, frames, events


def trace_pose_fn(
    trace: Sequence[tuple[float, Pose2D]], start_pose: Pose2D
) -> Callable[[float], Pose2D]:
    """Step-function pose playback: at time t, the last trace pose with
    timestamp <= t holds (start_pose before the first)."""
    stamps = [p[0] for p in trace]
    if any(b < a for a, b in zip(stamps, stamps[1:])):
        raise ValueError("pose trace timestamps must be non-decreasing")

    def fn(t: float) -> Pose2D:
        pose = start_pose
        for stamp, p in trace:
            if stamp <= t:
                pose = p
            else:
                break
        return pose

    return fn


def run_simulation(cfg: RunConfig) -> EngagementReport:
    """Execute one full offline run and write its artifacts."""
    scene = load_scene(cfg.scene_path)
    walk = load_walk(cfg.walk_path)
    duration = cfg.duration if cfg.duration is not None else walk.duration
    if not duration > 0:
        raise ValueError(
            "run duration must be positive; give --duration or a walk "
            "whose last keyframe time is > 0"
        )
    n_blocks = block_count(duration, scene.params)
    engine, frames, events = run_engine(
        scene, cfg.seed, lambda t: pose_at(walk, t), n_blocks
    )
    write_wav(cfg.wav_path, frames, scene.params.sample_rate)
    with open(cfg.log_path, "w", encoding="utf-8") as fh:
        for e in events:
            fh.write(e.to_json() + "\n")
    report = accumulate_report(events)
    if cfg.report_path is not None:
        if cfg.report_path == "-":
            import sys

            write_report(report, sys.stdout)
        else:
            with open(cfg.report_path, "w", encoding="utf-8") as fh:
                write_report(report, fh)
    return report

"""Simulated landmark positioning: detection, inversion, fusion, drift, smoothing.

The camera never sees pixels here. simulate_detections plays the part of
the vision engine: geometric visibility gates plus seeded measurement
noise. Everything downstream (inversion, fusion, dead reckoning, the
handoff smoother) is the part this package actually asserts things
about.

All functions are pure over explicit state; stochastic ones take a
seeded generator owned by the caller. Draw order is fixed (anchors in
sorted id order, three standard normals per admitted detection, three
per dead-reckon step) so runs reproduce bit-for-bit across refactors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .geometry import Pose2D, los_blocked, wrap_angle
from .scene import Scene, SimParams

# Innovation thresholds for the handoff smoother: the latch engages on a
# large estimate jump and releases only once the rendered pose has
# nearly converged, so tau cannot oscillate at the boundary.
INNOV_POS_ENGAGE = 0.5
INNOV_HEADING_ENGAGE = math.radians(10.0)
INNOV_POS_RELEASE = 0.05
INNOV_HEADING_RELEASE = math.radians(1.0)


class TrackMode(Enum):
    TRACKED = "TRACKED"
    EXTENDED = "EXTENDED"
    LOST = "LOST"


@dataclass(frozen=True)
class Detection:
    """One simulated sighting of an anchor feature, camera-relative."""

    anchor_id: str
    r: float
    bearing: float
    psi: float
    t: float

    def __post_init__(self) -> None:
        if not self.r > 0:
            raise ValueError(f"detection range must be positive, got {self.r}")
        object.__setattr__(self, "bearing", wrap_angle(self.bearing))
        object.__setattr__(self, "psi", wrap_angle(self.psi))


@dataclass(frozen=True)
class Odometry:
    """Motion increment in the world frame over one step."""

    dpos: tuple[float, float]
    dheading: float
    dt: float

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ValueError(f"odometry dt must be positive, got {self.dt}")
        object.__setattr__(
            self, "dpos", (float(self.dpos[0]), float(self.dpos[1]))
        )


@dataclass(frozen=True)
class PoseEstimate:
    """Estimated listener pose with tracking mode and decaying confidence.

    extended_since records when the current no-detection stretch began;
    it is None while TRACKED and drives the EXTENDED -> LOST demotion.
    """

    pose: Pose2D
    confidence: float
    mode: TrackMode
    t: float
    extended_since: Optional[float] = None


def simulate_detections(
    true_pose: Pose2D,
    scene: Scene,
    params: SimParams,
    rng: np.random.Generator,
    t: float,
) -> list[Detection]:
    """Which anchors does the camera lock onto this tick, and how noisily.

    An anchor passes when it sits inside the field of view, within
    [r_min, max_range], faces the listener within facing_limit, and has
    clear line of sight; survivors are admitted by a Bernoulli draw at
    p_base * lighting * (1 - traffic). Admitted anchors yield range,
    bearing, and relative-orientation measurements with multiplicative
    range noise and additive angular noise.
    """
    p_admit = params.p_base * params.lighting * (1.0 - params.traffic)
    out: list[Detection] = []
    for anchor in sorted(scene.anchors, key=lambda a: a.id):
        dx = anchor.position[0] - true_pose.x
        dy = anchor.position[1] - true_pose.y
        r = math.hypot(dx, dy)
        if r < params.r_min or r > anchor.max_range:
            continue
        alpha = math.atan2(dy, dx)
        bearing = wrap_angle(alpha - true_pose.heading)
        if abs(bearing) > params.fov / 2:
            continue
        # The feature must face the listener: its outward normal has to
        # point back along the sight line within facing_limit.
        if abs(wrap_angle(anchor.facing - (alpha + math.pi))) > params.facing_limit:
            continue
        if los_blocked(true_pose.position, anchor.position, scene.occluders):
            continue
        if rng.random() >= p_admit:
            continue
        z = rng.normal(0.0, 1.0, size=3)
        psi = wrap_angle(anchor.facing - true_pose.heading)
        out.append(
            Detection(
                anchor_id=anchor.id,
                r=max(r * (1.0 + z[0] * params.sigma_range), 1e-9),
                bearing=wrap_angle(bearing + z[1] * params.sigma_bearing),
                psi=wrap_angle(psi + z[2] * params.sigma_psi),
                t=t,
            )
        )
    return out


def invert_detection(d: Detection, anchor) -> Pose2D:
    """Recover the camera pose implied by one detection of a known anchor."""
    if anchor.id != d.anchor_id:
        raise ValueError(
            f"detection of {d.anchor_id!r} inverted against anchor {anchor.id!r}"
        )
    h = wrap_angle(anchor.facing - d.psi)
    alpha = wrap_angle(h + d.bearing)
    return Pose2D(
        anchor.position[0] - d.r * math.cos(alpha),
        anchor.position[1] - d.r * math.sin(alpha),
        h,
    )


def fuse_detections(ds: Sequence[Detection], scene: Scene) -> PoseEstimate:
    """Blend several single-anchor pose fixes into one TRACKED estimate.

    Weights are 1/r^2: range noise is multiplicative, so distant anchors
    are proportionally fuzzier. Headings average on the circle.
    """
    if not ds:
        raise ValueError("fuse_detections needs at least one detection")
    anchors = {a.id: a for a in scene.anchors}
    wsum = 0.0
    x = y = 0.0
    sin_h = cos_h = 0.0
    for d in ds:
        if d.anchor_id not in anchors:
            raise ValueError(f"detection references unknown anchor {d.anchor_id!r}")
        pose = invert_detection(d, anchors[d.anchor_id])
        w = 1.0 / (d.r * d.r)
        wsum += w
        x += w * pose.x
        y += w * pose.y
        sin_h += w * math.sin(pose.heading)
        cos_h += w * math.cos(pose.heading)
    return PoseEstimate(
        pose=Pose2D(x / wsum, y / wsum, wrap_angle(math.atan2(sin_h, cos_h))),
        confidence=1.0 - math.exp(-wsum),
        mode=TrackMode.TRACKED,
        t=max(d.t for d in ds),
    )


def dead_reckon(
    prev: PoseEstimate,
    odo: Odometry,
    params: SimParams,
    rng: np.random.Generator,
) -> PoseEstimate:
    """Integrate odometry through one step of extended tracking.

    Position noise scales with step length, heading noise with sqrt(dt)
    (a random walk). Confidence decays by exp(-dt/t_lost); after t_lost
    of continuous extension the mode demotes to LOST but integration
    continues — stale-but-moving beats frozen.
    """
    z = rng.normal(0.0, 1.0, size=3)
    step = math.hypot(odo.dpos[0], odo.dpos[1])
    sigma_pos = params.drift_pos * step
    sigma_h = params.drift_heading * math.sqrt(odo.dt)
    pose = Pose2D(
        prev.pose.x + odo.dpos[0] + z[0] * sigma_pos,
        prev.pose.y + odo.dpos[1] + z[1] * sigma_pos,
        wrap_angle(prev.pose.heading + odo.dheading + z[2] * sigma_h),
    )
    t = prev.t + odo.dt
    since = prev.t if prev.extended_since is None else prev.extended_since
    mode = TrackMode.LOST if t - since > params.t_lost else TrackMode.EXTENDED
    return PoseEstimate(
        pose=pose,
        confidence=min(1.0, prev.confidence * math.exp(-odo.dt / params.t_lost)),
        mode=mode,
        t=t,
        extended_since=since,
    )


def smooth_pose(
    rendered: Pose2D,
    target: PoseEstimate,
    dt: float,
    params: SimParams,
    latched: bool,
) -> tuple[Pose2D, bool]:
    """Move the rendered pose toward the estimate without audible jumps.

    Exponential approach with two time constants: tau_track while the
    estimate agrees with what is rendered, tau_blend after a handoff
    jump. The blend latch engages above the large thresholds and
    releases below the small ones, so tau never chatters mid-handoff.
    Per-tick movement is clamped to the slew limits regardless.

    Returns the new rendered pose and the updated latch.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    ex = target.pose.x - rendered.x
    ey = target.pose.y - rendered.y
    epos = math.hypot(ex, ey)
    eh = wrap_angle(target.pose.heading - rendered.heading)
    if epos > INNOV_POS_ENGAGE or abs(eh) > INNOV_HEADING_ENGAGE:
        latched = True
    elif epos < INNOV_POS_RELEASE and abs(eh) < INNOV_HEADING_RELEASE:
        latched = False
    tau = params.tau_blend if latched else params.tau_track
    k = 1.0 - math.exp(-dt / tau)

    mx, my = k * ex, k * ey
    move = math.hypot(mx, my)
    max_move = params.slew_pos * dt
    if move > max_move:
        scale = max_move / move
        mx, my = mx * scale, my * scale
    mh = k * eh
    max_turn = params.slew_heading * dt
    if abs(mh) > max_turn:
        mh = math.copysign(max_turn, mh)
    return (
        Pose2D(rendered.x + mx, rendered.y + my, wrap_angle(rendered.heading + mh)),
        latched,
    )

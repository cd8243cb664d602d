"""Per-source control logic for the virtual soundscape.

Everything here is a pure function over small immutable states: distance
attenuation, listener-relative azimuth, the proximity-zone state machine,
band/sector content selection (the radio "tuning" behavior), occlusion
parameters, attractor scheduling, and sequence arming. One logical owner
(the engine) advances all zone states per control tick; nothing in this
module does IO or holds hidden state.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, replace
from enum import Enum
from typing import TYPE_CHECKING, Iterable, Mapping, Optional, Sequence, Union

from .analytics import (
    CLIP_END,
    CLIP_START,
    ZONE_ENTER,
    ZONE_EXIT,
    EngagementEvent,
)
from .geometry import Point, Pose2D, wrap_angle

if TYPE_CHECKING:
    from .scene import SimParams


class PlayMode(Enum):
    """What the playhead does across zone exits and clip ends."""

    LOOP = "LOOP"
    ONE_SHOT = "ONE_SHOT"
    RESUME = "RESUME"


class SourceTag(Enum):
    """THEMATIC tells the narrative; FUNCTIONAL supports navigation."""

    THEMATIC = "THEMATIC"
    FUNCTIONAL = "FUNCTIONAL"


class ZonePhase(Enum):
    IDLE = "IDLE"
    ACTIVE = "ACTIVE"
    COMPLETED = "COMPLETED"


class SelectorDimension(Enum):
    DISTANCE = "DISTANCE"
    ORBIT_ANGLE = "ORBIT_ANGLE"


# Default crossfade widths per selector dimension: 0.4 m, or 10 degrees.
DEFAULT_CROSSFADE_M = 0.4
DEFAULT_CROSSFADE_RAD = math.radians(10.0)


@dataclass(frozen=True)
class ClipRef:
    """A slice of an audio file; end=None means the whole file."""

    file: str
    start: float = 0.0
    end: Optional[float] = None

    def __post_init__(self) -> None:
        if self.start < 0:
            raise ValueError(f"clip start must be >= 0, got {self.start}")
        if self.end is not None and self.end <= self.start:
            raise ValueError(
                f"clip end ({self.end}) must exceed start ({self.start})"
            )


@dataclass(frozen=True)
class ContentSelector:
    """Maps a listener coordinate (distance or orbit angle) onto clip bands.

    boundaries holds the band edges, one more than clips. Within
    crossfade_width of an interior edge the two adjacent clips blend
    with equal-power weights; an optional interstitial clip (radio
    static) peaks mid-crossfade.
    """

    dimension: SelectorDimension
    boundaries: tuple[float, ...]
    clips: tuple[ClipRef, ...]
    crossfade_width: Optional[float] = None
    interstitial: Optional[ClipRef] = None
    interstitial_gain: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "boundaries", tuple(self.boundaries))
        object.__setattr__(self, "clips", tuple(self.clips))
        if len(self.clips) != len(self.boundaries) - 1:
            raise ValueError(
                f"{len(self.boundaries)} boundaries define "
                f"{len(self.boundaries) - 1} bands but {len(self.clips)} clips given"
            )
        if not self.clips:
            raise ValueError("selector needs at least one band")
        if any(b >= c for b, c in zip(self.boundaries, self.boundaries[1:])):
            raise ValueError("boundaries must be strictly increasing")
        if self.crossfade_width is None:
            default = (
                DEFAULT_CROSSFADE_M
                if self.dimension is SelectorDimension.DISTANCE
                else DEFAULT_CROSSFADE_RAD
            )
            object.__setattr__(self, "crossfade_width", default)
        if self.crossfade_width <= 0:
            raise ValueError("crossfade_width must be positive")
        narrowest = min(
            c - b for b, c in zip(self.boundaries, self.boundaries[1:])
        )
        if self.crossfade_width >= narrowest:
            raise ValueError(
                f"crossfade_width {self.crossfade_width} must be narrower than "
                f"the narrowest band ({narrowest})"
            )
        if self.interstitial_gain < 0:
            raise ValueError("interstitial_gain must be >= 0")


Content = Union[ClipRef, ContentSelector]


@dataclass(frozen=True)
class SoundSource:
    """A placed virtual source with trigger zone and playback behavior."""

    id: str
    position: Point
    mode: PlayMode
    content: Content
    tag: SourceTag
    d_ref: float = 1.0
    d_cull: float = 20.0
    gain: float = 1.0
    r_on: float = 2.0
    r_off: float = 3.0
    attractor_clip: Optional[ClipRef] = None
    priority: int = 0

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("source id must be non-empty")
        object.__setattr__(
            self, "position", (float(self.position[0]), float(self.position[1]))
        )
        if not (self.d_cull > self.d_ref > 0):
            raise ValueError(
                f"source {self.id!r}: need d_cull > d_ref > 0, "
                f"got d_ref={self.d_ref}, d_cull={self.d_cull}"
            )
        if not (self.r_off > self.r_on > 0):
            raise ValueError(
                f"source {self.id!r}: need r_off > r_on > 0, "
                f"got r_on={self.r_on}, r_off={self.r_off}"
            )
        if self.gain < 0:
            raise ValueError(f"source {self.id!r}: gain must be >= 0")


@dataclass(frozen=True)
class ZoneState:
    """Proximity-zone machine state for one source.

    entered_at doubles as the insideness flag (None = outside). last_t is
    the time of the previous update, used to advance the playhead.
    """

    phase: ZonePhase = ZonePhase.IDLE
    playhead: float = 0.0
    entered_at: Optional[float] = None
    last_t: Optional[float] = None

    @property
    def inside(self) -> bool:
        return self.entered_at is not None


def _clamp(x: float, lo: float, hi: float) -> float:
    return max(lo, min(hi, x))


def source_gain(d: float, src: SoundSource) -> float:
    """Distance attenuation: unity inside d_ref, inverse-distance rolloff,
    then a 1 m linear fade that reaches zero at d_cull."""
    if d < 0:
        raise ValueError(f"distance must be >= 0, got {d}")
    rolloff = min(1.0, src.d_ref / max(d, src.d_ref))
    fade = _clamp((src.d_cull - d) / 1.0, 0.0, 1.0)
    return src.gain * rolloff * fade


def source_azimuth(listener: Pose2D, src_pos: Point) -> float:
    """Angle of the source relative to the listener's nose.

    0 = dead ahead, positive = to the left (counterclockwise). A source
    exactly at the listener's position has no direction; return 0.
    """
    dx = src_pos[0] - listener.x
    dy = src_pos[1] - listener.y
    if dx == 0.0 and dy == 0.0:
        return 0.0
    return wrap_angle(math.atan2(dy, dx) - listener.heading)


def update_zone(
    state: ZoneState,
    d: float,
    src: SoundSource,
    t: float,
    clip_length: float,
) -> tuple[ZoneState, list[EngagementEvent]]:
    """Advance one source's zone machine to time t at listener distance d.

    The playhead advances first (by elapsed time while ACTIVE), then
    enter/exit transitions fire against the hysteresis band: enter at
    d <= r_on, exit at d >= r_off, nothing in between. Pass
    clip_length=inf for selector sources: they model always-on
    broadcasts and never self-complete.

    Returns the successor state and any events, in playback-then-zone
    order. Events alternate enter/exit per source by construction.
    """
    if state.last_t is not None and t < state.last_t:
        raise ValueError(f"time went backwards: {t} < {state.last_t}")

    events: list[EngagementEvent] = []
    phase = state.phase
    playhead = state.playhead
    entered_at = state.entered_at
    tag = src.tag.value

    if phase is ZonePhase.ACTIVE and state.last_t is not None:
        dt = t - state.last_t
        if dt > 0 and playhead < clip_length:
            playhead += dt
            if src.mode is PlayMode.LOOP:
                playhead %= clip_length
            elif playhead >= clip_length:
                # ONE_SHOT is done for good; RESUME just runs out of tape
                # and sits silent at the end until the curator's clip is
                # re-cut. Either way the clip finished playing.
                playhead = clip_length
                events.append(
                    EngagementEvent(
                        t, CLIP_END, src.id, tag, {"reason": "completed"}
                    )
                )
                if src.mode is PlayMode.ONE_SHOT:
                    phase = ZonePhase.COMPLETED

    if entered_at is None and d <= src.r_on:
        entered_at = t
        events.append(EngagementEvent(t, ZONE_ENTER, src.id, tag))
        if phase is ZonePhase.IDLE and playhead < clip_length:
            phase = ZonePhase.ACTIVE
            events.append(
                EngagementEvent(
                    t, CLIP_START, src.id, tag, {"playhead": playhead}
                )
            )
    elif entered_at is not None and d >= src.r_off:
        entered_at = None
        events.append(EngagementEvent(t, ZONE_EXIT, src.id, tag))
        if phase is ZonePhase.ACTIVE:
            events.append(
                EngagementEvent(t, CLIP_END, src.id, tag, {"reason": "stopped"})
            )
            phase = ZonePhase.IDLE
            if src.mode is not PlayMode.RESUME:
                playhead = 0.0

    return (
        replace(
            state, phase=phase, playhead=playhead, entered_at=entered_at, last_t=t
        ),
        events,
    )


def select_content(
    sel: ContentSelector, d: float, orbit: float
) -> list[tuple[ClipRef, float]]:
    """Pick the clip(s) audible at the given listener coordinate.

    Inside a band the band's clip plays at weight 1. Within
    crossfade_width of an interior boundary the two adjacent clips take
    equal-power weights (cos, sin of u*pi/2), and the interstitial clip,
    if any, is mixed in at 2*min(u, 1-u)*interstitial_gain. Outside all
    bands the nearest band wins outright. Zero-weight entries are
    dropped.
    """
    x = d if sel.dimension is SelectorDimension.DISTANCE else wrap_angle(orbit)
    bounds = sel.boundaries
    w = sel.crossfade_width

    for j in range(1, len(bounds) - 1):
        b = bounds[j]
        if b - w / 2 <= x <= b + w / 2:
            u = _clamp((x - (b - w / 2)) / w, 0.0, 1.0)
            out = [
                (sel.clips[j - 1], math.cos(u * math.pi / 2)),
                (sel.clips[j], math.sin(u * math.pi / 2)),
            ]
            if sel.interstitial is not None:
                out.append(
                    (sel.interstitial, 2 * min(u, 1 - u) * sel.interstitial_gain)
                )
            # cos(pi/2) is ~6e-17 in floats; treat the edges as exact
            return [(clip, weight) for clip, weight in out if weight > 1e-12]

    i = min(max(bisect_right(bounds, x) - 1, 0), len(sel.clips) - 1)
    return [(sel.clips[i], 1.0)]


def occlusion_params(blocked: bool) -> tuple[float, bool]:
    """Gain multiplier and lowpass flag for a source behind a wall.

    Blocked sources stay audible but muffled: half gain plus a lowpass.
    The renderer ramps the changes; this just states the targets.
    """
    return (0.5, True) if blocked else (1.0, False)


def choose_attractor(
    history: frozenset[str] | set[str],
    sources: Sequence[SoundSource],
    armed: frozenset[str] | set[str],
    listener: Pose2D,
    t: float,
    params: "SimParams",
    last_thematic_active_t: float,
    cooldown_until: Mapping[str, float],
) -> Optional[str]:
    """Pick a source whose attractor prompt should play now, if any.

    Fires only once no THEMATIC source has been active for t_idle
    seconds. Candidates must be armed, carry an attractor clip, not be
    in history (already visited or completed), sit within r_adv of the
    listener, and be off cooldown. Highest priority wins; ties go to the
    lexicographically smallest id.
    """
    if t - last_thematic_active_t < params.t_idle:
        return None
    best: Optional[SoundSource] = None
    for src in sources:
        if src.attractor_clip is None or src.id not in armed:
            continue
        if src.id in history:
            continue
        if t < cooldown_until.get(src.id, -math.inf):
            continue
        if listener.distance_to(src.position) > params.r_adv:
            continue
        if best is None or (-src.priority, src.id) < (-best.priority, best.id):
            best = src
    return None if best is None else best.id


def arm_sequences(
    sequences: Sequence[Sequence[str]],
    history: frozenset[str] | set[str],
    source_ids: Iterable[str],
) -> set[str]:
    """Compute which sources may currently make sound.

    Each sequence arms its completed prefix plus the first not-yet
    -completed entry; everything after stays disarmed (silent and
    non-attracting). Sources outside every sequence are always armed. A
    source in several sequences is armed if any of them arms it.
    """
    sequenced = {sid for seq in sequences for sid in seq}
    armed = {sid for sid in source_ids if sid not in sequenced}
    for seq in sequences:
        for sid in seq:
            armed.add(sid)
            if sid not in history:
                break
    return armed

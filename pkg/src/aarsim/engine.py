"""One control tick per audio block: positioning, audio logic, rendering.

The engine is the single code path behind both the offline simulator and
the live service: callers feed it one true pose per block (from a walk
script or from a client) and get back the rendered block plus any
engagement events. Everything stochastic flows through one seeded
generator; given the same scene, seed, and pose inputs, two runs are
bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .analytics import (
    ATTRACTOR_START,
    MODE_CHANGE,
    POSE,
    ZONE_ENTER,
    EngagementEvent,
)
from .audio_logic import (
    ClipRef,
    ContentSelector,
    PlayMode,
    SourceTag,
    ZonePhase,
    ZoneState,
    arm_sequences,
    choose_attractor,
    occlusion_params,
    select_content,
    source_azimuth,
    source_gain,
    update_zone,
)
from .geometry import Pose2D, los_blocked, wrap_angle
from .positioning import (
    Odometry,
    PoseEstimate,
    TrackMode,
    dead_reckon,
    fuse_detections,
    simulate_detections,
    smooth_pose,
)
from .render import AudioClip, BlockRenderer, RenderBlock, VoiceSpec, load_clip, pan_gains
from .scene import Scene

POSE_LOG_INTERVAL = 1.0


@dataclass(frozen=True)
class _Slice:
    """A clip reference resolved to loaded samples and sample bounds."""

    clip: AudioClip
    s0: int
    s1: int

    @property
    def seconds(self) -> float:
        return (self.s1 - self.s0) / self.clip.sample_rate


@dataclass
class TraceEntry:
    """Per-block record kept when tracing: what the listener heard where."""

    t: float
    rendered: Pose2D
    mode: str
    weights: dict[str, float] = field(default_factory=dict)


class Engine:
    """Owns one session's full state; advance with step(true_pose)."""

    def __init__(
        self,
        scene: Scene,
        seed: int,
        start_pose: Optional[Pose2D] = None,
        record_trace: bool = False,
    ) -> None:
        self.scene = scene
        self.seed = seed
        self.params = scene.params
        self.rng = np.random.default_rng(seed)
        self.block_dt = scene.params.block / scene.params.sample_rate
        self.block_index = 0
        self.record_trace = record_trace
        self.trace: list[TraceEntry] = []

        if start_pose is None:
            start_pose = scene.spawn if scene.spawn is not None else Pose2D(0.0, 0.0)
        self.rendered = start_pose
        self._prev_true = start_pose
        self.estimate = PoseEstimate(
            pose=start_pose,
            confidence=0.0,
            mode=TrackMode.EXTENDED,
            t=0.0,
            extended_since=0.0,
        )
        self.latched = False
        self._logged_mode: Optional[str] = None
        self._next_pose_log = 0.0

        self._clip_cache: dict[str, AudioClip] = {}
        self._content: dict[str, dict] = {}
        self._zone_len: dict[str, float] = {}
        self._rebuild_content(scene)

        self.zones: dict[str, ZoneState] = {s.id: ZoneState() for s in scene.sources}
        self.visited: set[str] = set()
        self.last_thematic_active_t = 0.0
        self.cooldown_until: dict[str, float] = {}
        self.attractor: Optional[tuple[str, float]] = None

        ambient_clip = None
        a_s0 = a_s1 = 0
        self.ambient_gain = 0.0
        if scene.ambient is not None:
            sl = self._slice(scene.ambient.clip)
            ambient_clip, a_s0, a_s1 = sl.clip, sl.s0, sl.s1
            self.ambient_gain = scene.ambient.gain
        self.renderer = BlockRenderer(
            sample_rate=scene.params.sample_rate,
            block=scene.params.block,
            ambient_clip=ambient_clip,
            ambient_start=a_s0,
            ambient_end=a_s1,
        )

    # -- content bookkeeping ------------------------------------------------

    def _load(self, file: str) -> AudioClip:
        path = str(self.scene.resolve_clip(file))
        if path not in self._clip_cache:
            self._clip_cache[path] = load_clip(path, self.params.sample_rate)
        return self._clip_cache[path]

    def _slice(self, ref: ClipRef) -> _Slice:
        clip = self._load(ref.file)
        s0 = round(ref.start * clip.sample_rate)
        s1 = (
            len(clip.samples)
            if ref.end is None
            else min(round(ref.end * clip.sample_rate), len(clip.samples))
        )
        if s1 <= s0:
            raise ValueError(f"clip {ref.file!r} slice is empty")
        return _Slice(clip=clip, s0=s0, s1=s1)

    def _rebuild_content(self, scene: Scene) -> None:
        self.scene = scene
        self.sources_sorted = sorted(scene.sources, key=lambda s: s.id)
        self._content.clear()
        self._zone_len.clear()
        for src in scene.sources:
            info: dict = {}
            if isinstance(src.content, ClipRef):
                info["main"] = self._slice(src.content)
                self._zone_len[src.id] = info["main"].seconds
            else:
                info["bands"] = [self._slice(c) for c in src.content.clips]
                if src.content.interstitial is not None:
                    info["inter"] = self._slice(src.content.interstitial)
                # A selector is an always-on broadcast; the zone machine
                # never sees it end.
                self._zone_len[src.id] = math.inf
            if src.attractor_clip is not None:
                info["attractor"] = self._slice(src.attractor_clip)
            self._content[src.id] = info

    def update_scene(self, scene: Scene) -> None:
        """Swap in an edited scene at a block boundary.

        Zone states persist for sources whose ids survive; new sources
        start IDLE. Parameter changes that would alter the DSP frame
        geometry are rejected.
        """
        if (
            scene.params.sample_rate != self.params.sample_rate
            or scene.params.block != self.params.block
        ):
            raise ValueError("cannot change sample_rate or block mid-session")
        self.params = scene.params
        self._rebuild_content(scene)
        self.zones = {
            s.id: self.zones.get(s.id, ZoneState()) for s in scene.sources
        }
        self.visited &= {s.id for s in scene.sources}
        if scene.ambient is not None:
            self.ambient_gain = scene.ambient.gain
        else:
            self.ambient_gain = 0.0

    # -- per-block control --------------------------------------------------

    @property
    def t(self) -> float:
        return self.block_index * self.block_dt

    def reset_pose(self, pose: Pose2D) -> None:
        """Re-seat the whole pose state in one move, skipping smoothing.

        Used for the initial listener placement in live sessions, where
        there is no prior position to smooth from. Consumes no RNG draws,
        so determinism is unaffected.
        """
        self.rendered = pose
        self._prev_true = pose
        self.estimate = replace(self.estimate, pose=pose)
        self.latched = False

    def _spatial(self, src) -> tuple[float, float, float, float, float]:
        """Distance, mono gain (attenuation x occlusion), pan-applied L/R
        gains, and the lowpass wet target, all from the rendered pose —
        the pose the listener actually hears."""
        d = self.rendered.distance_to(src.position)
        blocked = d > 0.0 and los_blocked(
            self.rendered.position, src.position, self.scene.occluders
        )
        g_occ, lowpass = occlusion_params(blocked)
        g = source_gain(d, src) * g_occ
        az = source_azimuth(self.rendered, src.position)
        pl, pr = pan_gains(az)
        wet = 1.0 if lowpass else 0.0
        return d, g, g * pl, g * pr, wet

    def step(self, true_pose: Pose2D) -> tuple[RenderBlock, list[EngagementEvent]]:
        """Advance one block: estimate pose, run audio logic, render audio."""
        t = self.t
        params = self.params
        events: list[EngagementEvent] = []

        detections = simulate_detections(true_pose, self.scene, params, self.rng, t)
        if detections:
            self.estimate = fuse_detections(detections, self.scene)
        else:
            odo = Odometry(
                dpos=(
                    true_pose.x - self._prev_true.x,
                    true_pose.y - self._prev_true.y,
                ),
                dheading=wrap_angle(true_pose.heading - self._prev_true.heading),
                dt=self.block_dt,
            )
            self.estimate = dead_reckon(self.estimate, odo, params, self.rng)
        self._prev_true = true_pose
        self.rendered, self.latched = smooth_pose(
            self.rendered, self.estimate, self.block_dt, params, self.latched
        )

        mode = self.estimate.mode.value
        if mode != self._logged_mode:
            self._logged_mode = mode
            events.append(EngagementEvent(t, MODE_CHANGE, payload={"mode": mode}))
        if t >= self._next_pose_log:
            events.append(self._pose_event(t))
            self._next_pose_log += POSE_LOG_INTERVAL

        completed = {
            sid for sid, z in self.zones.items() if z.phase is ZonePhase.COMPLETED
        }
        armed = arm_sequences(
            self.scene.sequences, completed, [s.id for s in self.scene.sources]
        )

        any_thematic = False
        for src in self.sources_sorted:
            if src.id not in armed:
                continue
            d = self.rendered.distance_to(src.position)
            z, evs = update_zone(
                self.zones[src.id], d, src, t, self._zone_len[src.id]
            )
            self.zones[src.id] = z
            events.extend(evs)
            for e in evs:
                if e.kind == ZONE_ENTER:
                    self.visited.add(src.id)
            if (
                src.tag is SourceTag.THEMATIC
                and z.phase is ZonePhase.ACTIVE
                and z.playhead < self._zone_len[src.id]
            ):
                any_thematic = True
        if any_thematic:
            self.last_thematic_active_t = t

        if self.attractor is not None and t >= self.attractor[1]:
            self.attractor = None
        if self.attractor is None:
            cand = choose_attractor(
                self.visited | completed,
                self.sources_sorted,
                armed,
                self.rendered,
                t,
                params,
                self.last_thematic_active_t,
                self.cooldown_until,
            )
            if cand is not None:
                src = self.scene.source_by_id(cand)
                length = self._content[cand]["attractor"].seconds
                self.attractor = (cand, t + length)
                self.cooldown_until[cand] = t + params.cooldown
                events.append(
                    EngagementEvent(t, ATTRACTOR_START, cand, src.tag.value)
                )

        voices, weights = self._build_voices(armed)
        block = self.renderer.render(voices, self.ambient_gain, t)
        self.block_index += 1

        if self.record_trace:
            self.trace.append(
                TraceEntry(t=t, rendered=self.rendered, mode=mode, weights=weights)
            )
        return block, events

    def _build_voices(
        self, armed: set[str]
    ) -> tuple[list[VoiceSpec], dict[str, float]]:
        voices: list[VoiceSpec] = []
        weights: dict[str, float] = {}
        rate = self.params.sample_rate
        for src in self.sources_sorted:
            info = self._content[src.id]
            z = self.zones[src.id]
            if src.id in armed and z.phase is ZonePhase.ACTIVE:
                d, _, gl, gr, wet = self._spatial(src)
                if isinstance(src.content, ClipRef):
                    sl: _Slice = info["main"]
                    length = sl.s1 - sl.s0
                    loop = src.mode is PlayMode.LOOP
                    pos = round(z.playhead * rate)
                    pos = pos % length if loop else min(pos, length)
                    if loop or pos < length:
                        voices.append(
                            VoiceSpec(
                                key=f"{src.id}#clip",
                                clip=sl.clip,
                                start_sample=sl.s0,
                                end_sample=sl.s1,
                                loop=loop,
                                gain_l=gl,
                                gain_r=gr,
                                wet=wet,
                                resume_at=pos,
                            )
                        )
                else:
                    sel: ContentSelector = src.content
                    orbit = math.atan2(
                        self.rendered.y - src.position[1],
                        self.rendered.x - src.position[0],
                    )
                    picked = select_content(sel, d, orbit)
                    merged: dict[str, tuple[_Slice, float]] = {}
                    for clip_ref, w in picked:
                        if (
                            sel.interstitial is not None
                            and clip_ref == sel.interstitial
                        ):
                            key, sl = f"{src.id}#inter", info["inter"]
                        else:
                            band = sel.clips.index(clip_ref)
                            key, sl = f"{src.id}#band{band}", info["bands"][band]
                        prev = merged.get(key)
                        merged[key] = (sl, w + (prev[1] if prev else 0.0))
                    for key, (sl, w) in merged.items():
                        length = sl.s1 - sl.s0
                        voices.append(
                            VoiceSpec(
                                key=key,
                                clip=sl.clip,
                                start_sample=sl.s0,
                                end_sample=sl.s1,
                                loop=True,
                                gain_l=gl * w,
                                gain_r=gr * w,
                                wet=wet,
                                resume_at=round(z.playhead * rate) % length,
                            )
                        )
                        weights[key] = w
            if self.attractor is not None and self.attractor[0] == src.id:
                _, _, gl, gr, wet = self._spatial(src)
                sl = info["attractor"]
                voices.append(
                    VoiceSpec(
                        key=f"{src.id}#attr",
                        clip=sl.clip,
                        start_sample=sl.s0,
                        end_sample=sl.s1,
                        loop=False,
                        gain_l=gl,
                        gain_r=gr,
                        wet=wet,
                        resume_at=0,
                    )
                )
        return voices, weights

    def _pose_event(self, t: float, extra: Optional[dict] = None) -> EngagementEvent:
        payload = {
            "x": self.rendered.x,
            "y": self.rendered.y,
            "h": self.rendered.heading,
            "confidence": self.estimate.confidence,
        }
        if extra:
            payload.update(extra)
        return EngagementEvent(t, POSE, payload=payload)

    def final_events(self) -> list[EngagementEvent]:
        """Closing log records: a last pose stamped with the clip counter."""
        return [self._pose_event(self.t, {"clip_count": self.renderer.clip_count})]

    def snapshot(self) -> dict:
        """Control-rate view of the session for the live protocol."""
        completed = {
            sid for sid, z in self.zones.items() if z.phase is ZonePhase.COMPLETED
        }
        armed = arm_sequences(
            self.scene.sequences, completed, [s.id for s in self.scene.sources]
        )
        sources = {}
        for src in self.sources_sorted:
            z = self.zones[src.id]
            d, g, _, _, wet = self._spatial(src)
            sources[src.id] = {
                "phase": z.phase.value,
                "inside": z.inside,
                "armed": src.id in armed,
                "distance": d,
                "azimuth": source_azimuth(self.rendered, src.position),
                "gain": g,
                "occluded": wet > 0.0,
                "playhead": z.playhead,
            }
        return {
            "t": self.t,
            "pose": {
                "x": self.rendered.x,
                "y": self.rendered.y,
                "h": self.rendered.heading,
            },
            "mode": self.estimate.mode.value,
            "confidence": self.estimate.confidence,
            "ambient_gain": self.ambient_gain,
            "attractor": None if self.attractor is None else self.attractor[0],
            "sources": sources,
            "clip_count": self.renderer.clip_count,
        }

"""Scene and walk documents: types, validation, loading, serialization.

The file schema stores angles in degrees; everything in memory is
radians. All clip paths are relative to the scene file's directory and
must exist (and match the engine sample rate) at load time.
"""

from __future__ import annotations

import json
import math
import wave
from bisect import bisect_right
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Iterator, Optional

from .audio_logic import (
    ClipRef,
    ContentSelector,
    PlayMode,
    SelectorDimension,
    SoundSource,
    SourceTag,
)
from .geometry import Occluder, Point, Pose2D, wrap_angle


@dataclass(frozen=True)
class SimParams:
    """Tunable constants for detection, tracking, audio policy, and DSP.

    Angle-valued fields are radians here and degrees in scene files.
    """

    fov: float = math.radians(60.0)
    r_min: float = 0.3
    r_max: float = 8.0
    facing_limit: float = math.radians(75.0)
    p_base: float = 0.95
    lighting: float = 1.0
    traffic: float = 0.0
    sigma_range: float = 0.03
    sigma_bearing: float = math.radians(1.0)
    sigma_psi: float = math.radians(2.0)
    drift_pos: float = 0.05
    drift_heading: float = math.radians(0.5)
    tau_track: float = 0.1
    tau_blend: float = 0.7
    slew_pos: float = 2.5
    slew_heading: float = math.pi
    t_lost: float = 10.0
    t_idle: float = 20.0
    r_adv: float = 15.0
    cooldown: float = 60.0
    sample_rate: int = 48000
    block: int = 1024

    def __post_init__(self) -> None:
        positive = (
            "fov", "r_min", "r_max", "facing_limit", "tau_track", "tau_blend",
            "slew_pos", "slew_heading", "t_lost", "t_idle", "r_adv",
            "cooldown", "sample_rate", "block",
        )
        for name in positive:
            if not getattr(self, name) > 0:
                raise ValueError(f"params.{name} must be positive")
        for name in ("p_base", "lighting", "traffic"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"params.{name} must be in [0, 1]")
        for name in (
            "sigma_range", "sigma_bearing", "sigma_psi",
            "drift_pos", "drift_heading",
        ):
            if getattr(self, name) < 0:
                raise ValueError(f"params.{name} must be >= 0")
        if self.r_max <= self.r_min:
            raise ValueError("params.r_max must exceed params.r_min")
        for name in ("sample_rate", "block"):
            if not isinstance(getattr(self, name), int):
                raise ValueError(f"params.{name} must be an integer")


# Params whose file representation is degrees.
_DEGREE_PARAMS = frozenset(
    {"fov", "facing_limit", "sigma_bearing", "sigma_psi",
     "drift_heading", "slew_heading"}
)
_INT_PARAMS = frozenset({"sample_rate", "block"})
_PARAM_NAMES = tuple(f.name for f in fields(SimParams))


@dataclass(frozen=True)
class AnchorFeature:
    """A static physical feature with a known pose that tracking can lock onto."""

    id: str
    position: Point
    facing: float
    max_range: float = 8.0

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("anchor id must be non-empty")
        object.__setattr__(
            self, "position", (float(self.position[0]), float(self.position[1]))
        )
        if not self.max_range > 0:
            raise ValueError(f"anchor {self.id!r}: max_range must be positive")


@dataclass(frozen=True)
class AmbientBed:
    """Looping unspatialized background track standing in for the real room."""

    clip: ClipRef
    gain: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.gain <= 2.0:
            raise ValueError(f"ambient gain must be in [0, 2], got {self.gain}")


@dataclass(frozen=True)
class Scene:
    """A validated world model. Immutable after load; edits build new Scenes."""

    name: str = ""
    description: str = ""
    spawn: Optional[Pose2D] = None
    anchors: tuple[AnchorFeature, ...] = ()
    occluders: tuple[Occluder, ...] = ()
    sources: tuple[SoundSource, ...] = ()
    ambient: Optional[AmbientBed] = None
    sequences: tuple[tuple[str, ...], ...] = ()
    params: SimParams = field(default_factory=SimParams)
    base_dir: Path = field(default_factory=Path.cwd, compare=False)

    def resolve_clip(self, file: str) -> Path:
        return (self.base_dir / file).resolve()

    def source_by_id(self, sid: str) -> SoundSource:
        for src in self.sources:
            if src.id == sid:
                return src
        raise KeyError(sid)

    def iter_clips(self) -> Iterator[tuple[ClipRef, str]]:
        """Yield every clip the scene references with its document path."""
        for i, src in enumerate(self.sources):
            base = f"sources[{i}]"
            if isinstance(src.content, ClipRef):
                yield src.content, f"{base}.content.clip"
            else:
                for j, clip in enumerate(src.content.clips):
                    yield clip, f"{base}.content.selector.clips[{j}]"
                if src.content.interstitial is not None:
                    yield src.content.interstitial, f"{base}.content.selector.interstitial"
            if src.attractor_clip is not None:
                yield src.attractor_clip, f"{base}.attractor"
        if self.ambient is not None:
            yield self.ambient.clip, "ambient.clip"


@dataclass(frozen=True)
class Keyframe:
    t: float
    x: float
    y: float
    h: float


@dataclass(frozen=True)
class WalkScript:
    """Scripted listener trajectory: piecewise-linear pose keyframes."""

    keyframes: tuple[Keyframe, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "keyframes", tuple(self.keyframes))
        if not self.keyframes:
            raise ValueError("walk needs at least one keyframe")
        ts = [k.t for k in self.keyframes]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("keyframe times must be strictly increasing")
        if ts[0] < 0:
            raise ValueError("keyframe times must be >= 0")

    @property
    def duration(self) -> float:
        return self.keyframes[-1].t


def pose_at(walk: WalkScript, t: float) -> Pose2D:
    """Interpolate the scripted pose at time t.

    Position is linear between bracketing keyframes; heading follows the
    shortest arc (exact half-turn ties resolve in the positive
    direction). Outside the keyframe range the nearest endpoint holds.
    """
    kfs = walk.keyframes
    if t <= kfs[0].t:
        k = kfs[0]
        return Pose2D(k.x, k.y, wrap_angle(k.h))
    if t >= kfs[-1].t:
        k = kfs[-1]
        return Pose2D(k.x, k.y, wrap_angle(k.h))
    times = [k.t for k in kfs]
    i = bisect_right(times, t) - 1
    a, b = kfs[i], kfs[i + 1]
    f = (t - a.t) / (b.t - a.t)
    dh = wrap_angle(b.h - a.h)
    return Pose2D(
        a.x + f * (b.x - a.x),
        a.y + f * (b.y - a.y),
        wrap_angle(a.h + f * dh),
    )


# ---------------------------------------------------------------------------
# parsing helpers


def _err(ctx: str, msg: str) -> ValueError:
    return ValueError(f"{ctx}: {msg}")


def _require_keys(d: dict, allowed: set[str], required: set[str], ctx: str) -> None:
    if not isinstance(d, dict):
        raise _err(ctx, f"expected an object, got {type(d).__name__}")
    unknown = set(d) - allowed
    if unknown:
        raise _err(ctx, f"unknown key(s) {sorted(unknown)}")
    missing = required - set(d)
    if missing:
        raise _err(ctx, f"missing required key(s) {sorted(missing)}")


def _num(v: Any, ctx: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise _err(ctx, f"expected a number, got {type(v).__name__}")
    f = float(v)
    if not math.isfinite(f):
        raise _err(ctx, "must be finite")
    return f


def _str(v: Any, ctx: str) -> str:
    if not isinstance(v, str):
        raise _err(ctx, f"expected a string, got {type(v).__name__}")
    return v


def _point(v: Any, ctx: str) -> Point:
    if not isinstance(v, (list, tuple)) or len(v) != 2:
        raise _err(ctx, "expected [x, y]")
    return (_num(v[0], f"{ctx}[0]"), _num(v[1], f"{ctx}[1]"))


def _heading_deg(v: Any, ctx: str) -> float:
    """Degrees from a file into radians; range-checked so that converting
    back to degrees is exact (see _degrees_preimage)."""
    d = _num(v, ctx)
    if not -180.0 < d <= 180.0:
        raise _err(ctx, f"angle must be in (-180, 180] degrees, got {d}")
    return math.radians(d)


def _degrees_preimage(rad: float) -> float:
    """Degrees value that converts back to exactly this radians value.

    degrees() and radians() do not invert each other bitwise (rounding),
    so the nominal degrees value is nudged by up to 3 ulp until
    radians(d) == rad. Every angle loaded from a file has such a
    preimage because it entered memory through radians(). A short round
    decimal is preferred when it maps to the same radians value.
    """
    d = math.degrees(rad)
    for digits in range(10):
        nice = round(d, digits)
        if math.radians(nice) == rad:
            return nice
    if math.radians(d) == rad:
        return d
    up = down = d
    for _ in range(3):
        up = math.nextafter(up, math.inf)
        if math.radians(up) == rad:
            return up
        down = math.nextafter(down, -math.inf)
        if math.radians(down) == rad:
            return down
    raise ValueError(f"no exact degree representation for {rad!r} rad")


def _parse_clip(d: Any, ctx: str) -> ClipRef:
    _require_keys(d, {"file", "start", "end"}, {"file"}, ctx)
    file = _str(d["file"], f"{ctx}.file")
    if not file:
        raise _err(f"{ctx}.file", "must be non-empty")
    start = _num(d["start"], f"{ctx}.start") if "start" in d else 0.0
    end = _num(d["end"], f"{ctx}.end") if "end" in d and d["end"] is not None else None
    try:
        return ClipRef(file=file, start=start, end=end)
    except ValueError as exc:
        raise _err(ctx, str(exc)) from exc


def _clip_dict(clip: ClipRef) -> dict:
    out: dict = {"file": clip.file}
    if clip.start != 0.0:
        out["start"] = clip.start
    if clip.end is not None:
        out["end"] = clip.end
    return out


def _parse_selector(d: Any, ctx: str) -> ContentSelector:
    _require_keys(
        d,
        {"dimension", "boundaries", "clips", "crossfade_width", "interstitial"},
        {"dimension", "boundaries", "clips"},
        ctx,
    )
    dim_s = _str(d["dimension"], f"{ctx}.dimension")
    try:
        dim = SelectorDimension(dim_s)
    except ValueError:
        valid = [m.value for m in SelectorDimension]
        raise _err(f"{ctx}.dimension", f"must be one of {valid}, got {dim_s!r}")
    angular = dim is SelectorDimension.ORBIT_ANGLE

    def conv(x: float) -> float:
        return math.radians(x) if angular else x

    bounds_raw = d["boundaries"]
    if not isinstance(bounds_raw, list):
        raise _err(f"{ctx}.boundaries", "expected a list")
    boundaries = []
    for i, b in enumerate(bounds_raw):
        v = _num(b, f"{ctx}.boundaries[{i}]")
        if angular and not -180.0 <= v <= 180.0:
            raise _err(f"{ctx}.boundaries[{i}]", "angle must be in [-180, 180] degrees")
        boundaries.append(conv(v))
    clips_raw = d["clips"]
    if not isinstance(clips_raw, list):
        raise _err(f"{ctx}.clips", "expected a list")
    clips = [_parse_clip(c, f"{ctx}.clips[{i}]") for i, c in enumerate(clips_raw)]
    width = None
    if "crossfade_width" in d:
        width = conv(_num(d["crossfade_width"], f"{ctx}.crossfade_width"))
    interstitial = None
    inter_gain = 1.0
    if "interstitial" in d and d["interstitial"] is not None:
        ictx = f"{ctx}.interstitial"
        _require_keys(d["interstitial"], {"clip", "gain"}, {"clip"}, ictx)
        interstitial = _parse_clip(d["interstitial"]["clip"], f"{ictx}.clip")
        if "gain" in d["interstitial"]:
            inter_gain = _num(d["interstitial"]["gain"], f"{ictx}.gain")
    try:
        return ContentSelector(
            dimension=dim,
            boundaries=tuple(boundaries),
            clips=tuple(clips),
            crossfade_width=width,
            interstitial=interstitial,
            interstitial_gain=inter_gain,
        )
    except ValueError as exc:
        raise _err(ctx, str(exc)) from exc


def _selector_dict(sel: ContentSelector) -> dict:
    angular = sel.dimension is SelectorDimension.ORBIT_ANGLE

    def conv(x: float) -> float:
        return _degrees_preimage(x) if angular else x

    out: dict = {
        "dimension": sel.dimension.value,
        "boundaries": [conv(b) for b in sel.boundaries],
        "clips": [_clip_dict(c) for c in sel.clips],
        "crossfade_width": conv(sel.crossfade_width),
    }
    if sel.interstitial is not None:
        out["interstitial"] = {
            "clip": _clip_dict(sel.interstitial),
            "gain": sel.interstitial_gain,
        }
    return out


def _parse_source(d: Any, ctx: str) -> SoundSource:
    allowed = {
        "id", "pos", "d_ref", "d_cull", "gain", "r_on", "r_off",
        "mode", "content", "attractor", "priority", "tag",
    }
    _require_keys(d, allowed, {"id", "pos", "mode", "content", "tag"}, ctx)
    sid = _str(d["id"], f"{ctx}.id")
    mode_s = _str(d["mode"], f"{ctx}.mode")
    try:
        mode = PlayMode(mode_s)
    except ValueError:
        valid = [m.value for m in PlayMode]
        raise _err(f"{ctx}.mode", f"must be one of {valid}, got {mode_s!r}")
    tag_s = _str(d["tag"], f"{ctx}.tag")
    try:
        tag = SourceTag(tag_s)
    except ValueError:
        valid = [m.value for m in SourceTag]
        raise _err(f"{ctx}.tag", f"must be one of {valid}, got {tag_s!r}")
    cdict = d["content"]
    _require_keys(cdict, {"clip", "selector"}, set(), f"{ctx}.content")
    if ("clip" in cdict) == ("selector" in cdict):
        raise _err(f"{ctx}.content", "needs exactly one of 'clip' or 'selector'")
    content: Any
    if "clip" in cdict:
        content = _parse_clip(cdict["clip"], f"{ctx}.content.clip")
    else:
        content = _parse_selector(cdict["selector"], f"{ctx}.content.selector")
    attractor = None
    if "attractor" in d and d["attractor"] is not None:
        attractor = _parse_clip(d["attractor"], f"{ctx}.attractor")
    priority = 0
    if "priority" in d:
        p = d["priority"]
        if isinstance(p, bool) or not isinstance(p, int):
            raise _err(f"{ctx}.priority", "expected an integer")
        priority = p
    kwargs = {}
    for key in ("d_ref", "d_cull", "gain", "r_on", "r_off"):
        if key in d:
            kwargs[key] = _num(d[key], f"{ctx}.{key}")
    try:
        return SoundSource(
            id=sid,
            position=_point(d["pos"], f"{ctx}.pos"),
            mode=mode,
            content=content,
            tag=tag,
            attractor_clip=attractor,
            priority=priority,
            **kwargs,
        )
    except ValueError as exc:
        raise _err(ctx, str(exc)) from exc


def _source_dict(src: SoundSource) -> dict:
    content: dict
    if isinstance(src.content, ClipRef):
        content = {"clip": _clip_dict(src.content)}
    else:
        content = {"selector": _selector_dict(src.content)}
    out: dict = {
        "id": src.id,
        "pos": [src.position[0], src.position[1]],
        "d_ref": src.d_ref,
        "d_cull": src.d_cull,
        "gain": src.gain,
        "r_on": src.r_on,
        "r_off": src.r_off,
        "mode": src.mode.value,
        "content": content,
        "priority": src.priority,
        "tag": src.tag.value,
    }
    if src.attractor_clip is not None:
        out["attractor"] = _clip_dict(src.attractor_clip)
    return out


def _parse_params(d: Any, ctx: str) -> SimParams:
    if not isinstance(d, dict):
        raise _err(ctx, "expected an object")
    unknown = set(d) - set(_PARAM_NAMES)
    if unknown:
        raise _err(ctx, f"unknown param(s) {sorted(unknown)}")
    kwargs: dict[str, Any] = {}
    for name, v in d.items():
        pctx = f"{ctx}.{name}"
        if name in _INT_PARAMS:
            if isinstance(v, bool) or not isinstance(v, int):
                raise _err(pctx, "expected an integer")
            kwargs[name] = v
        elif name in _DEGREE_PARAMS:
            kwargs[name] = math.radians(_num(v, pctx))
        else:
            kwargs[name] = _num(v, pctx)
    try:
        return SimParams(**kwargs)
    except ValueError as exc:
        raise _err(ctx, str(exc)) from exc


def _params_dict(p: SimParams) -> dict:
    out = {}
    for name in _PARAM_NAMES:
        v = getattr(p, name)
        out[name] = _degrees_preimage(v) if name in _DEGREE_PARAMS else v
    return out


def _check_clip_file(scene: Scene, clip: ClipRef, ctx: str) -> None:
    path = scene.resolve_clip(clip.file)
    if not path.is_file():
        raise _err(ctx, f"clip file not found: {path}")
    try:
        with wave.open(str(path), "rb") as wf:
            rate = wf.getframerate()
            width = wf.getsampwidth()
            channels = wf.getnchannels()
            nframes = wf.getnframes()
    except (wave.Error, EOFError) as exc:
        raise _err(ctx, f"unreadable WAV {path}: {exc}") from exc
    if rate != scene.params.sample_rate:
        raise _err(
            ctx,
            f"{path} is {rate} Hz but the engine runs at "
            f"{scene.params.sample_rate} Hz; resample the clip offline",
        )
    if width not in (2, 3):
        raise _err(ctx, f"{path}: only 16/24-bit PCM supported, got {8 * width}-bit")
    if channels not in (1, 2):
        raise _err(ctx, f"{path}: only mono or stereo supported, got {channels} channels")
    if nframes == 0:
        raise _err(ctx, f"{path} holds no audio")
    duration = nframes / rate
    if clip.start >= duration:
        raise _err(ctx, f"clip start {clip.start} past end of {path} ({duration:.3f} s)")
    if clip.end is not None and clip.end > duration + 1e-9:
        raise _err(ctx, f"clip end {clip.end} past end of {path} ({duration:.3f} s)")


def scene_from_dict(doc: Any, base_dir: Path, check_clips: bool = True) -> Scene:
    """Build and validate a Scene from a parsed scene document."""
    top = {"meta", "params", "anchors", "occluders", "sources", "ambient", "sequences"}
    _require_keys(doc, top, set(), "scene")

    name = ""
    description = ""
    spawn = None
    if "meta" in doc:
        _require_keys(doc["meta"], {"name", "description", "spawn"}, set(), "meta")
        if "name" in doc["meta"]:
            name = _str(doc["meta"]["name"], "meta.name")
        if "description" in doc["meta"]:
            description = _str(doc["meta"]["description"], "meta.description")
        if "spawn" in doc["meta"] and doc["meta"]["spawn"] is not None:
            sd = doc["meta"]["spawn"]
            _require_keys(sd, {"x", "y", "h"}, {"x", "y"}, "meta.spawn")
            spawn = Pose2D(
                _num(sd["x"], "meta.spawn.x"),
                _num(sd["y"], "meta.spawn.y"),
                _heading_deg(sd["h"], "meta.spawn.h") if "h" in sd else 0.0,
            )

    params = _parse_params(doc.get("params", {}), "params")

    anchors = []
    seen_anchor_ids: set[str] = set()
    for i, ad in enumerate(doc.get("anchors", [])):
        ctx = f"anchors[{i}]"
        _require_keys(ad, {"id", "pos", "facing", "max_range"}, {"id", "pos", "facing"}, ctx)
        aid = _str(ad["id"], f"{ctx}.id")
        if aid in seen_anchor_ids:
            raise _err(ctx, f"duplicate anchor id {aid!r}")
        seen_anchor_ids.add(aid)
        max_range = params.r_max
        if "max_range" in ad:
            max_range = _num(ad["max_range"], f"{ctx}.max_range")
        try:
            anchors.append(
                AnchorFeature(
                    id=aid,
                    position=_point(ad["pos"], f"{ctx}.pos"),
                    facing=_heading_deg(ad["facing"], f"{ctx}.facing"),
                    max_range=max_range,
                )
            )
        except ValueError as exc:
            raise _err(ctx, str(exc)) from exc

    occluders = []
    for i, od in enumerate(doc.get("occluders", [])):
        ctx = f"occluders[{i}]"
        _require_keys(od, {"a", "b"}, {"a", "b"}, ctx)
        try:
            occluders.append(
                Occluder(_point(od["a"], f"{ctx}.a"), _point(od["b"], f"{ctx}.b"))
            )
        except ValueError as exc:
            raise _err(ctx, str(exc)) from exc

    sources = []
    seen_source_ids: set[str] = set()
    for i, sd in enumerate(doc.get("sources", [])):
        src = _parse_source(sd, f"sources[{i}]")
        if src.id in seen_source_ids:
            raise _err(f"sources[{i}]", f"duplicate source id {src.id!r}")
        seen_source_ids.add(src.id)
        sources.append(src)

    ambient = None
    if "ambient" in doc and doc["ambient"] is not None:
        _require_keys(doc["ambient"], {"clip", "gain"}, {"clip"}, "ambient")
        clip = _parse_clip(doc["ambient"]["clip"], "ambient.clip")
        gain = 1.0
        if "gain" in doc["ambient"]:
            gain = _num(doc["ambient"]["gain"], "ambient.gain")
        try:
            ambient = AmbientBed(clip=clip, gain=gain)
        except ValueError as exc:
            raise _err("ambient", str(exc)) from exc

    sequences = []
    for i, seq in enumerate(doc.get("sequences", [])):
        ctx = f"sequences[{i}]"
        if not isinstance(seq, list) or not seq:
            raise _err(ctx, "expected a non-empty list of source ids")
        ids = [_str(s, f"{ctx}[{j}]") for j, s in enumerate(seq)]
        for j, sid in enumerate(ids):
            if sid not in seen_source_ids:
                raise _err(f"{ctx}[{j}]", f"unknown source id {sid!r}")
        if len(set(ids)) != len(ids):
            raise _err(ctx, "a source may appear only once per sequence")
        sequences.append(tuple(ids))

    scene = Scene(
        name=name,
        description=description,
        spawn=spawn,
        anchors=tuple(anchors),
        occluders=tuple(occluders),
        sources=tuple(sources),
        ambient=ambient,
        sequences=tuple(sequences),
        params=params,
        base_dir=base_dir,
    )
    if check_clips:
        for clip, ctx in scene.iter_clips():
            _check_clip_file(scene, clip, ctx)
    return scene


def scene_to_dict(scene: Scene) -> dict:
    """Scene back to its document form (angles to degrees, exactly invertible)."""
    meta: dict = {"name": scene.name}
    if scene.description:
        meta["description"] = scene.description
    if scene.spawn is not None:
        meta["spawn"] = {
            "x": scene.spawn.x,
            "y": scene.spawn.y,
            "h": _degrees_preimage(scene.spawn.heading),
        }
    doc: dict = {
        "meta": meta,
        "params": _params_dict(scene.params),
        "anchors": [
            {
                "id": a.id,
                "pos": [a.position[0], a.position[1]],
                "facing": _degrees_preimage(a.facing),
                "max_range": a.max_range,
            }
            for a in scene.anchors
        ],
        "occluders": [
            {"a": [o.a[0], o.a[1]], "b": [o.b[0], o.b[1]]} for o in scene.occluders
        ],
        "sources": [_source_dict(s) for s in scene.sources],
    }
    if scene.ambient is not None:
        doc["ambient"] = {
            "clip": _clip_dict(scene.ambient.clip),
            "gain": scene.ambient.gain,
        }
    if scene.sequences:
        doc["sequences"] = [list(seq) for seq in scene.sequences]
    return doc


def serialize_scene(scene: Scene) -> str:
    return json.dumps(scene_to_dict(scene), indent=2) + "\n"


def load_scene(path: str | Path, check_clips: bool = True) -> Scene:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read scene file {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: malformed JSON: {exc}") from exc
    try:
        return scene_from_dict(doc, base_dir=path.parent, check_clips=check_clips)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc


def walk_from_dict(doc: Any) -> WalkScript:
    _require_keys(doc, {"keyframes"}, {"keyframes"}, "walk")
    if not isinstance(doc["keyframes"], list):
        raise _err("walk.keyframes", "expected a list")
    kfs = []
    for i, kd in enumerate(doc["keyframes"]):
        ctx = f"keyframes[{i}]"
        _require_keys(kd, {"t", "x", "y", "h"}, {"t", "x", "y", "h"}, ctx)
        kfs.append(
            Keyframe(
                t=_num(kd["t"], f"{ctx}.t"),
                x=_num(kd["x"], f"{ctx}.x"),
                y=_num(kd["y"], f"{ctx}.y"),
                h=math.radians(_num(kd["h"], f"{ctx}.h")),
            )
        )
    return WalkScript(keyframes=tuple(kfs))


def load_walk(path: str | Path) -> WalkScript:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read walk file {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: malformed JSON: {exc}") from exc
    try:
        return walk_from_dict(doc)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc

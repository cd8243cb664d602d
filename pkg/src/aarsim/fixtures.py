"""Regenerate the shipped fixture scenes, walks, and placeholder clips.

All audio is synthesized deterministically (fixed RNG seed, whole-cycle
tone lengths so loops are seamless), so `python -m aarsim.fixtures`
reproduces the committed fixtures byte for byte.
"""

from __future__ import annotations

import argparse
import json
import math
import wave
from pathlib import Path

import numpy as np

from .audio_logic import (
    ClipRef,
    ContentSelector,
    PlayMode,
    SelectorDimension,
    SoundSource,
    SourceTag,
)
from .geometry import Occluder, Pose2D
from .render import quantize_pcm16
from .scene import AmbientBed, AnchorFeature, Scene, serialize_scene

RATE = 48000


def _write_clip(path: Path, samples: np.ndarray) -> None:
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(RATE)
        wf.writeframes(quantize_pcm16(samples).tobytes())


def _t(dur: float) -> np.ndarray:
    return np.arange(round(dur * RATE)) / RATE


def _sine(freq: float, dur: float, amp: float) -> np.ndarray:
    return amp * np.sin(2 * math.pi * freq * _t(dur))


def _tremolo_tone(freq: float, dur: float, amp: float, rate_hz: float, depth: float) -> np.ndarray:
    t = _t(dur)
    trem = 1.0 - depth * 0.5 * (1.0 + np.sin(2 * math.pi * rate_hz * t))
    return amp * trem * np.sin(2 * math.pi * freq * t)


def _decaying_tone(freq: float, dur: float, amp: float, half_life: float) -> np.ndarray:
    t = _t(dur)
    env = np.exp(-t * math.log(2) / half_life)
    env[: round(0.01 * RATE)] *= np.linspace(0, 1, round(0.01 * RATE))
    return amp * env * np.sin(2 * math.pi * freq * t)


def _hall_tone(freq: float, dur: float, amp: float) -> np.ndarray:
    t = _t(dur)
    x = np.sin(2 * math.pi * freq * t) + 0.3 * np.sin(2 * math.pi * 2 * freq * t)
    attack = round(0.05 * RATE)
    release = round(0.2 * RATE)
    env = np.ones_like(t)
    env[:attack] = np.linspace(0, 1, attack)
    env[-release:] = np.linspace(1, 0, release)
    return amp * env * x / 1.3


def _warble(freq: float, dur: float, amp: float) -> np.ndarray:
    t = _t(dur)
    phase = 2 * math.pi * freq * t + 12.0 * np.sin(2 * math.pi * 4.0 * t)
    return amp * np.sin(phase)


def write_clips(out: Path, rng: np.random.Generator) -> None:
    out.mkdir(parents=True, exist_ok=True)
    _write_clip(out / "station_close.wav", _tremolo_tone(330, 4, 0.4, 5, 0.2))
    _write_clip(out / "station_mid.wav", _tremolo_tone(440, 4, 0.4, 3, 0.3))
    _write_clip(out / "station_far.wav", _tremolo_tone(550, 4, 0.4, 7, 0.25))
    _write_clip(out / "static.wav", 0.3 * rng.standard_normal(2 * RATE).clip(-3, 3) / 3)
    gate = (np.sin(2 * math.pi * 4 * _t(2)) > 0).astype(float)
    _write_clip(out / "radio_attract.wav", _sine(880, 2, 0.4) * gate)
    _write_clip(
        out / "room_tone.wav",
        0.1 * rng.standard_normal(4 * RATE).clip(-3, 3) / 3 + _sine(60, 4, 0.05),
    )
    _write_clip(out / "hall_leipzig.wav", _hall_tone(262, 3, 0.4))
    _write_clip(out / "hall_vienna.wav", _hall_tone(330, 3, 0.4))
    _write_clip(out / "hall_paris.wav", _hall_tone(392, 3, 0.4))
    _write_clip(out / "hall_london.wav", _hall_tone(523, 3, 0.4))
    _write_clip(out / "chime.wav", _decaying_tone(988, 1.5, 0.35, 0.4))
    _write_clip(out / "naturehall.wav", _warble(600, 3, 0.35))
    _write_clip(
        out / "cityscape.wav",
        0.18 * rng.standard_normal(3 * RATE).clip(-3, 3) / 3 + _sine(120, 3, 0.15),
    )
    _write_clip(
        out / "lobby_tone.wav",
        0.08 * rng.standard_normal(4 * RATE).clip(-3, 3) / 3 + _sine(90, 4, 0.04),
    )
    _write_clip(out / "tone2k.wav", _sine(2000, 2, 0.5))


def radio_room() -> Scene:
    radio = SoundSource(
        id="radio",
        position=(8.0, 4.0),
        mode=PlayMode.LOOP,
        tag=SourceTag.THEMATIC,
        content=ContentSelector(
            dimension=SelectorDimension.DISTANCE,
            boundaries=(0.5, 2.0, 3.5, 5.0),
            clips=(
                ClipRef("clips/station_close.wav"),
                ClipRef("clips/station_mid.wav"),
                ClipRef("clips/station_far.wav"),
            ),
            crossfade_width=0.4,
            interstitial=ClipRef("clips/static.wav"),
            interstitial_gain=0.5,
        ),
        r_on=5.0,
        r_off=6.0,
        attractor_clip=ClipRef("clips/radio_attract.wav"),
        priority=5,
    )
    return Scene(
        name="radio_room",
        description=(
            "A single radio set whose broadcast retunes with listener "
            "distance; orbit close to hold one station."
        ),
        spawn=Pose2D(1.0, 4.0, 0.0),
        anchors=(
            AnchorFeature("poster_west", (0.15, 4.0), facing=0.0),
            AnchorFeature("clock_north", (5.0, 7.85), facing=math.radians(-90.0)),
            AnchorFeature("sign_east", (9.85, 4.0), facing=math.radians(180.0)),
        ),
        occluders=(
            Occluder((0.0, 0.0), (10.0, 0.0)),
            Occluder((10.0, 0.0), (10.0, 8.0)),
            Occluder((10.0, 8.0), (0.0, 8.0)),
            Occluder((0.0, 8.0), (0.0, 0.0)),
        ),
        sources=(radio,),
        ambient=AmbientBed(ClipRef("clips/room_tone.wav"), gain=0.25),
    )


RADIO_WALK = {
    "keyframes": [
        {"t": 0.0, "x": 1.0, "y": 4.0, "h": 0.0},
        {"t": 10.0, "x": 6.8, "y": 4.0, "h": 0.0},
        {"t": 13.0, "x": 8.0, "y": 5.2, "h": -90.0},
        {"t": 16.0, "x": 9.2, "y": 4.0, "h": 180.0},
        {"t": 19.0, "x": 8.0, "y": 2.8, "h": 90.0},
        {"t": 22.0, "x": 6.8, "y": 4.0, "h": 0.0},
        {"t": 30.0, "x": 1.5, "y": 4.0, "h": 0.0},
    ]
}


def symphony_map() -> Scene:
    def hall(sid: str, pos: tuple[float, float], clip: str, priority: int) -> SoundSource:
        return SoundSource(
            id=sid,
            position=pos,
            mode=PlayMode.ONE_SHOT,
            tag=SourceTag.THEMATIC,
            content=ClipRef(f"clips/{clip}"),
            r_on=2.5,
            r_off=3.5,
            attractor_clip=ClipRef("clips/chime.wav"),
            priority=priority,
        )

    return Scene(
        name="symphony_map",
        description=(
            "Four concert-hall stations on a floor map; the first three "
            "unlock in order, the fourth roams free."
        ),
        spawn=Pose2D(7.5, 1.0, math.radians(90.0)),
        anchors=(
            AnchorFeature("entrance_arch", (7.5, 0.2), facing=math.radians(90.0)),
            AnchorFeature("left_mural", (0.2, 6.0), facing=0.0),
            AnchorFeature("right_mural", (15.8, 6.0), facing=math.radians(180.0)),
        ),
        occluders=(
            Occluder((8.0, 0.0), (8.0, 5.0)),
            Occluder((8.0, 7.0), (8.0, 12.0)),
        ),
        sources=(
            hall("hall_leipzig", (3.0, 3.0), "hall_leipzig.wav", 3),
            hall("hall_vienna", (13.0, 3.0), "hall_vienna.wav", 2),
            hall("hall_paris", (3.0, 9.0), "hall_paris.wav", 1),
            hall("hall_london", (13.0, 9.0), "hall_london.wav", 0),
        ),
        sequences=(("hall_leipzig", "hall_vienna", "hall_paris"),),
    )


SYMPHONY_WALK = {
    "keyframes": [
        {"t": 0.0, "x": 7.5, "y": 1.0, "h": 90.0},
        {"t": 6.0, "x": 3.2, "y": 3.2, "h": 135.0},
        {"t": 12.0, "x": 3.2, "y": 3.2, "h": 135.0},
        {"t": 15.0, "x": 8.0, "y": 6.0, "h": 0.0},
        {"t": 21.0, "x": 12.8, "y": 3.2, "h": -45.0},
        {"t": 27.0, "x": 12.8, "y": 3.2, "h": -45.0},
        {"t": 33.0, "x": 8.0, "y": 6.0, "h": 135.0},
        {"t": 40.0, "x": 3.2, "y": 8.8, "h": 135.0},
        {"t": 46.0, "x": 3.2, "y": 8.8, "h": 135.0},
        {"t": 52.0, "x": 8.0, "y": 6.0, "h": -45.0},
    ]
}


def lobby() -> Scene:
    def room(sid: str, pos: tuple[float, float], clip: str) -> SoundSource:
        return SoundSource(
            id=sid,
            position=pos,
            mode=PlayMode.LOOP,
            tag=SourceTag.FUNCTIONAL,
            content=ClipRef(f"clips/{clip}"),
            r_on=8.0,
            r_off=9.0,
        )

    return Scene(
        name="lobby",
        description=(
            "Two rooms off a lobby advertise themselves through the wall: "
            "birdsong behind the left door, the city behind the right."
        ),
        spawn=Pose2D(3.0, 2.0, math.radians(-90.0)),
        anchors=(
            AnchorFeature("portrait", (3.0, 0.15), facing=math.radians(90.0)),
        ),
        occluders=(
            Occluder((0.0, 4.0), (1.0, 4.0)),
            Occluder((2.0, 4.0), (4.0, 4.0)),
            Occluder((5.0, 4.0), (6.0, 4.0)),
        ),
        sources=(
            room("naturehall", (0.8, 6.5), "naturehall.wav"),
            room("cityscape", (5.2, 6.5), "cityscape.wav"),
        ),
        ambient=AmbientBed(ClipRef("clips/lobby_tone.wav"), gain=0.3),
    )


LOBBY_WALK = {
    "keyframes": [
        {"t": 0.0, "x": 3.0, "y": 2.0, "h": -90.0},
        {"t": 10.0, "x": 3.0, "y": 2.0, "h": -90.0},
    ]
}


def write_fixtures(out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_clips(out / "clips", np.random.default_rng(1037))
    for scene in (radio_room(), symphony_map(), lobby()):
        (out / f"{scene.name}.json").write_text(serialize_scene(scene), encoding="utf-8")
    for name, walk in (
        ("radio_walk", RADIO_WALK),
        ("symphony_walk", SYMPHONY_WALK),
        ("lobby_walk", LOBBY_WALK),
    ):
        (out / f"{name}.json").write_text(
            json.dumps(walk, indent=2) + "\n", encoding="utf-8"
        )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="regenerate the shipped fixture scenes and clips"
    )
    parser.add_argument("out_dir", nargs="?", default="fixtures")
    args = parser.parse_args(argv)
    write_fixtures(args.out_dir)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

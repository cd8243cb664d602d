"""Shared fixtures: paths, noise-free parameter sets, tiny scene builders."""

from __future__ import annotations

import math
from pathlib import Path

import pytest

from aarsim.audio_logic import ClipRef, PlayMode, SoundSource, SourceTag
from aarsim.geometry import Pose2D
from aarsim.scene import AnchorFeature, Scene, SimParams

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


def quiet_params(**overrides) -> SimParams:
    """Default params with every stochastic knob turned off."""
    base = dict(
        sigma_range=0.0,
        sigma_bearing=0.0,
        sigma_psi=0.0,
        drift_pos=0.0,
        drift_heading=0.0,
        p_base=1.0,
    )
    base.update(overrides)
    return SimParams(**base)


def make_source(sid: str = "src", pos=(0.0, 0.0), clip="clips/tone2k.wav", **kw) -> SoundSource:
    defaults = dict(
        mode=PlayMode.LOOP,
        content=ClipRef(clip),
        tag=SourceTag.THEMATIC,
    )
    defaults.update(kw)
    return SoundSource(id=sid, position=pos, **defaults)


def make_scene(
    name: str = "test",
    anchors=(),
    occluders=(),
    sources=(),
    params: SimParams | None = None,
    spawn: Pose2D | None = None,
    ambient=None,
    sequences=(),
) -> Scene:
    """In-memory scene rooted at the fixtures dir so clip refs resolve."""
    return Scene(
        name=name,
        description="",
        spawn=spawn,
        anchors=tuple(anchors),
        occluders=tuple(occluders),
        sources=tuple(sources),
        ambient=ambient,
        sequences=tuple(sequences),
        params=params if params is not None else quiet_params(),
        base_dir=FIXTURES,
    )


def facing_anchor(aid: str = "mark", pos=(0.0, 0.0), facing_deg: float = 0.0, max_range: float = 8.0) -> AnchorFeature:
    return AnchorFeature(aid, pos, facing=math.radians(facing_deg), max_range=max_range)

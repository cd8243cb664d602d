import math

import numpy as np
import pytest

from aarsim.analytics import (
    ATTRACTOR_START,
    CLIP_START,
    MODE_CHANGE,
    POSE,
    ZONE_ENTER,
)
from aarsim.audio_logic import ClipRef, PlayMode, SourceTag, ZonePhase
from aarsim.engine import Engine
from aarsim.geometry import Pose2D
from aarsim.scene import scene_from_dict, scene_to_dict

from conftest import facing_anchor, make_scene, make_source, quiet_params


def _engine(scene, seed=0, **kw):
    return Engine(scene, seed, **kw)


def _step_for(engine, pose, seconds):
    events = []
    blocks = int(round(seconds / engine.block_dt))
    for _ in range(blocks):
        _, evs = engine.step(pose)
        events.extend(evs)
    return events


class TestStepBasics:
    def test_first_step_logs_mode_and_pose(self):
        eng = _engine(make_scene(spawn=Pose2D(0, 0, 0)))
        _, events = eng.step(Pose2D(0, 0, 0))
        kinds = [e.kind for e in events]
        assert kinds == [MODE_CHANGE, POSE]
        assert events[0].payload["mode"] == "EXTENDED"

    def test_pose_events_at_one_hertz(self):
        eng = _engine(make_scene(spawn=Pose2D(0, 0, 0)))
        events = _step_for(eng, Pose2D(0, 0, 0), 2.2)
        stamps = [e.t for e in events if e.kind == POSE]
        # one per second, each on the first block boundary past the mark
        assert len(stamps) == 3
        for got, want in zip(stamps, [0.0, 1.0, 2.0]):
            assert want <= got < want + eng.block_dt

    def test_block_clock(self):
        scene = make_scene()
        eng = _engine(scene)
        assert eng.t == 0.0
        eng.step(Pose2D(0, 0, 0))
        assert eng.t == pytest.approx(scene.params.block / scene.params.sample_rate)

    def test_tracked_mode_with_anchor_in_view(self):
        scene = make_scene(anchors=[facing_anchor("m", (3.0, 0.0), 180.0)])
        eng = _engine(scene, start_pose=Pose2D(0, 0, 0))
        _, events = eng.step(Pose2D(0, 0, 0))
        assert eng.estimate.mode.value == "TRACKED"
        modes = [e.payload["mode"] for e in events if e.kind == MODE_CHANGE]
        assert modes == ["TRACKED"]

    def test_determinism_same_seed(self):
        def run():
            scene = make_scene(
                anchors=[facing_anchor("m", (3.0, 0.0), 180.0)],
                params=quiet_params(sigma_range=0.02, drift_pos=0.1),
            )
            eng = _engine(scene, seed=42, start_pose=Pose2D(0, 0, 0))
            out = []
            pose = Pose2D(0, 0, 0)
            for i in range(50):
                pose = Pose2D(0.02 * i, 0.0, 0.0)
                block, _ = eng.step(pose)
                out.append(block.frames.copy())
            return np.concatenate(out)

        a, b = run(), run()
        assert np.array_equal(a, b)

    def test_different_seed_diverges(self):
        scene = make_scene(
            anchors=[facing_anchor("m", (3.0, 0.0), 180.0)],
            params=quiet_params(sigma_range=0.05),
        )
        def est_x(seed):
            eng = _engine(scene, seed=seed, start_pose=Pose2D(0, 0, 0))
            eng.step(Pose2D(0, 0, 0))
            return eng.estimate.pose.x

        assert est_x(1) != est_x(2)


class TestZoneIntegration:
    def _scene(self, **src_kw):
        return make_scene(
            sources=[make_source("beep", pos=(0.0, 0.0), **src_kw)],
            spawn=Pose2D(0.0, 0.0, 0.0),
        )

    def test_spawn_inside_zone_starts_clip(self):
        eng = _engine(self._scene())
        _, events = eng.step(Pose2D(0, 0, 0))
        kinds = [e.kind for e in events]
        assert ZONE_ENTER in kinds and CLIP_START in kinds
        assert eng.zones["beep"].phase is ZonePhase.ACTIVE
        assert "beep" in eng.visited

    def test_audio_follows_rendered_pose(self):
        # stand still inside the zone facing the source: steady state must
        # match the gain at the rendered pose (center pan, no rear shelf)
        eng = _engine(self._scene())
        pose = Pose2D(-0.5, 0.0, 0.0)
        eng.reset_pose(pose)
        block = None
        for _ in range(10):
            block, _ = eng.step(pose)
        # d=0.5 < d_ref: plateau gain 1.0; tone2k amplitude 0.5
        sq2 = math.sqrt(2) / 2
        peak = np.max(np.abs(block.frames[:, 0]))
        assert peak == pytest.approx(0.5 * sq2, rel=1e-3)
        assert np.max(np.abs(block.frames[:, 0] - block.frames[:, 1])) < 1e-12

    def test_outside_zone_is_silent(self):
        eng = _engine(self._scene())
        pose = Pose2D(10.0, 0.0, 0.0)
        eng.reset_pose(pose)
        block, _ = eng.step(pose)
        assert block.virtual_rms == 0.0

    def test_exit_fades_and_silences(self):
        eng = _engine(self._scene())
        inside = Pose2D(0.5, 0.0, 0.0)
        eng.reset_pose(inside)
        for _ in range(5):
            eng.step(inside)
        outside = Pose2D(10.0, 0.0, 0.0)
        eng.reset_pose(outside)
        last = None
        for _ in range(4):
            last, _ = eng.step(outside)
        assert last.virtual_rms == 0.0


class TestAttractor:
    def _scene(self):
        src = make_source(
            "glock",
            pos=(10.0, 0.0),
            attractor_clip=ClipRef("clips/chime.wav"),
        )
        return make_scene(
            sources=[src],
            params=quiet_params(t_idle=0.5, cooldown=30.0),
            spawn=Pose2D(0.0, 0.0, 0.0),
        )

    def test_fires_after_idle_and_sets_cooldown(self):
        eng = _engine(self._scene())
        pose = Pose2D(0, 0, 0)
        events = _step_for(eng, pose, 1.0)
        starts = [e for e in events if e.kind == ATTRACTOR_START]
        assert len(starts) == 1
        ev = starts[0]
        assert ev.source_id == "glock"
        assert ev.t == pytest.approx(0.5, abs=eng.block_dt)
        assert eng.cooldown_until["glock"] == pytest.approx(ev.t + 30.0)

    def test_attractor_is_audible_from_outside_zone(self):
        eng = _engine(self._scene())
        pose = Pose2D(0, 0, 0)
        _step_for(eng, pose, 0.6)
        block, _ = eng.step(pose)
        assert block.virtual_rms > 0.0

    def test_does_not_refire_during_cooldown(self):
        eng = _engine(self._scene())
        pose = Pose2D(0, 0, 0)
        events = _step_for(eng, pose, 4.0)  # chime is 1.5 s, cooldown 30
        starts = [e for e in events if e.kind == ATTRACTOR_START]
        assert len(starts) == 1

    def test_visited_source_never_advertises(self):
        eng = _engine(self._scene())
        inside = Pose2D(10.0, 0.5, 0.0)
        eng.reset_pose(inside)
        eng.step(inside)  # zone entered: visited
        far = Pose2D(0.0, 0.0, 0.0)
        eng.reset_pose(far)
        events = _step_for(eng, far, 1.5)
        assert [e for e in events if e.kind == ATTRACTOR_START] == []


class TestResetPose:
    def test_reset_seats_everything(self):
        eng = _engine(make_scene(spawn=Pose2D(0, 0, 0)))
        target = Pose2D(4.0, -2.0, 1.0)
        eng.reset_pose(target)
        assert eng.rendered == target
        assert eng.estimate.pose == target
        assert not eng.latched
        block, _ = eng.step(target)
        assert eng.rendered == target  # no smoothing transient

    def test_reset_consumes_no_rng(self):
        scene = make_scene(params=quiet_params(drift_pos=0.3))
        a = _engine(scene, seed=9, start_pose=Pose2D(0, 0, 0))
        b = _engine(scene, seed=9, start_pose=Pose2D(0, 0, 0))
        b.reset_pose(Pose2D(0, 0, 0))
        a.step(Pose2D(1, 0, 0))
        b.step(Pose2D(1, 0, 0))
        assert a.estimate.pose == b.estimate.pose


class TestUpdateScene:
    def test_moves_source_but_keeps_zone_state(self):
        scene = make_scene(
            sources=[make_source("beep", pos=(0.0, 0.0))],
            spawn=Pose2D(0.0, 0.0, 0.0),
        )
        eng = _engine(scene)
        eng.step(Pose2D(0, 0, 0))
        assert eng.zones["beep"].phase is ZonePhase.ACTIVE
        playhead = eng.zones["beep"].playhead

        doc = scene_to_dict(scene)
        doc["sources"][0]["pos"] = [0.5, 0.0]
        edited = scene_from_dict(doc, scene.base_dir)
        eng.update_scene(edited)
        assert eng.scene.sources[0].position == (0.5, 0.0)
        assert eng.zones["beep"].playhead == playhead

    def test_removed_source_forgotten(self):
        scene = make_scene(
            sources=[make_source("beep", pos=(0.0, 0.0))],
            spawn=Pose2D(0.0, 0.0, 0.0),
        )
        eng = _engine(scene)
        eng.step(Pose2D(0, 0, 0))
        doc = scene_to_dict(scene)
        doc["sources"] = []
        eng.update_scene(scene_from_dict(doc, scene.base_dir))
        assert eng.zones == {}
        assert eng.visited == set()

    def test_dsp_geometry_changes_rejected(self):
        scene = make_scene()
        eng = _engine(scene)
        doc = scene_to_dict(scene)
        doc["params"]["block"] = 480
        with pytest.raises(ValueError, match="block"):
            eng.update_scene(scene_from_dict(doc, scene.base_dir))


class TestSnapshot:
    def test_fields_and_source_view(self):
        scene = make_scene(
            sources=[make_source("beep", pos=(3.0, 0.0))],
            spawn=Pose2D(0.0, 0.0, 0.0),
        )
        eng = _engine(scene)
        eng.step(Pose2D(0, 0, 0))
        snap = eng.snapshot()
        assert set(snap) >= {
            "t", "pose", "mode", "confidence", "ambient_gain", "sources",
            "clip_count",
        }
        view = snap["sources"]["beep"]
        assert view["distance"] == pytest.approx(3.0)
        assert view["azimuth"] == pytest.approx(0.0)
        assert view["phase"] == "IDLE"
        assert view["armed"] is True
        assert not view["occluded"]

    def test_final_events_carry_clip_count(self):
        eng = _engine(make_scene(spawn=Pose2D(0, 0, 0)))
        eng.step(Pose2D(0, 0, 0))
        (ev,) = eng.final_events()
        assert ev.kind == POSE
        assert ev.payload["clip_count"] == 0


class TestTrace:
    def test_trace_records_rendered_pose_and_weights(self):
        scene = make_scene(
            sources=[make_source("beep", pos=(0.0, 0.0))],
            spawn=Pose2D(0.0, 0.0, 0.0),
        )
        eng = _engine(scene, record_trace=True)
        eng.step(Pose2D(0, 0, 0))
        assert len(eng.trace) == 1
        entry = eng.trace[0]
        assert entry.t == 0.0
        assert entry.rendered == eng.rendered
        assert entry.mode == "EXTENDED"

import math
import struct
import wave

import numpy as np
import pytest
from hypothesis import given, strategies as st

from aarsim.render import (
    AudioClip,
    BlockRenderer,
    VoiceSpec,
    load_clip,
    lowpass_response_db,
    lowpass_step,
    pan_gains,
    quantize_pcm16,
    write_wav,
)

RATE = 48000
SQ2 = math.sqrt(2.0) / 2.0


class TestPanGains:
    def test_front_center(self):
        l, r = pan_gains(0.0)
        assert l == pytest.approx(SQ2)
        assert r == pytest.approx(SQ2)

    def test_hard_left(self):
        # positive azimuth is the listener's left
        l, r = pan_gains(math.pi / 2)
        assert l == pytest.approx(1.0)
        assert r == pytest.approx(0.0, abs=1e-12)

    def test_hard_right(self):
        l, r = pan_gains(-math.pi / 2)
        assert l == pytest.approx(0.0, abs=1e-12)
        assert r == pytest.approx(1.0)

    def test_rear_attenuation(self):
        l, r = pan_gains(math.pi)
        assert l * l + r * r == pytest.approx(0.64)
        assert l == pytest.approx(r)

    @given(st.floats(-math.pi, math.pi))
    def test_constant_power_with_rear_shelf(self, az):
        l, r = pan_gains(az)
        assert l >= 0 and r >= 0
        power = l * l + r * r
        rear = 1.0 - 0.2 * max(0.0, -math.cos(az))
        assert power == pytest.approx(rear * rear)
        assert 0.64 - 1e-9 <= power <= 1.0 + 1e-9


class TestLowpass:
    def _measured_db(self, f, runner):
        """Attenuation of a pure tone through `runner`, skipping warmup."""
        cycles = 400
        n = int(round(cycles * RATE / f))
        t = np.arange(n) / RATE
        x = np.sin(2 * math.pi * f * t)
        y = runner(x)
        tail = slice(n // 2, None)
        return 20 * math.log10(
            np.sqrt(np.mean(y[tail] ** 2)) / np.sqrt(np.mean(x[tail] ** 2))
        )

    def _scalar_filter(self, x):
        state = 0.0
        out = np.empty_like(x)
        for i, s in enumerate(x):
            state, out[i] = lowpass_step(state, s)
        return out

    def test_cutoff_is_3db(self):
        assert lowpass_response_db(800.0) == pytest.approx(-3.01, abs=0.03)

    def test_2k_attenuation(self):
        assert lowpass_response_db(2000.0) == pytest.approx(-8.58, abs=0.01)

    def test_dc_passes_clean(self):
        assert lowpass_response_db(0.0) == pytest.approx(0.0, abs=1e-9)

    @pytest.mark.parametrize("f", [400.0, 800.0, 2000.0, 6000.0])
    def test_formula_matches_sample_loop(self, f):
        # analytic curve vs actually running the recurrence on a tone
        measured = self._measured_db(f, self._scalar_filter)
        assert measured == pytest.approx(lowpass_response_db(f), abs=0.05)


class TestQuantize:
    def test_known_values(self):
        x = np.array([0.0, 0.5, -0.5, 1.0, -1.0])
        q = quantize_pcm16(x)
        assert q.tolist() == [0, 16384, -16384, 32767, -32767]

    def test_half_rounds_away_from_zero(self):
        # 1/65534 scales to exactly 0.5 LSB
        x = np.array([1.0 / 65534.0, -1.0 / 65534.0])
        assert quantize_pcm16(x).tolist() == [1, -1]

    def test_overrange_clamps(self):
        x = np.array([1.5, -1.5])
        assert quantize_pcm16(x).tolist() == [32767, -32768]

    def test_dtype_is_le_int16(self):
        q = quantize_pcm16(np.zeros(4))
        assert q.dtype == np.dtype("<i2")


class TestWavIO:
    def test_round_trip_error_bound(self, tmp_path):
        rng = np.random.default_rng(5)
        frames = rng.uniform(-0.9, 0.9, size=(512, 2))
        p = tmp_path / "rt.wav"
        write_wav(p, [frames], RATE)
        clip = load_clip(p, RATE)
        mono = frames.mean(axis=1)
        assert np.max(np.abs(clip.samples - mono)) < 2.0 / 32767.0

    def test_stereo_downmix_average(self, tmp_path):
        n = 64
        frames = np.column_stack([np.full(n, 0.5), np.full(n, 0.25)])
        p = tmp_path / "st.wav"
        write_wav(p, [frames], RATE)
        clip = load_clip(p, RATE)
        assert np.allclose(clip.samples, 0.375, atol=1.0 / 32767.0)

    def test_24bit_decoding(self, tmp_path):
        vals = [0, 8388607, -8388608, 4194304, -4194304]
        raw = b"".join(struct.pack("<i", v)[:3] for v in vals)
        p = tmp_path / "deep.wav"
        with wave.open(str(p), "wb") as wf:
            wf.setnchannels(1)
            wf.setsampwidth(3)
            wf.setframerate(RATE)
            wf.writeframes(raw)
        clip = load_clip(p, RATE)
        expected = [0.0, 8388607 / 8388608, -1.0, 0.5, -0.5]
        assert np.allclose(clip.samples, expected, atol=0, rtol=0)

    def test_rate_mismatch_rejected(self, tmp_path):
        p = tmp_path / "slow.wav"
        with wave.open(str(p), "wb") as wf:
            wf.setnchannels(1)
            wf.setsampwidth(2)
            wf.setframerate(22050)
            wf.writeframes(b"\x00\x00" * 10)
        with pytest.raises(ValueError, match="22050"):
            load_clip(p, RATE)

    def test_8bit_rejected(self, tmp_path):
        p = tmp_path / "thin.wav"
        with wave.open(str(p), "wb") as wf:
            wf.setnchannels(1)
            wf.setsampwidth(1)
            wf.setframerate(RATE)
            wf.writeframes(b"\x80" * 10)
        with pytest.raises(ValueError, match="8-bit"):
            load_clip(p, RATE)

    def test_duration_property(self):
        clip = AudioClip(samples=np.zeros(RATE // 2), sample_rate=RATE)
        assert clip.duration == pytest.approx(0.5)


BLOCK = 64


def _dc_clip(n=RATE, value=1.0):
    return AudioClip(samples=np.full(n, value), sample_rate=RATE)


def _ramp_clip(n=100):
    # strictly increasing but inside [-1, 1] so the output clamp never bites
    return AudioClip(samples=np.arange(n, dtype=np.float64) / 1000.0, sample_rate=RATE)


def _spec(clip, key="v", *, loop=True, gl=1.0, gr=1.0, wet=0.0, resume_at=0,
          start=0, end=None):
    return VoiceSpec(
        key=key,
        clip=clip,
        start_sample=start,
        end_sample=len(clip.samples) if end is None else end,
        loop=loop,
        gain_l=gl,
        gain_r=gr,
        wet=wet,
        resume_at=resume_at,
    )


class TestBlockRenderer:
    def test_new_voice_fades_in_from_zero(self):
        r = BlockRenderer(RATE, BLOCK)
        out = r.render([_spec(_dc_clip())], 0.0, 0.0)
        ramp = np.arange(1, BLOCK + 1) / BLOCK
        assert np.allclose(out.frames[:, 0], ramp)
        assert out.frames[0, 0] == pytest.approx(1.0 / BLOCK)
        assert out.frames[-1, 0] == pytest.approx(1.0)

    def test_steady_state_is_exact(self):
        r = BlockRenderer(RATE, BLOCK)
        spec = _spec(_dc_clip(), gl=0.7, gr=0.3)
        r.render([spec], 0.0, 0.0)
        out = r.render([spec], 0.0, 0.0)
        assert np.allclose(out.frames[:, 0], 0.7)
        assert np.allclose(out.frames[:, 1], 0.3)

    def test_gain_ramp_lands_on_target(self):
        r = BlockRenderer(RATE, BLOCK)
        r.render([_spec(_dc_clip(), gl=0.2, gr=0.2)], 0.0, 0.0)
        out = r.render([_spec(_dc_clip(), gl=0.9, gr=0.9)], 0.0, 0.0)
        assert out.frames[-1, 0] == pytest.approx(0.9)
        # linear in between
        mid = 0.2 + (0.9 - 0.2) * (BLOCK // 2) / BLOCK
        assert out.frames[BLOCK // 2 - 1, 0] == pytest.approx(mid)

    def test_vanished_voice_fades_out_then_drops(self):
        r = BlockRenderer(RATE, BLOCK)
        spec = _spec(_dc_clip())
        r.render([spec], 0.0, 0.0)
        r.render([spec], 0.0, 0.0)
        out = r.render([], 0.0, 0.0)
        ramp = np.arange(1, BLOCK + 1) / BLOCK
        assert np.allclose(out.frames[:, 0], 1.0 - ramp)
        assert out.frames[-1, 0] == pytest.approx(0.0, abs=1e-15)
        assert r._voices == {}
        out = r.render([], 0.0, 0.0)
        assert np.all(out.frames == 0.0)

    def test_loop_wraps_modulo(self):
        r = BlockRenderer(RATE, BLOCK)
        clip = _ramp_clip(100)
        spec = _spec(clip, loop=True)
        r.render([spec], 0.0, 0.0)
        assert r._voices["v"].pos == 64
        out = r.render([spec], 0.0, 0.0)
        assert r._voices["v"].pos == 28
        # second block reads samples 64..99 then wraps to 0..27
        expected = np.concatenate([np.arange(64, 100), np.arange(0, 28)]) / 1000.0
        assert np.allclose(out.frames[:, 0], expected)

    def test_one_shot_pads_silence(self):
        r = BlockRenderer(RATE, BLOCK)
        clip = _ramp_clip(100)
        spec = _spec(clip, loop=False)
        r.render([spec], 0.0, 0.0)
        out = r.render([spec], 0.0, 0.0)
        # samples 64..99 then zeros
        assert out.frames[35, 0] == pytest.approx(0.099)
        assert np.all(out.frames[36:, 0] == 0.0)

    def test_resume_at_seeds_position(self):
        r = BlockRenderer(RATE, BLOCK)
        clip = _ramp_clip(1000)
        out = r.render([_spec(clip, resume_at=500)], 0.0, 0.0)
        ramp = np.arange(1, BLOCK + 1) / BLOCK
        expected = np.arange(500, 500 + BLOCK) / 1000.0 * ramp
        assert np.allclose(out.frames[:, 0], expected)

    def test_start_sample_offsets_slice(self):
        r = BlockRenderer(RATE, BLOCK)
        clip = _ramp_clip(300)
        spec = _spec(clip, start=200, end=300, gl=1.0, gr=1.0)
        r.render([spec], 0.0, 0.0)
        out = r.render([spec], 0.0, 0.0)
        # window is samples 200..299 looped; second block starts at offset 64
        expected = np.concatenate([np.arange(264, 300), np.arange(200, 228)]) / 1000.0
        assert np.allclose(out.frames[:, 0], expected)

    def test_wet_filter_attenuates_tone(self):
        n = RATE
        t = np.arange(n) / RATE
        clip = AudioClip(samples=np.sin(2 * math.pi * 2000 * t), sample_rate=RATE)
        block = 4800
        spec_kw = dict(loop=True, gl=1.0, gr=0.0, wet=1.0)
        r = BlockRenderer(RATE, block)
        out = None
        for _ in range(10):
            out = r.render([_spec(clip, **spec_kw)], 0.0, 0.0)
        got = 20 * math.log10(np.sqrt(np.mean(out.frames[:, 0] ** 2)) / SQ2)
        assert got == pytest.approx(lowpass_response_db(2000.0), abs=0.05)

    def test_dry_voice_passes_clean(self):
        n = RATE
        t = np.arange(n) / RATE
        clip = AudioClip(samples=np.sin(2 * math.pi * 2000 * t), sample_rate=RATE)
        r = BlockRenderer(RATE, 4800)
        out = None
        for _ in range(4):
            out = r.render([_spec(clip, gl=1.0, gr=0.0, wet=0.0)], 0.0, 0.0)
        rms = np.sqrt(np.mean(out.frames[:, 0] ** 2))
        assert rms == pytest.approx(SQ2, rel=1e-6)

    def test_ambient_is_separate_bus(self):
        amb = _dc_clip(value=0.5)
        r = BlockRenderer(RATE, BLOCK, ambient_clip=amb)
        r.render([], 0.8, 0.0)
        out = r.render([], 0.8, 0.0)
        assert out.virtual_rms == 0.0
        assert out.ambient_rms == pytest.approx(0.4)
        assert np.allclose(out.frames, 0.4)

    def test_ambient_gain_ramps(self):
        amb = _dc_clip(value=1.0)
        r = BlockRenderer(RATE, BLOCK, ambient_clip=amb)
        out = r.render([], 1.0, 0.0)
        ramp = np.arange(1, BLOCK + 1) / BLOCK
        assert np.allclose(out.frames[:, 0], ramp)

    def test_rms_measured_before_clamp(self):
        r = BlockRenderer(RATE, BLOCK)
        spec = _spec(_dc_clip(), gl=2.0, gr=2.0)
        r.render([spec], 0.0, 0.0)
        out = r.render([spec], 0.0, 0.0)
        assert out.virtual_rms == pytest.approx(2.0)
        assert np.max(np.abs(out.frames)) <= 1.0
        assert out.clipped == 2 * BLOCK
        assert r.clip_count == out.clipped + (
            np.count_nonzero(np.arange(1, BLOCK + 1) / BLOCK * 2.0 > 1.0) * 2
        )

    def test_two_voices_sum(self):
        r = BlockRenderer(RATE, BLOCK)
        a = _spec(_dc_clip(), key="a", gl=0.3, gr=0.0)
        b = _spec(_dc_clip(), key="b", gl=0.4, gr=0.0)
        r.render([a, b], 0.0, 0.0)
        out = r.render([a, b], 0.0, 0.0)
        assert np.allclose(out.frames[:, 0], 0.7)

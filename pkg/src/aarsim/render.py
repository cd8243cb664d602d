"""Block-based deterministic stereo rendering.

Per-voice gain/pan/filter with per-sample linear parameter ramps, an
unspatialized ambient bed, RMS metering, a hard master clamp with a clip
counter, and bit-exact WAV output. All DSP state lives in BlockRenderer;
the control layer hands it an immutable parameter set once per block.
"""

from __future__ import annotations

import math
import wave
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional

import numpy as np
from scipy.signal import lfilter

LOWPASS_FC = 800.0
PCM_FULL_SCALE = 32767.0


@dataclass(frozen=True)
class AudioClip:
    """Mono PCM normalized to [-1, 1] at the engine rate."""

    samples: np.ndarray
    sample_rate: int

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class RenderBlock:
    frames: np.ndarray
    t_start: float
    virtual_rms: float
    ambient_rms: float
    clipped: int


@dataclass(frozen=True)
class VoiceSpec:
    """One voice's parameter targets for the coming block.

    key identifies the voice across blocks; a key's first appearance
    starts its gains from zero, and a key that stops appearing is faded
    out and dropped by the renderer. resume_at seeds the sample position
    on that first appearance (zone re-entry, or a selector band joining
    a broadcast already in progress).
    """

    key: str
    clip: AudioClip
    start_sample: int
    end_sample: int
    loop: bool
    gain_l: float
    gain_r: float
    wet: float
    resume_at: int = 0


def pan_gains(azimuth: float) -> tuple[float, float]:
    """Constant-power stereo gains for a listener-relative azimuth.

    Pan position p = -sin(azimuth) puts positive azimuths (left, by the
    CCW convention) in the left channel. Sources behind the listener
    are attenuated up to 20% as a crude back/front cue.
    """
    p = -math.sin(azimuth)
    zeta = (p + 1.0) * math.pi / 4.0
    rear = 1.0 - 0.2 * max(0.0, -math.cos(azimuth))
    return rear * math.cos(zeta), rear * math.sin(zeta)


def lowpass_coeff(fc: float, fs: float) -> float:
    return 1.0 - math.exp(-2.0 * math.pi * fc / fs)


def lowpass_step(
    state: float, x: float, fc: float = LOWPASS_FC, fs: float = 48000.0
) -> tuple[float, float]:
    """One sample of the occlusion lowpass: y += a*(x - y)."""
    a = lowpass_coeff(fc, fs)
    y = state + a * (x - state)
    return y, y


def lowpass_response_db(f: float, fc: float = LOWPASS_FC, fs: float = 48000.0) -> float:
    """Analytic magnitude response of lowpass_step's recurrence, in dB."""
    a = lowpass_coeff(fc, fs)
    w = 2.0 * math.pi * f / fs
    denom = math.sqrt(1.0 - 2.0 * (1.0 - a) * math.cos(w) + (1.0 - a) ** 2)
    return 20.0 * math.log10(a / denom)


def quantize_pcm16(frames: np.ndarray) -> np.ndarray:
    """Float frames to int16 by round-half-away-from-zero of s*32767."""
    y = np.asarray(frames, dtype=np.float64) * PCM_FULL_SCALE
    q = np.copysign(np.floor(np.abs(y) + 0.5), y)
    return np.clip(q, -32768, 32767).astype("<i2")


def write_wav(path: str | Path, blocks: Iterable[np.ndarray], sample_rate: int) -> None:
    """Stream stereo float blocks to a 16-bit PCM little-endian WAV file."""
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(2)
        wf.setsampwidth(2)
        wf.setframerate(sample_rate)
        for frames in blocks:
            wf.writeframes(quantize_pcm16(frames).tobytes())


def load_clip(path: str | Path, expected_rate: int) -> AudioClip:
    """Read a WAV file into a normalized mono clip at the engine rate.

    16/24-bit PCM, mono or stereo (stereo downmixed by channel average).
    A rate mismatch is an error: clips are resampled offline, never in
    the render loop.
    """
    path = Path(path)
    with wave.open(str(path), "rb") as wf:
        rate = wf.getframerate()
        width = wf.getsampwidth()
        channels = wf.getnchannels()
        nframes = wf.getnframes()
        raw = wf.readframes(nframes)
    if rate != expected_rate:
        raise ValueError(
            f"{path} is {rate} Hz, engine expects {expected_rate} Hz"
        )
    if channels not in (1, 2):
        raise ValueError(f"{path}: only mono or stereo supported")
    if width == 2:
        x = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    elif width == 3:
        b = np.frombuffer(raw, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
        v = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
        v = (v ^ 0x800000) - 0x800000
        x = v.astype(np.float64) / 8388608.0
    else:
        raise ValueError(f"{path}: only 16/24-bit PCM supported, got {8 * width}-bit")
    if channels == 2:
        x = x.reshape(-1, 2).mean(axis=1)
    return AudioClip(samples=x, sample_rate=rate)


@dataclass
class _Voice:
    prev_l: float = 0.0
    prev_r: float = 0.0
    prev_wet: float = 0.0
    zi: np.ndarray = field(default_factory=lambda: np.zeros(1))
    pos: int = 0
    last_spec: Optional[VoiceSpec] = None
    fading_out: bool = False


class BlockRenderer:
    """Owns all per-voice DSP state and produces one block per call.

    Gains and the filter wet fraction ramp linearly across each block
    from the previous block's targets, landing exactly on the new
    targets at the block's last sample; the occlusion filter runs warm
    on every voice so toggling it only moves the wet mix.
    """

    def __init__(
        self,
        sample_rate: int,
        block: int,
        ambient_clip: Optional[AudioClip] = None,
        ambient_start: int = 0,
        ambient_end: Optional[int] = None,
        fc: float = LOWPASS_FC,
    ) -> None:
        self.sample_rate = sample_rate
        self.block = block
        self.clip_count = 0
        self._voices: dict[str, _Voice] = {}
        self._ramp = np.arange(1, block + 1, dtype=np.float64) / block
        a = lowpass_coeff(fc, sample_rate)
        self._b = np.array([a])
        self._a = np.array([1.0, -(1.0 - a)])
        self._ambient_clip = ambient_clip
        self._ambient_s0 = ambient_start
        self._ambient_s1 = (
            len(ambient_clip.samples)
            if ambient_clip is not None and ambient_end is None
            else (ambient_end or 0)
        )
        self._ambient_pos = 0
        self._ambient_prev_gain = 0.0

    def _segment(self, spec: VoiceSpec, pos: int) -> np.ndarray:
        """N samples of the voice's clip slice from pos, looped or zero-padded."""
        n = self.block
        length = spec.end_sample - spec.start_sample
        if length <= 0:
            return np.zeros(n)
        idx = pos + np.arange(n)
        if spec.loop:
            return spec.clip.samples[spec.start_sample + (idx % length)]
        seg = np.zeros(n)
        valid = idx < length
        if valid.any():
            seg[valid] = spec.clip.samples[spec.start_sample + idx[valid]]
        return seg

    def render(
        self, voices: list[VoiceSpec], ambient_gain: float, t_start: float
    ) -> RenderBlock:
        n = self.block
        live_keys = {spec.key for spec in voices}
        work = list(voices)
        # Voices that vanished from the control set fade to silence over
        # this block, then their state is dropped.
        for key, v in self._voices.items():
            if key not in live_keys and v.last_spec is not None:
                work.append(replace(v.last_spec, gain_l=0.0, gain_r=0.0))
                v.fading_out = True

        virtual = np.zeros((n, 2))
        for spec in work:
            v = self._voices.get(spec.key)
            if v is None:
                v = _Voice(pos=spec.resume_at)
                self._voices[spec.key] = v
            v.fading_out = spec.key not in live_keys
            seg = self._segment(spec, v.pos)
            filtered, v.zi = lfilter(self._b, self._a, seg, zi=v.zi)
            wet = v.prev_wet + (spec.wet - v.prev_wet) * self._ramp
            sig = seg * (1.0 - wet) + filtered * wet
            gl = v.prev_l + (spec.gain_l - v.prev_l) * self._ramp
            gr = v.prev_r + (spec.gain_r - v.prev_r) * self._ramp
            virtual[:, 0] += sig * gl
            virtual[:, 1] += sig * gr
            v.prev_l, v.prev_r, v.prev_wet = spec.gain_l, spec.gain_r, spec.wet
            v.pos += n
            if spec.loop:
                length = spec.end_sample - spec.start_sample
                if length > 0:
                    v.pos %= length
            v.last_spec = spec

        for key in [
            k
            for k, v in self._voices.items()
            if v.fading_out and v.prev_l == 0.0 and v.prev_r == 0.0
        ]:
            del self._voices[key]

        ambient = np.zeros((n, 2))
        if self._ambient_clip is not None:
            length = self._ambient_s1 - self._ambient_s0
            if length > 0:
                idx = self._ambient_pos + np.arange(n)
                seg = self._ambient_clip.samples[self._ambient_s0 + (idx % length)]
                g = self._ambient_prev_gain + (
                    ambient_gain - self._ambient_prev_gain
                ) * self._ramp
                ambient[:, 0] = seg * g
                ambient[:, 1] = seg * g
                self._ambient_pos = (self._ambient_pos + n) % length
        self._ambient_prev_gain = ambient_gain

        virtual_rms = float(np.sqrt(np.mean(virtual * virtual)))
        ambient_rms = float(np.sqrt(np.mean(ambient * ambient)))
        mix = virtual + ambient
        over = np.abs(mix) > 1.0
        clipped = int(np.count_nonzero(over))
        if clipped:
            mix = np.clip(mix, -1.0, 1.0)
        self.clip_count += clipped
        return RenderBlock(
            frames=mix,
            t_start=t_start,
            virtual_rms=virtual_rms,
            ambient_rms=ambient_rms,
            clipped=clipped,
        )

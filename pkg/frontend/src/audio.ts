import { JitterBuffer } from "./jitter.js";
import type { AudioFrame } from "./protocol.js";
import { BLOCK_SECONDS, SAMPLE_RATE } from "./protocol.js";

/** The slice of AudioContext the player needs, so tests can fake it. */
export interface AudioSink {
  readonly currentTime: number;
  readonly destination: unknown;
  createBuffer(channels: number, frames: number, sampleRate: number): AudioBufferLike;
  createBufferSource(): AudioBufferSourceLike;
}

export interface AudioBufferLike {
  readonly duration: number;
  copyToChannel(data: Float32Array, channel: number): void;
}

export interface AudioBufferSourceLike {
  buffer: AudioBufferLike | null;
  connect(node: unknown): void;
  start(when: number): void;
}

/**
 * Gapless scheduler over a jitter buffer. Blocks are queued as they
 * arrive; once the buffer holds its target depth, each block is scheduled
 * back to back on the audio clock. If the buffer drains mid-stream the
 * gap plays as silence, the underrun counter ticks, and playback resumes
 * only after the buffer refills to depth.
 */
export class StreamPlayer {
  underruns = 0;
  decodeErrors = 0;
  lastSeq = -1;

  private nextTime = 0;
  private started = false;

  constructor(
    private readonly sink: AudioSink,
    private readonly jitter = new JitterBuffer(3),
    private readonly leadS = 4 * BLOCK_SECONDS,
  ) {}

  get buffered(): number {
    return this.jitter.size;
  }

  push(frame: AudioFrame): void {
    if (this.lastSeq >= 0 && frame.seq !== this.lastSeq + 1) {
      this.decodeErrors += 1; // sequence gap: something was dropped upstream
    }
    this.lastSeq = frame.seq;
    this.jitter.push(frame.samples);
    this.pump();
  }

  /** Called on push and from a periodic tick; schedules whatever is due. */
  pump(): void {
    const now = this.sink.currentTime;
    if (this.started && this.nextTime <= now && this.jitter.size === 0) {
      // the clock caught the scheduler with nothing queued: audible gap
      this.jitter.pop(); // records the underrun, drops back to priming
      this.underruns = this.jitter.underruns;
      this.started = false;
    }
    for (;;) {
      if (this.nextTime > now + this.leadS) return;
      // an empty queue here just means we are scheduled ahead of the
      // clock; only the branch above counts real underruns
      if (this.jitter.size === 0) return;
      const samples = this.jitter.pop();
      if (samples === null) return; // below priming depth, wait for refill
      if (this.nextTime < now) this.nextTime = now;
      const frames = samples.length / 2;
      const buf = this.sink.createBuffer(2, frames, SAMPLE_RATE);
      const left = new Float32Array(frames);
      const right = new Float32Array(frames);
      for (let i = 0; i < frames; i++) {
        left[i] = samples[2 * i];
        right[i] = samples[2 * i + 1];
      }
      buf.copyToChannel(left, 0);
      buf.copyToChannel(right, 1);
      const src = this.sink.createBufferSource();
      src.buffer = buf;
      src.connect(this.sink.destination);
      src.start(this.nextTime);
      this.nextTime += frames / SAMPLE_RATE;
      this.started = true;
    }
  }

  reset(): void {
    this.jitter.reset();
    this.nextTime = 0;
    this.started = false;
    this.lastSeq = -1;
  }
}

/**
 * Wire protocol for the live preview service.
 *
 * One WebSocket carries everything. Text frames are JSON objects tagged
 * by "type": "state" snapshots, per-block "meters", engagement "event"
 * records, and "error" replies. Binary frames are audio: a 1-byte 0x01
 * tag, a little-endian uint32 sequence number, then interleaved 16-bit
 * PCM stereo at 48 kHz.
 *
 * The scene document types mirror GET /scene exactly. Angles cross the
 * wire in degrees; everything in-app is radians.
 */

export const AUDIO_TAG = 0x01;
export const SAMPLE_RATE = 48000;
export const BLOCK_SAMPLES = 1024;
export const BLOCK_SECONDS = BLOCK_SAMPLES / SAMPLE_RATE;

export interface PoseDoc {
  x: number;
  y: number;
  h: number;
}

export interface SourceView {
  armed: boolean;
  azimuth: number;
  distance: number;
  gain: number;
  inside: boolean;
  occluded: boolean;
  phase: string;
  playhead: number;
}

export interface StateMessage {
  type: "state";
  session: number;
  seed: number;
  t: number;
  mode: string;
  confidence: number;
  pose: PoseDoc;
  sources: Record<string, SourceView>;
  attractor: string | null;
  ambient_gain: number | null;
  clip_count: number;
}

export interface EventMessage {
  type: "event";
  t: number;
  kind: string;
  source_id?: string;
  tag?: string;
  payload?: Record<string, unknown>;
}

export interface MetersMessage {
  type: "meters";
  t: number;
  seq: number;
  virtual_rms: number;
  ambient_rms: number;
  clipped: number;
}

export interface ErrorMessage {
  type: "error";
  message: string;
}

export type ServerMessage = StateMessage | EventMessage | MetersMessage | ErrorMessage;

export interface ClipDoc {
  file: string;
  start?: number;
  end?: number;
}

export interface AnchorDoc {
  id: string;
  pos: [number, number];
  facing: number;
  max_range: number;
}

export interface OccluderDoc {
  a: [number, number];
  b: [number, number];
}

export interface SelectorDoc {
  dimension: string;
  boundaries: number[];
  clips: ClipDoc[];
  crossfade_width: number;
  interstitial?: { clip: ClipDoc; gain: number };
}

export type ContentDoc = { clip: ClipDoc } | { selector: SelectorDoc };

export interface SourceDoc {
  id: string;
  pos: [number, number];
  mode: string;
  tag: string;
  content: ContentDoc;
  gain: number;
  d_ref: number;
  d_cull: number;
  r_on: number;
  r_off: number;
  priority: number;
  attractor?: ClipDoc;
}

export interface SceneDoc {
  meta: { name: string; description: string; spawn?: PoseDoc };
  params: Record<string, number>;
  anchors: AnchorDoc[];
  occluders: OccluderDoc[];
  sources: SourceDoc[];
  ambient?: { clip: ClipDoc; gain: number } | null;
  sequences?: string[][];
}

const SERVER_TYPES = new Set(["state", "event", "meters", "error"]);

export function parseServerMessage(text: string): ServerMessage {
  const msg = JSON.parse(text) as { type?: unknown };
  if (msg === null || typeof msg !== "object" || typeof msg.type !== "string") {
    throw new Error("server message must be an object with a string 'type'");
  }
  if (!SERVER_TYPES.has(msg.type)) {
    throw new Error(`unknown server message type: ${msg.type}`);
  }
  return msg as ServerMessage;
}

export interface AudioFrame {
  seq: number;
  /** Interleaved L R, each sample in [-1, 1). */
  samples: Float32Array;
}

export function decodeAudioFrame(data: ArrayBuffer): AudioFrame {
  const view = new DataView(data);
  if (data.byteLength < 5 || view.getUint8(0) !== AUDIO_TAG) {
    throw new Error("not an audio frame");
  }
  const seq = view.getUint32(1, true);
  const payload = data.byteLength - 5;
  if (payload % 4 !== 0) {
    throw new Error(`audio payload is not whole stereo int16 frames: ${payload} bytes`);
  }
  const samples = new Float32Array(payload / 2);
  for (let i = 0; i < samples.length; i++) {
    samples[i] = view.getInt16(5 + 2 * i, true) / 32768;
  }
  return { seq, samples };
}

export function poseSetMessage(x: number, y: number, headingRad: number, t?: number): string {
  const msg: Record<string, unknown> = {
    type: "pose_set",
    x,
    y,
    h_deg: (headingRad * 180) / Math.PI,
  };
  if (t !== undefined) msg.t = t;
  return JSON.stringify(msg);
}

export interface SourceEdit {
  x?: number;
  y?: number;
  gain?: number;
  d_ref?: number;
  d_cull?: number;
  r_on?: number;
  r_off?: number;
  priority?: number;
}

export function editSourceMessage(id: string, edit: SourceEdit): string {
  return JSON.stringify({ type: "edit_source", id, ...edit });
}

export function setAmbientGainMessage(gain: number): string {
  return JSON.stringify({ type: "set_ambient_gain", gain });
}

export function snapshotRequestMessage(): string {
  return JSON.stringify({ type: "snapshot_request" });
}

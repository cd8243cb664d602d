import { describe, expect, it } from "vitest";

import {
  AUDIO_TAG,
  decodeAudioFrame,
  editSourceMessage,
  parseServerMessage,
  poseSetMessage,
  setAmbientGainMessage,
} from "../src/protocol.js";

function audioFrameBytes(seq: number, pcm: number[]): ArrayBuffer {
  const buf = new ArrayBuffer(5 + 2 * pcm.length);
  const view = new DataView(buf);
  view.setUint8(0, AUDIO_TAG);
  view.setUint32(1, seq, true);
  pcm.forEach((v, i) => view.setInt16(5 + 2 * i, v, true));
  return buf;
}

describe("decodeAudioFrame", () => {
  it("recovers sequence number and scaled samples", () => {
    const frame = decodeAudioFrame(
      audioFrameBytes(7, [0, 16384, -16384, 32767, -32768, 1, -1, 0]),
    );
    expect(frame.seq).toBe(7);
    expect(Array.from(frame.samples)).toEqual([
      0, 0.5, -0.5, 32767 / 32768, -1, 1 / 32768, -1 / 32768, 0,
    ]);
  });

  it("reads the sequence number little-endian", () => {
    const frame = decodeAudioFrame(audioFrameBytes(0x01020304, [0, 0]));
    expect(frame.seq).toBe(0x01020304);
  });

  it("rejects a wrong tag byte", () => {
    const buf = audioFrameBytes(0, [0, 0]);
    new DataView(buf).setUint8(0, 0x02);
    expect(() => decodeAudioFrame(buf)).toThrow(/not an audio frame/);
  });

  it("rejects payloads that are not whole stereo frames", () => {
    expect(() => decodeAudioFrame(audioFrameBytes(0, [1, 2, 3]))).toThrow(/stereo/);
  });

  it("rejects a truncated header", () => {
    expect(() => decodeAudioFrame(new ArrayBuffer(3))).toThrow(/not an audio frame/);
  });
});

describe("parseServerMessage", () => {
  it("accepts the four server message types", () => {
    for (const type of ["state", "event", "meters", "error"]) {
      expect(parseServerMessage(JSON.stringify({ type, t: 0 })).type).toBe(type);
    }
  });

  it("rejects unknown types and non-objects", () => {
    expect(() => parseServerMessage('{"type":"audio"}')).toThrow(/unknown/);
    expect(() => parseServerMessage("[1,2]")).toThrow(/object/);
    expect(() => parseServerMessage('{"t":1}')).toThrow(/type/);
    expect(() => parseServerMessage("nope")).toThrow();
  });
});

describe("client message builders", () => {
  it("pose_set carries the heading in degrees", () => {
    const msg = JSON.parse(poseSetMessage(1.5, -2, Math.PI / 2));
    expect(msg).toEqual({ type: "pose_set", x: 1.5, y: -2, h_deg: 90 });
  });

  it("pose_set includes a timestamp only when given", () => {
    expect("t" in JSON.parse(poseSetMessage(0, 0, 0))).toBe(false);
    expect(JSON.parse(poseSetMessage(0, 0, 0, 2.5)).t).toBe(2.5);
  });

  it("edit_source carries only the provided fields", () => {
    const msg = JSON.parse(editSourceMessage("radio", { x: 3, y: 4.5 }));
    expect(msg).toEqual({ type: "edit_source", id: "radio", x: 3, y: 4.5 });
    const gain = JSON.parse(editSourceMessage("radio", { gain: 0.4 }));
    expect(gain).toEqual({ type: "edit_source", id: "radio", gain: 0.4 });
  });

  it("set_ambient_gain is a bare gain", () => {
    expect(JSON.parse(setAmbientGainMessage(0.8))).toEqual({
      type: "set_ambient_gain",
      gain: 0.8,
    });
  });
});

import type { AudioFrame, ServerMessage, SourceEdit } from "./protocol.js";
import {
  decodeAudioFrame,
  editSourceMessage,
  parseServerMessage,
  poseSetMessage,
  setAmbientGainMessage,
  snapshotRequestMessage,
} from "./protocol.js";
import type { ConnectionStatus } from "./state.js";

/** The slice of WebSocket the client uses; tests substitute a fake. */
export interface SocketLike {
  binaryType: string;
  readyState: number;
  onopen: ((ev?: unknown) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  send(data: string): void;
  close(): void;
}

export interface ClientCallbacks {
  onMessage(msg: ServerMessage): void;
  onFrame(frame: AudioFrame): void;
  onStatus(status: ConnectionStatus): void;
  /** Malformed frame or JSON: the datum is dropped, playback continues. */
  onBadData(detail: string): void;
}

const OPEN = 1;
const RECONNECT_MS = 1000;

export class SessionClient {
  private ws: SocketLike | null = null;
  private closed = false;

  constructor(
    private readonly url: string,
    private readonly cb: ClientCallbacks,
    private readonly connectSocket: (url: string) => SocketLike = (u) =>
      new WebSocket(u) as unknown as SocketLike,
    private readonly scheduleReconnect: (fn: () => void, ms: number) => void = (fn, ms) => {
      setTimeout(fn, ms);
    },
  ) {}

  connect(): void {
    this.closed = false;
    this.cb.onStatus("connecting");
    const ws = this.connectSocket(this.url);
    ws.binaryType = "arraybuffer";
    ws.onopen = () => {
      this.cb.onStatus("open");
      // the server greets with a state message, but ask anyway so a
      // reconnect rebuilds the view even if the greeting raced the close
      ws.send(snapshotRequestMessage());
    };
    ws.onclose = () => {
      this.cb.onStatus("closed");
      this.ws = null;
      if (!this.closed) {
        this.scheduleReconnect(() => this.connect(), RECONNECT_MS);
      }
    };
    ws.onmessage = (ev) => this.dispatch(ev.data);
    this.ws = ws;
  }

  private dispatch(data: unknown): void {
    try {
      if (typeof data === "string") {
        this.cb.onMessage(parseServerMessage(data));
      } else if (data instanceof ArrayBuffer) {
        this.cb.onFrame(decodeAudioFrame(data));
      } else {
        throw new Error(`unexpected frame payload: ${Object.prototype.toString.call(data)}`);
      }
    } catch (err) {
      this.cb.onBadData(String(err));
    }
  }

  close(): void {
    this.closed = true;
    this.ws?.close();
  }

  get sendable(): boolean {
    return this.ws !== null && this.ws.readyState === OPEN;
  }

  sendPose(x: number, y: number, headingRad: number): void {
    this.send(poseSetMessage(x, y, headingRad));
  }

  sendSourceEdit(id: string, edit: SourceEdit): void {
    this.send(editSourceMessage(id, edit));
  }

  sendAmbientGain(gain: number): void {
    this.send(setAmbientGainMessage(gain));
  }

  requestSnapshot(): void {
    this.send(snapshotRequestMessage());
  }

  private send(text: string): void {
    if (this.sendable) this.ws!.send(text);
  }
}

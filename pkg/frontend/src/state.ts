import type {
  EventMessage,
  SceneDoc,
  ServerMessage,
  SourceView,
  StateMessage,
} from "./protocol.js";

export type ConnectionStatus = "connecting" | "open" | "closed";

export interface Listener {
  x: number;
  y: number;
  h: number;
}

export interface FeedEntry {
  t: number;
  kind: string;
  sourceId?: string;
  detail: string;
}

export interface Meters {
  virtualRms: number;
  ambientRms: number;
  clipped: number;
}

const FEED_CAP = 200;

/**
 * Everything the page renders, rebuilt purely from server messages. The
 * view never owns engine truth: drags and edits go out as messages and
 * the display follows whatever comes back, which is why a reconnect plus
 * one snapshot reproduces the whole view.
 */
export class ViewState {
  scene: SceneDoc | null = null;
  connection: ConnectionStatus = "connecting";

  session = 0;
  seed = 0;
  simTime = 0;
  mode = "EXTENDED";
  confidence = 0;
  listener: Listener = { x: 0, y: 0, h: 0 };
  sources: Record<string, SourceView> = {};
  attractor: string | null = null;
  ambientGain: number | null = null;
  clipCount = 0;

  selection: string | null = null;
  /** Local preview of an in-flight drag; cleared when the drag ends. */
  dragGhost: Listener | null = null;

  meters: Meters = { virtualRms: 0, ambientRms: 0, clipped: 0 };
  underruns = 0;

  feed: FeedEntry[] = [];

  private activeZones = new Set<string>();

  applyScene(doc: SceneDoc): void {
    this.scene = doc;
  }

  applyServer(msg: ServerMessage): void {
    switch (msg.type) {
      case "state":
        this.applyState(msg);
        break;
      case "event":
        this.applyEvent(msg);
        break;
      case "meters":
        this.meters = {
          virtualRms: msg.virtual_rms,
          ambientRms: msg.ambient_rms,
          clipped: msg.clipped,
        };
        break;
      case "error":
        this.pushFeed({ t: this.simTime, kind: "error", detail: msg.message });
        break;
    }
  }

  /** True while the listener is inside the source's trigger zone. */
  zoneActive(sourceId: string): boolean {
    return this.activeZones.has(sourceId);
  }

  private applyState(msg: StateMessage): void {
    this.session = msg.session;
    this.seed = msg.seed;
    this.simTime = msg.t;
    this.mode = msg.mode;
    this.confidence = msg.confidence;
    this.listener = { x: msg.pose.x, y: msg.pose.y, h: msg.pose.h };
    this.sources = msg.sources;
    this.attractor = msg.attractor;
    this.ambientGain = msg.ambient_gain;
    this.clipCount = msg.clip_count;
    // snapshots carry zone membership, so highlights survive a reconnect
    this.activeZones = new Set(
      Object.keys(msg.sources).filter((sid) => msg.sources[sid].inside),
    );
    if (this.selection !== null && !(this.selection in msg.sources)) {
      this.selection = null;
    }
  }

  private applyEvent(msg: EventMessage): void {
    if (msg.kind === "zone_enter" && msg.source_id !== undefined) {
      this.activeZones.add(msg.source_id);
    } else if (msg.kind === "zone_exit" && msg.source_id !== undefined) {
      this.activeZones.delete(msg.source_id);
    }
    this.pushFeed({
      t: msg.t,
      kind: msg.kind,
      sourceId: msg.source_id,
      detail: describeEvent(msg),
    });
  }

  pushFeed(entry: FeedEntry): void {
    this.feed.push(entry);
    if (this.feed.length > FEED_CAP) {
      this.feed.splice(0, this.feed.length - FEED_CAP);
    }
  }
}

function describeEvent(msg: EventMessage): string {
  const parts: string[] = [msg.kind];
  if (msg.source_id !== undefined) parts.push(msg.source_id);
  if (msg.tag !== undefined) parts.push(`[${msg.tag}]`);
  if (msg.payload !== undefined) {
    const bits = Object.entries(msg.payload)
      .map(([k, v]) => `${k}=${typeof v === "number" ? formatNum(v) : String(v)}`)
      .join(" ");
    if (bits) parts.push(bits);
  }
  return parts.join(" ");
}

function formatNum(v: number): string {
  return Number.isInteger(v) ? String(v) : v.toFixed(3);
}

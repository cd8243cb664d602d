import type { SceneDoc, SourceDoc } from "./protocol.js";
import type { ViewState } from "./state.js";

export interface Viewport {
  scale: number; // px per metre
  ox: number; // screen x of world origin
  oy: number; // screen y of world origin
}

export interface Bounds {
  minX: number;
  minY: number;
  maxX: number;
  maxY: number;
}

export function worldToScreen(vp: Viewport, x: number, y: number): [number, number] {
  return [vp.ox + x * vp.scale, vp.oy - y * vp.scale];
}

export function screenToWorld(vp: Viewport, sx: number, sy: number): [number, number] {
  return [(sx - vp.ox) / vp.scale, (vp.oy - sy) / vp.scale];
}

export function sceneBounds(doc: SceneDoc): Bounds {
  const xs: number[] = [];
  const ys: number[] = [];
  for (const o of doc.occluders) {
    xs.push(o.a[0], o.b[0]);
    ys.push(o.a[1], o.b[1]);
  }
  for (const a of doc.anchors) {
    xs.push(a.pos[0]);
    ys.push(a.pos[1]);
  }
  for (const s of doc.sources) {
    xs.push(s.pos[0] - s.r_off, s.pos[0] + s.r_off);
    ys.push(s.pos[1] - s.r_off, s.pos[1] + s.r_off);
  }
  if (doc.meta.spawn) {
    xs.push(doc.meta.spawn.x);
    ys.push(doc.meta.spawn.y);
  }
  if (xs.length === 0) {
    return { minX: -5, minY: -5, maxX: 5, maxY: 5 };
  }
  return {
    minX: Math.min(...xs),
    minY: Math.min(...ys),
    maxX: Math.max(...xs),
    maxY: Math.max(...ys),
  };
}

export function fitViewport(
  bounds: Bounds,
  widthPx: number,
  heightPx: number,
  marginPx = 24,
): Viewport {
  const bw = Math.max(bounds.maxX - bounds.minX, 1e-6);
  const bh = Math.max(bounds.maxY - bounds.minY, 1e-6);
  const scale = Math.min((widthPx - 2 * marginPx) / bw, (heightPx - 2 * marginPx) / bh);
  const cx = (bounds.minX + bounds.maxX) / 2;
  const cy = (bounds.minY + bounds.maxY) / 2;
  return {
    scale,
    ox: widthPx / 2 - cx * scale,
    oy: heightPx / 2 + cy * scale,
  };
}

export type Hit = { kind: "listener" } | { kind: "source"; id: string };

/** Listener wins ties so it stays draggable inside a source zone. */
export function hitTest(
  state: ViewState,
  wx: number,
  wy: number,
  tolWorld: number,
): Hit | null {
  const l = state.dragGhost ?? state.listener;
  if (Math.hypot(wx - l.x, wy - l.y) <= tolWorld) {
    return { kind: "listener" };
  }
  const doc = state.scene;
  if (doc === null) return null;
  let best: SourceDoc | null = null;
  let bestD = tolWorld;
  for (const s of doc.sources) {
    const d = Math.hypot(wx - s.pos[0], wy - s.pos[1]);
    if (d <= bestD) {
      best = s;
      bestD = d;
    }
  }
  return best === null ? null : { kind: "source", id: best.id };
}

export interface FloorplanOut {
  /** Already rate-limited by the caller; full pose in radians. */
  pose(x: number, y: number, h: number): void;
  /** Fired once, when a source drag is released. */
  editSource(id: string, x: number, y: number): void;
  select(id: string | null): void;
}

interface SourceGhost {
  id: string;
  x: number;
  y: number;
}

/**
 * Pointer/wheel/key handling over the floor plan, expressed in world
 * coordinates so it needs no DOM. Drags update local ghosts for instant
 * feedback and emit protocol messages; the authoritative positions still
 * come back through state/scene updates.
 */
export class FloorplanInput {
  sourceGhost: SourceGhost | null = null;

  private drag: "listener" | "source" | null = null;
  private grab = { dx: 0, dy: 0 };

  constructor(
    private readonly state: ViewState,
    private readonly out: FloorplanOut,
  ) {}

  pointerDown(wx: number, wy: number, tolWorld: number): void {
    const hit = hitTest(this.state, wx, wy, tolWorld);
    if (hit === null) {
      this.state.selection = null;
      this.out.select(null);
      return;
    }
    if (hit.kind === "listener") {
      this.drag = "listener";
      const l = this.state.listener;
      this.grab = { dx: l.x - wx, dy: l.y - wy };
      this.state.dragGhost = { ...l };
      return;
    }
    this.drag = "source";
    const src = this.state.scene?.sources.find((s) => s.id === hit.id);
    if (src === undefined) {
      this.drag = null;
      return;
    }
    this.grab = { dx: src.pos[0] - wx, dy: src.pos[1] - wy };
    this.sourceGhost = { id: src.id, x: src.pos[0], y: src.pos[1] };
    this.state.selection = src.id;
    this.out.select(src.id);
  }

  pointerMove(wx: number, wy: number): void {
    if (this.drag === "listener" && this.state.dragGhost !== null) {
      const g = this.state.dragGhost;
      g.x = wx + this.grab.dx;
      g.y = wy + this.grab.dy;
      this.out.pose(g.x, g.y, g.h);
    } else if (this.drag === "source" && this.sourceGhost !== null) {
      this.sourceGhost.x = wx + this.grab.dx;
      this.sourceGhost.y = wy + this.grab.dy;
    }
  }

  pointerUp(): void {
    if (this.drag === "listener" && this.state.dragGhost !== null) {
      const g = this.state.dragGhost;
      this.out.pose(g.x, g.y, g.h);
      this.state.dragGhost = null;
    } else if (this.drag === "source" && this.sourceGhost !== null) {
      this.out.editSource(this.sourceGhost.id, this.sourceGhost.x, this.sourceGhost.y);
      this.sourceGhost = null;
    }
    this.drag = null;
  }

  get dragging(): boolean {
    return this.drag !== null;
  }

  /** Scroll wheel and arrow keys rotate the listener in place. */
  rotate(deltaRad: number): void {
    const base = this.state.dragGhost ?? this.state.listener;
    const h = wrapAngle(base.h + deltaRad);
    if (this.state.dragGhost !== null) {
      this.state.dragGhost.h = h;
    }
    this.out.pose(base.x, base.y, h);
  }
}

function wrapAngle(a: number): number {
  let w = a % (2 * Math.PI);
  if (w <= -Math.PI) w += 2 * Math.PI;
  else if (w > Math.PI) w -= 2 * Math.PI;
  return w;
}

const COLORS = {
  bg: "#14161a",
  wall: "#8b93a3",
  anchor: "#d9a441",
  anchorTick: "#d9a44188",
  source: "#5ab0f0",
  sourceZone: "#5ab0f055",
  sourceZoneActive: "#57d98f",
  sourceZoneActiveFill: "#57d98f22",
  cull: "#ffffff14",
  listener: "#f05a78",
  label: "#c7cdd8",
  selection: "#ffffff",
  attractor: "#d957c9",
};

export function drawFloorplan(
  ctx: CanvasRenderingContext2D,
  state: ViewState,
  input: FloorplanInput,
  vp: Viewport,
  widthPx: number,
  heightPx: number,
): void {
  ctx.fillStyle = COLORS.bg;
  ctx.fillRect(0, 0, widthPx, heightPx);
  const doc = state.scene;
  if (doc === null) return;

  ctx.lineWidth = 3;
  ctx.strokeStyle = COLORS.wall;
  ctx.lineCap = "round";
  for (const o of doc.occluders) {
    const [ax, ay] = worldToScreen(vp, o.a[0], o.a[1]);
    const [bx, by] = worldToScreen(vp, o.b[0], o.b[1]);
    ctx.beginPath();
    ctx.moveTo(ax, ay);
    ctx.lineTo(bx, by);
    ctx.stroke();
  }

  for (const a of doc.anchors) {
    const [x, y] = worldToScreen(vp, a.pos[0], a.pos[1]);
    const facing = (a.facing * Math.PI) / 180;
    ctx.fillStyle = COLORS.anchor;
    ctx.fillRect(x - 4, y - 4, 8, 8);
    const tick = 0.6 * vp.scale;
    ctx.strokeStyle = COLORS.anchorTick;
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(x, y);
    ctx.lineTo(x + tick * Math.cos(facing), y - tick * Math.sin(facing));
    ctx.stroke();
    drawLabel(ctx, a.id, x + 6, y - 6);
  }

  for (const s of doc.sources) {
    const ghost = input.sourceGhost;
    const pos: [number, number] =
      ghost !== null && ghost.id === s.id ? [ghost.x, ghost.y] : s.pos;
    const [x, y] = worldToScreen(vp, pos[0], pos[1]);
    const active = state.zoneActive(s.id);

    circle(ctx, x, y, s.d_cull * vp.scale);
    ctx.strokeStyle = COLORS.cull;
    ctx.lineWidth = 1;
    ctx.stroke();

    circle(ctx, x, y, s.r_off * vp.scale);
    ctx.setLineDash([6, 6]);
    ctx.strokeStyle = active ? COLORS.sourceZoneActive : COLORS.sourceZone;
    ctx.lineWidth = 1.5;
    ctx.stroke();
    ctx.setLineDash([]);

    circle(ctx, x, y, s.r_on * vp.scale);
    if (active) {
      ctx.fillStyle = COLORS.sourceZoneActiveFill;
      ctx.fill();
    }
    ctx.strokeStyle = active ? COLORS.sourceZoneActive : COLORS.sourceZone;
    ctx.lineWidth = 2;
    ctx.stroke();

    circle(ctx, x, y, 6);
    ctx.fillStyle = active ? COLORS.sourceZoneActive : COLORS.source;
    ctx.fill();
    if (state.attractor === s.id) {
      circle(ctx, x, y, 11);
      ctx.strokeStyle = COLORS.attractor;
      ctx.lineWidth = 2;
      ctx.stroke();
    }
    if (state.selection === s.id) {
      circle(ctx, x, y, 9);
      ctx.strokeStyle = COLORS.selection;
      ctx.lineWidth = 1.5;
      ctx.stroke();
    }
    drawLabel(ctx, s.id, x + 9, y - 9);
  }

  const l = state.dragGhost ?? state.listener;
  const [lx, ly] = worldToScreen(vp, l.x, l.y);
  circle(ctx, lx, ly, 7);
  ctx.fillStyle = COLORS.listener;
  ctx.fill();
  const arrow = 0.8 * vp.scale;
  ctx.strokeStyle = COLORS.listener;
  ctx.lineWidth = 2.5;
  ctx.beginPath();
  ctx.moveTo(lx, ly);
  ctx.lineTo(lx + arrow * Math.cos(l.h), ly - arrow * Math.sin(l.h));
  ctx.stroke();
}

function circle(ctx: CanvasRenderingContext2D, x: number, y: number, r: number): void {
  ctx.beginPath();
  ctx.arc(x, y, Math.max(r, 0), 0, 2 * Math.PI);
}

function drawLabel(ctx: CanvasRenderingContext2D, text: string, x: number, y: number): void {
  ctx.fillStyle = COLORS.label;
  ctx.font = "11px system-ui, sans-serif";
  ctx.fillText(text, x, y);
}

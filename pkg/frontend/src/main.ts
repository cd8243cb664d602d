import { StreamPlayer } from "./audio.js";
import { SessionClient } from "./client.js";
import {
  drawFloorplan,
  fitViewport,
  FloorplanInput,
  sceneBounds,
  screenToWorld,
  type Viewport,
} from "./floorplan.js";
import type { SceneDoc } from "./protocol.js";
import { POSE_INTERVAL_MS, Throttle } from "./ratelimit.js";
import { ViewState } from "./state.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (el === null) throw new Error(`missing #${id}`);
  return el as T;
};

const canvas = $<HTMLCanvasElement>("plan");
const ctx = canvas.getContext("2d")!;
const banner = $<HTMLDivElement>("banner");
const feedEl = $<HTMLUListElement>("feed");
const consoleEl = $<HTMLUListElement>("console");
const audioBtn = $<HTMLButtonElement>("audio-btn");
const ambientSlider = $<HTMLInputElement>("ambient");

const state = new ViewState();
let player: StreamPlayer | null = null;
let vp: Viewport | null = null;

const wsUrl = `${location.protocol === "https:" ? "wss" : "ws"}://${location.host}/ws`;

const client = new SessionClient(wsUrl, {
  onMessage: (msg) => {
    state.applyServer(msg);
    if (msg.type === "error") logConsole(msg.message);
  },
  onFrame: (frame) => {
    player?.push(frame);
    if (player !== null) state.underruns = player.underruns;
  },
  onStatus: (status) => {
    state.connection = status;
    banner.hidden = status === "open";
    banner.textContent = status === "connecting" ? "connecting..." : "disconnected, retrying";
    setInputsEnabled(status === "open");
    if (status === "open") void refreshScene();
  },
  onBadData: (detail) => logConsole(detail),
});

async function refreshScene(): Promise<void> {
  try {
    const res = await fetch("/scene");
    if (!res.ok) throw new Error(`GET /scene: ${res.status}`);
    const doc = (await res.json()) as SceneDoc;
    state.applyScene(doc);
    vp = fitViewport(sceneBounds(doc), canvas.width, canvas.height);
    if (doc.ambient != null) ambientSlider.value = String(doc.ambient.gain);
  } catch (err) {
    logConsole(String(err));
  }
}

const poseOut = new Throttle<[number, number, number]>(
  ([x, y, h]) => client.sendPose(x, y, h),
  POSE_INTERVAL_MS,
);

const input = new FloorplanInput(state, {
  pose: (x, y, h) => poseOut.update([x, y, h]),
  editSource: (id, x, y) => {
    client.sendSourceEdit(id, { x, y });
    // re-read the document so the mirror shows what the server accepted
    void refreshScene();
  },
  select: () => undefined,
});

function setInputsEnabled(on: boolean): void {
  canvas.style.pointerEvents = on ? "auto" : "none";
  ambientSlider.disabled = !on;
}

function canvasWorld(ev: PointerEvent): [number, number] {
  const rect = canvas.getBoundingClientRect();
  const sx = ((ev.clientX - rect.left) / rect.width) * canvas.width;
  const sy = ((ev.clientY - rect.top) / rect.height) * canvas.height;
  return vp === null ? [0, 0] : screenToWorld(vp, sx, sy);
}

canvas.addEventListener("pointerdown", (ev) => {
  if (vp === null) return;
  canvas.setPointerCapture(ev.pointerId);
  const [wx, wy] = canvasWorld(ev);
  input.pointerDown(wx, wy, 12 / vp.scale);
});
canvas.addEventListener("pointermove", (ev) => {
  if (!input.dragging) return;
  const [wx, wy] = canvasWorld(ev);
  input.pointerMove(wx, wy);
});
canvas.addEventListener("pointerup", (ev) => {
  canvas.releasePointerCapture(ev.pointerId);
  input.pointerUp();
  poseOut.flush();
});
canvas.addEventListener("wheel", (ev) => {
  ev.preventDefault();
  input.rotate(ev.deltaY > 0 ? -0.1 : 0.1);
});
document.addEventListener("keydown", (ev) => {
  if (ev.key === "ArrowLeft") input.rotate(Math.PI / 36);
  else if (ev.key === "ArrowRight") input.rotate(-Math.PI / 36);
});

ambientSlider.addEventListener("change", () => {
  client.sendAmbientGain(Number(ambientSlider.value));
});

audioBtn.addEventListener("click", () => {
  if (player !== null) return;
  const ctx = new AudioContext({ sampleRate: 48000 });
  player = new StreamPlayer(ctx);
  setInterval(() => player?.pump(), 10);
  audioBtn.disabled = true;
  audioBtn.textContent = "audio on";
});

function logConsole(text: string): void {
  const li = document.createElement("li");
  li.textContent = text;
  consoleEl.prepend(li);
  while (consoleEl.children.length > 50) consoleEl.lastChild?.remove();
}

function fmt(v: number, digits = 2): string {
  return v.toFixed(digits);
}

function renderPanel(): void {
  $("status").textContent = `${state.connection} | session ${state.session} seed ${state.seed}`;
  $("mode").textContent = `${state.mode} conf ${fmt(state.confidence)} t ${fmt(state.simTime, 1)}s`;
  $("pose-ro").textContent =
    `x ${fmt(state.listener.x)} y ${fmt(state.listener.y)} ` +
    `h ${fmt((state.listener.h * 180) / Math.PI, 0)}deg`;
  const v = Math.min(state.meters.virtualRms, 1);
  const a = Math.min(state.meters.ambientRms, 1);
  $("meter-virtual").style.width = `${(v * 100).toFixed(0)}%`;
  $("meter-ambient").style.width = `${(a * 100).toFixed(0)}%`;
  $("meter-text").textContent =
    `virtual ${fmt(state.meters.virtualRms, 3)} ambient ${fmt(state.meters.ambientRms, 3)} ` +
    `clipped ${state.meters.clipped} underruns ${state.underruns}`;

  const zones = Object.keys(state.sources).filter((sid) => state.zoneActive(sid));
  $("zones").textContent = zones.length > 0 ? zones.join(", ") : "none";

  feedEl.replaceChildren(
    ...state.feed
      .slice(-30)
      .reverse()
      .map((e) => {
        const li = document.createElement("li");
        li.textContent = `${e.t.toFixed(2)}s ${e.detail}`;
        li.dataset.kind = e.kind;
        return li;
      }),
  );
}

function frame(): void {
  if (vp !== null) drawFloorplan(ctx, state, input, vp, canvas.width, canvas.height);
  renderPanel();
  requestAnimationFrame(frame);
}

client.connect();
requestAnimationFrame(frame);

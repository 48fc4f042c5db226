// Browser glue: socket lifecycle, canvas playback, input wiring, HUD/minimap
// drawing. All session state flows through the pure reducer in state.ts.

import { decodeF32Frames, encodeClientMessage, parseServerMessage, ChunkMessage } from "./protocol.js";
import { applyServerMessage, initialState, ClientState } from "./state.js";
import { CommandScheduler } from "./keymap.js";
import { layoutMinimap } from "./minimap.js";
import { hudLines, coverageFraction } from "./hud.js";
import { toneMapToRgba } from "./render.js";

const CHUNK_INTERVAL_MS = 400;
const MINIMAP_SIZE = 140;

export interface ConnectOptions {
  url: string;
  episodeId?: string;
  sceneSeed?: number;
  canvas: HTMLCanvasElement;
  hud: HTMLElement;
  minimap: HTMLCanvasElement;
  banner: HTMLElement;
}

export class RoamClient {
  state: ClientState = initialState();
  private ws: WebSocket | null = null;
  private scheduler = new CommandScheduler(CHUNK_INTERVAL_MS);
  private frameQueue: ImageData[] = [];
  private timer: number | null = null;

  constructor(private opts: ConnectOptions) {}

  connect(): void {
    this.state = { ...initialState(), status: "connecting" };
    this.showBanner("connecting…", false);
    const ws = new WebSocket(this.opts.url);
    this.ws = ws;
    ws.onopen = () => {
      ws.send(encodeClientMessage({
        type: "hello",
        episode_id: this.opts.episodeId,
        scene_seed: this.opts.sceneSeed,
      }));
    };
    ws.onmessage = (event) => this.onMessage(String(event.data));
    ws.onclose = () => {
      this.state = { ...this.state, status: "closed" };
      this.showBanner("disconnected — press R to reconnect", true);
      this.stopLoop();
    };
    ws.onerror = () => {
      this.state = { ...this.state, status: "error" };
      this.showBanner("connection failed — press R to retry", true);
    };
    window.addEventListener("keydown", this.onKey);
  }

  private onKey = (event: KeyboardEvent) => {
    if (event.key.toLowerCase() === "r" && this.state.status !== "ready") {
      this.connect();
      return;
    }
    const cmd = this.scheduler.keyEvent(event.key, performance.now(), event.repeat);
    if (cmd !== null && this.ws !== null && this.state.status === "ready") {
      this.ws.send(encodeClientMessage(cmd));
      event.preventDefault();
    }
  };

  private onMessage(raw: string): void {
    const msg = parseServerMessage(raw);
    const { state, displayChunk } = applyServerMessage(this.state, msg);
    this.state = state;
    if (msg.type === "ready") {
      this.opts.canvas.width = state.width;
      this.opts.canvas.height = state.height;
      this.showBanner("", false);
      this.startLoop();
    } else if (msg.type === "error") {
      this.showBanner(state.lastError ?? "error", true);
    }
    if (displayChunk !== null) {
      this.enqueueFrames(displayChunk);
    }
    this.drawHud();
  }

  private enqueueFrames(chunk: ChunkMessage): void {
    const { width, height, chunkLen, encoding } = this.state;
    if (encoding === "f32" && typeof chunk.frames === "string") {
      for (const frame of decodeF32Frames(chunk.frames, chunkLen, width, height)) {
        this.frameQueue.push(new ImageData(toneMapToRgba(frame, width, height),
                                           width, height));
      }
    } else if (encoding === "png" && Array.isArray(chunk.frames)) {
      for (const b64 of chunk.frames) {
        const img = new Image();
        img.onload = () => {
          const ctx = this.opts.canvas.getContext("2d")!;
          ctx.drawImage(img, 0, 0);
        };
        img.src = `data:image/png;base64,${b64}`;
      }
    }
  }

  private startLoop(): void {
    this.stopLoop();
    const frameMs = CHUNK_INTERVAL_MS / Math.max(this.state.chunkLen, 1);
    this.timer = window.setInterval(() => {
      const idle = this.scheduler.idleTick(performance.now());
      if (idle !== null && this.ws !== null && this.state.status === "ready") {
        this.ws.send(encodeClientMessage(idle));
      }
      const frame = this.frameQueue.shift();
      if (frame !== undefined) {
        this.opts.canvas.getContext("2d")!.putImageData(frame, 0, 0);
      }
    }, frameMs);
  }

  private stopLoop(): void {
    if (this.timer !== null) {
      window.clearInterval(this.timer);
      this.timer = null;
    }
  }

  private showBanner(text: string, visible: boolean): void {
    this.opts.banner.textContent = text;
    this.opts.banner.style.display = visible || text ? "block" : "none";
  }

  downloadTrajectory(): string {
    return JSON.stringify(this.state.trajectory, null, 1);
  }

  private drawHud(): void {
    this.opts.hud.textContent = hudLines(this.state).join("   ");
    const bar = document.getElementById("coverage-bar");
    if (bar !== null) {
      bar.style.width = `${coverageFraction(this.state) * 100}%`;
    }
    const ctx = this.opts.minimap.getContext("2d");
    if (ctx === null) return;
    ctx.clearRect(0, 0, MINIMAP_SIZE, MINIMAP_SIZE);
    ctx.strokeStyle = "#4caf50";
    ctx.fillStyle = "#4caf50";
    const layout = layoutMinimap(this.state.trajectory, MINIMAP_SIZE);
    if (layout.points.length === 0) return;
    ctx.beginPath();
    layout.points.forEach((p, i) => i === 0 ? ctx.moveTo(p.x, p.y) : ctx.lineTo(p.x, p.y));
    ctx.stroke();
    const head = layout.points[layout.points.length - 1];
    ctx.beginPath();
    ctx.arc(head.x, head.y, 3, 0, 2 * Math.PI);
    ctx.fill();
  }
}

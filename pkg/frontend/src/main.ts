import { RoamClient } from "./client.js";

const params = new URLSearchParams(window.location.search);
const server = params.get("server") ?? "ws://127.0.0.1:8765";
const episodeId = params.get("episode") ?? undefined;
const sceneSeedRaw = params.get("scene_seed");
const sceneSeed = sceneSeedRaw !== null ? Number(sceneSeedRaw)
  : (episodeId === undefined ? 0 : undefined);

const client = new RoamClient({
  url: server,
  episodeId,
  sceneSeed,
  canvas: document.getElementById("view") as HTMLCanvasElement,
  hud: document.getElementById("hud")!,
  minimap: document.getElementById("minimap") as HTMLCanvasElement,
  banner: document.getElementById("banner")!,
});
client.connect();

document.getElementById("download")!.addEventListener("click", () => {
  const blob = new Blob([client.downloadTrajectory()], { type: "application/json" });
  const a = document.createElement("a");
  a.href = URL.createObjectURL(blob);
  a.download = "trajectory.json";
  a.click();
});

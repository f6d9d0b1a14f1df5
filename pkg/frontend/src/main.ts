/**
 * Page wiring: one canvas, one websocket, one keyboard. Everything
 * serializes through the ViewState store; the render loop only reads.
 */

import { TeleopClient } from "./client.js";
import { KeyboardSource } from "./keyboard.js";
import { SNAPSHOT_HZ } from "./protocol.js";
import { buildScene, drawScene } from "./renderer.js";
import { OverlayToggles, ViewState } from "./state.js";

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const ctx = canvas.getContext("2d");
if (ctx === null) {
  throw new Error("2D canvas is unavailable");
}
const context = ctx;

const urlInput = document.getElementById("url") as HTMLInputElement;
const connectButton = document.getElementById("connect") as HTMLButtonElement;
const statusLabel = document.getElementById("status") as HTMLSpanElement;

const view = new ViewState();
const keyboard = new KeyboardSource();

const client = new TeleopClient(
  (url) => new WebSocket(url),
  {
    onSnapshot: (snapshot) => view.applySnapshot(snapshot),
    onStatus: (status) => {
      if (status === "connecting") view.markConnecting();
      if (status === "disconnected") view.markDisconnected();
      statusLabel.textContent = status;
    },
    onServerError: (reason) => view.recordError(reason),
  },
);

connectButton.addEventListener("click", () => {
  client.connect(urlInput.value);
});

for (const name of ["skeleton", "detections", "fov", "trails"] as const) {
  const box = document.getElementById(`overlay-${name}`) as HTMLInputElement;
  box.checked = view.overlays[name as keyof OverlayToggles];
  box.addEventListener("change", () => {
    view.overlays[name as keyof OverlayToggles] = box.checked;
  });
}

window.addEventListener("keydown", (event) => {
  if (document.activeElement === urlInput) return;
  keyboard.keyDown(event.code);
  if (event.code === "Space") event.preventDefault();
});
window.addEventListener("keyup", (event) => {
  keyboard.keyUp(event.code);
});
window.addEventListener("blur", () => {
  keyboard.releaseAll();
});

// command cadence: one slot per snapshot period, quiet when idle
setInterval(() => {
  const cmd = keyboard.nextCommand();
  if (cmd !== null) {
    client.sendCommand(cmd);
  }
}, 1000 / SNAPSHOT_HZ);

function frame(): void {
  const items = buildScene(view, canvas.width, canvas.height);
  drawScene(context, items, canvas.width, canvas.height);
  requestAnimationFrame(frame);
}
requestAnimationFrame(frame);

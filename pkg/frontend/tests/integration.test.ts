/**
 * Round trip against the real bridge: spawn the python server, speak
 * the protocol with the client's own serializers, and check that a
 * steering command shows up as visible motion within two snapshot
 * periods. Needs python3 with the simulator package installed.
 */

import { ChildProcess, spawn } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import WebSocket from "ws";

import { buildInputMessage, subscribeMessage } from "../src/protocol.js";
import type { Snapshot } from "../src/protocol.js";
import { parseServerMessage } from "../src/protocol.js";
import { buildScene, PolyItem } from "../src/renderer.js";
import { ViewState } from "../src/state.js";

const SNAPSHOT_PERIOD_MS = 50;

let server: ChildProcess | null = null;
let port = 0;

function startServer(): Promise<number> {
  return new Promise((resolve, reject) => {
    const child = spawn(
      "python3",
      ["-m", "vruloop.cli", "serve", "--scenario", "1", "--port", "0"],
      { stdio: ["ignore", "pipe", "pipe"] },
    );
    server = child;
    let out = "";
    const timer = setTimeout(
      () => reject(new Error(`server never came up; output: ${out}`)),
      15000,
    );
    child.stdout?.on("data", (chunk: Buffer) => {
      out += chunk.toString();
      const match = out.match(/serving ws:\/\/127\.0\.0\.1:(\d+)/);
      if (match !== null) {
        clearTimeout(timer);
        resolve(Number(match[1]));
      }
    });
    child.stderr?.on("data", (chunk: Buffer) => {
      out += chunk.toString();
    });
    child.on("exit", (code) => {
      clearTimeout(timer);
      reject(new Error(`server exited early (${code}); output: ${out}`));
    });
  });
}

class SnapshotStream {
  private queue: Snapshot[] = [];
  private waiter: ((s: Snapshot) => void) | null = null;

  constructor(private socket: WebSocket) {
    socket.on("message", (data) => {
      const message = parseServerMessage(data.toString());
      if (message.type !== "snapshot") return;
      if (this.waiter !== null) {
        const resolve = this.waiter;
        this.waiter = null;
        resolve(message);
      } else {
        this.queue.push(message);
      }
    });
  }

  next(timeoutMs = 2000): Promise<Snapshot> {
    const queued = this.queue.shift();
    if (queued !== undefined) return Promise.resolve(queued);
    return new Promise((resolve, reject) => {
      const timer = setTimeout(
        () => reject(new Error("no snapshot within the deadline")),
        timeoutMs,
      );
      this.waiter = (s) => {
        clearTimeout(timer);
        resolve(s);
      };
    });
  }
}

function connect(): Promise<{ socket: WebSocket; stream: SnapshotStream }> {
  return new Promise((resolve, reject) => {
    const socket = new WebSocket(`ws://127.0.0.1:${port}`);
    const stream = new SnapshotStream(socket);
    socket.once("message", () => {
      // the hello; the stream ignores it, we subscribe on its heels
      socket.send(subscribeMessage());
      resolve({ socket, stream });
    });
    socket.once("error", reject);
  });
}

beforeAll(async () => {
  port = await startServer();
}, 20000);

afterAll(() => {
  server?.removeAllListeners("exit");
  server?.kill("SIGTERM");
});

describe("bridge round trip", () => {
  it(
    "a steering command turns into visible motion within 2 snapshots",
    { timeout: 20000 },
    async () => {
      const { socket, stream } = await connect();
      try {
        const before = await stream.next();
        const yaw0 = before.vru.yaw;

        socket.send(
          buildInputMessage(
            { heading_delta: 1.0, speed_target: 0, gesture: false },
            1,
          ),
        );
        const sentAt = before.tick;

        let turned: Snapshot | null = null;
        for (let i = 0; i < 10; i += 1) {
          const snap = await stream.next();
          if (snap.vru.yaw !== yaw0) {
            turned = snap;
            break;
          }
        }
        expect(turned).not.toBeNull();
        // command latency: within two snapshot periods of the send
        expect((turned as Snapshot).tick - sentAt).toBeLessThanOrEqual(2);

        // and the turn is visible: the truth heading line moves on screen
        const view = new ViewState();
        view.applySnapshot(before);
        const lineBefore = buildScene(view, 960, 600).find(
          (item) => item.tag === "truth-heading",
        ) as PolyItem;
        view.applySnapshot(turned as Snapshot);
        const lineAfter = buildScene(view, 960, 600).find(
          (item) => item.tag === "truth-heading",
        ) as PolyItem;
        expect(lineAfter.points[1]).not.toEqual(lineBefore.points[1]);
      } finally {
        socket.close();
      }
    },
  );

  it(
    "a duplicate client_seq is applied exactly once",
    { timeout: 20000 },
    async () => {
      const { socket, stream } = await connect();
      try {
        // drive a turn, then counter it, then retransmit the stale turn
        socket.send(
          buildInputMessage(
            { heading_delta: 1.0, speed_target: 0, gesture: false },
            1,
          ),
        );
        await stream.next();
        await stream.next();
        socket.send(
          buildInputMessage(
            { heading_delta: 0, speed_target: 0, gesture: false },
            2,
          ),
        );
        await stream.next();
        await stream.next();
        socket.send(
          buildInputMessage(
            { heading_delta: 1.0, speed_target: 0, gesture: false },
            1, // stale retransmit, must be dropped
          ),
        );
        await stream.next();
        const settled = await stream.next();
        const yaw = settled.vru.yaw;
        for (let i = 0; i < 4; i += 1) {
          const snap = await stream.next();
          expect(snap.vru.yaw).toBe(yaw);
        }
      } finally {
        socket.close();
      }
    },
  );
});

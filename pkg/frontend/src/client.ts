/**
 * Websocket client for the teleop bridge. Owns the handshake, the
 * client_seq counter, and the 20 Hz send cadence; everything it hears
 * is funneled into callbacks so the state store stays the single place
 * that mutates view state.
 *
 * The socket constructor is injectable: the browser passes the global
 * WebSocket, node tests pass the `ws` package.
 */

import {
  InputCommand,
  SCHEMA_VERSION,
  Snapshot,
  buildInputMessage,
  parseServerMessage,
  subscribeMessage,
} from "./protocol.js";

/** The subset of the WebSocket API the client uses. */
export interface SocketLike {
  send(data: string): void;
  close(code?: number, reason?: string): void;
  addEventListener(type: "open" | "close", listener: () => void): void;
  addEventListener(
    type: "message",
    listener: (event: { data: unknown }) => void,
  ): void;
  addEventListener(type: "error", listener: () => void): void;
}

export type SocketFactory = (url: string) => SocketLike;

export interface ClientHandlers {
  onSnapshot: (snapshot: Snapshot) => void;
  onStatus: (status: "connecting" | "live" | "disconnected") => void;
  onServerError: (reason: string) => void;
}

export class TeleopClient {
  private socket: SocketLike | null = null;
  private seq = 0;
  private helloSeen = false;

  constructor(
    private factory: SocketFactory,
    private handlers: ClientHandlers,
  ) {}

  connect(url: string): void {
    this.close();
    this.helloSeen = false;
    this.seq = 0; // server-side dedupe is per connection
    this.handlers.onStatus("connecting");
    const socket = this.factory(url);
    this.socket = socket;
    socket.addEventListener("message", (event) => {
      this.onFrame(String(event.data));
    });
    socket.addEventListener("close", () => {
      if (this.socket === socket) {
        this.socket = null;
        this.handlers.onStatus("disconnected");
      }
    });
    socket.addEventListener("error", () => {
      // the close event follows; nothing to do here
    });
  }

  private onFrame(text: string): void {
    let message;
    try {
      message = parseServerMessage(text);
    } catch (err) {
      this.handlers.onServerError(String(err instanceof Error ? err.message : err));
      return;
    }
    switch (message.type) {
      case "hello":
        if (message.schema_version !== SCHEMA_VERSION) {
          this.handlers.onServerError(
            `server speaks schema ${message.schema_version}, client needs ${SCHEMA_VERSION}`,
          );
          this.close();
          return;
        }
        this.helloSeen = true;
        this.socket?.send(subscribeMessage());
        this.handlers.onStatus("live");
        break;
      case "error":
        this.handlers.onServerError(message.reason);
        break;
      case "snapshot":
        this.handlers.onSnapshot(message);
        break;
    }
  }

  /** Send one command with the next client_seq. No-op before hello. */
  sendCommand(cmd: InputCommand): boolean {
    if (this.socket === null || !this.helloSeen) {
      return false;
    }
    this.seq += 1;
    this.socket.send(buildInputMessage(cmd, this.seq));
    return true;
  }

  sendRaw(text: string): boolean {
    if (this.socket === null) return false;
    this.socket.send(text);
    return true;
  }

  connected(): boolean {
    return this.socket !== null && this.helloSeen;
  }

  close(): void {
    const socket = this.socket;
    this.socket = null;
    socket?.close(1000, "client closed");
  }
}

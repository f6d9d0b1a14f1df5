/**
 * Client-side view state. Holds the latest snapshot verbatim plus
 * derived presentation state (trails, counters). Physics is never
 * extrapolated here: between snapshots the scene is frozen.
 */

import { Snapshot } from "./protocol.js";

export type ConnectionStatus = "idle" | "connecting" | "live" | "disconnected";

export interface OverlayToggles {
  skeleton: boolean;
  detections: boolean;
  fov: boolean;
  trails: boolean;
}

export const DEFAULT_OVERLAYS: OverlayToggles = {
  skeleton: true,
  detections: true,
  fov: true,
  trails: true,
};

const TRAIL_LIMIT = 600; // points, 30 s at 20 Hz
const SITE_GRID = 1.0; // m, cells for clustering false-positive sites
const SITE_MIN_HITS = 3; // repeated ghosts before a site is drawn
const SITE_LIMIT = 32;

/** A spot that keeps producing false positives, i.e. where a cone is. */
export interface FalseSite {
  x: number;
  y: number;
  hits: number;
}

export class ViewState {
  latest: Snapshot | null = null;
  status: ConnectionStatus = "idle";
  lastError: string | null = null;
  overlays: OverlayToggles = { ...DEFAULT_OVERLAYS };
  vehicleTrail: Array<[number, number]> = [];
  vruTrail: Array<[number, number]> = [];
  private sites = new Map<string, FalseSite>();

  applySnapshot(snapshot: Snapshot): void {
    if (this.latest !== null && snapshot.tick <= this.latest.tick) {
      // an episode reset restarts tick numbering; stale trails would
      // draw a jump across the teleport, so start them over
      this.vehicleTrail = [];
      this.vruTrail = [];
      this.sites.clear();
    }
    this.latest = snapshot;
    this.status = "live";
    this.vehicleTrail.push([snapshot.vehicle.x, snapshot.vehicle.y]);
    this.vruTrail.push([snapshot.vru.x, snapshot.vru.y]);
    if (this.vehicleTrail.length > TRAIL_LIMIT) this.vehicleTrail.shift();
    if (this.vruTrail.length > TRAIL_LIMIT) this.vruTrail.shift();
    this.recordFalseSites(snapshot);
  }

  /**
   * The wire carries no scenery, only detections; a cone shows up as a
   * spot that keeps emitting false positives. Cluster those on a 1 m
   * grid so the overlay can mark where the distractor must be.
   */
  private recordFalseSites(snapshot: Snapshot): void {
    const { x, y, yaw } = snapshot.vehicle;
    const c = Math.cos(yaw);
    const s = Math.sin(yaw);
    for (const det of snapshot.detections) {
      if (det.source !== "false_positive") continue;
      const wx = x + c * det.hip[0] - s * det.hip[1];
      const wy = y + s * det.hip[0] + c * det.hip[1];
      const key = `${Math.round(wx / SITE_GRID)}:${Math.round(wy / SITE_GRID)}`;
      const site = this.sites.get(key);
      if (site !== undefined) {
        // running mean keeps the glyph centered as ghosts jitter
        site.x += (wx - site.x) / (site.hits + 1);
        site.y += (wy - site.y) / (site.hits + 1);
        site.hits += 1;
      } else if (this.sites.size < SITE_LIMIT) {
        this.sites.set(key, { x: wx, y: wy, hits: 1 });
      }
    }
  }

  falseSites(): FalseSite[] {
    return [...this.sites.values()].filter((s) => s.hits >= SITE_MIN_HITS);
  }

  markConnecting(): void {
    this.status = "connecting";
    this.lastError = null;
  }

  /** Connection dropped: keep the last frame, flag the banner. */
  markDisconnected(): void {
    if (this.status !== "idle") {
      this.status = "disconnected";
    }
  }

  recordError(reason: string): void {
    this.lastError = reason;
  }
}

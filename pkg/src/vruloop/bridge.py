"""Socket service exposing a live closed-loop session to teleop clients.

The simulation loop is the single writer of simulation state. Network
handlers only submit the latest input command into a mailbox; the loop
reads the current intent at the start of each tick, so a command sent
after snapshot ``t`` is reflected in snapshot ``t+1``. Snapshots fan out
to subscribers from per-client queues off the stepping coroutine.

Wire protocol (JSON text messages, each at most 16 KiB):

- server -> client on connect: ``{"type": "hello", "schema_version": 1}``
- client -> server: ``{"type": "subscribe"}``,
  ``{"type": "reset", "scenario": {...}}``, and input commands
  ``{"type": "input", "heading_delta": rad/s, "speed_target": m/s,
  "gesture": bool, "client_seq": int}``
- server -> client: snapshots (see ``LiveSession.snapshot_dict``) and
  ``{"type": "error", "reason": str}`` replies that keep the connection
  open.

Commands are deduplicated per connection by ``client_seq``: a sequence
number at or below the last accepted one is dropped, so retransmissions
apply once. The latest accepted command is the current intent and keeps
driving the subject until replaced. With no input the subject stands
still.

An explicit ``reset`` starts a fresh episode; tick numbering restarts at
zero for every subscriber, which is the one documented exception to the
strictly-increasing tick rule.
"""

from __future__ import annotations

import asyncio
import json
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from websockets.asyncio.server import ServerConnection, serve as ws_serve
from websockets.exceptions import ConnectionClosed

from .harness import (
    FrameRecord,
    RunLog,
    ScenarioConfig,
    scenario_from_dict,
    scenario_to_dict,
    step_tick,
    write_log,
)
from .metrics import smooth_series
from .motion import (
    ArmGesture,
    GaitParams,
    compose_root,
    cyclist_local_joints,
    path_pose,
    pedestrian_local_joints,
)
from .skeleton import Joint, Pose2D, SkeletonFrame

SCHEMA_VERSION = 1
MAX_MESSAGE_BYTES = 16 * 1024
HEADING_RATE_LIMIT = 2.0  # rad/s
SPEED_TARGET_MAX = 3.0  # m/s
SNAPSHOT_QUEUE_LIMIT = 64
_VARIABILITY_WINDOW = 60  # ticks of hip-distance history for the live readout

_LIVE_RAISE = ArmGesture(0.0, math.inf, "left", "raise")


@dataclass(frozen=True)
class TeleopInput:
    """Current steering intent for the subject."""

    heading_delta: float = 0.0
    speed_target: float = 0.0
    gesture: bool = False


IDLE_INPUT = TeleopInput()


def parse_input(msg: dict) -> tuple[TeleopInput, int]:
    """Validate an input message and return (command, client_seq).

    Raises ValueError with a human-readable reason on any violation.
    """
    try:
        heading = float(msg["heading_delta"])
        speed = float(msg["speed_target"])
        gesture = msg["gesture"]
        seq = msg["client_seq"]
    except KeyError as exc:
        raise ValueError(f"input is missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError):
        raise ValueError("input fields must be numeric") from None
    if not isinstance(gesture, bool):
        raise ValueError("gesture must be a boolean")
    if not isinstance(seq, int) or isinstance(seq, bool):
        raise ValueError("client_seq must be an integer")
    if not math.isfinite(heading) or abs(heading) > HEADING_RATE_LIMIT:
        raise ValueError(
            f"heading_delta must be within +-{HEADING_RATE_LIMIT} rad/s"
        )
    if not math.isfinite(speed) or not 0.0 <= speed <= SPEED_TARGET_MAX:
        raise ValueError(f"speed_target must be within [0, {SPEED_TARGET_MAX}] m/s")
    return TeleopInput(heading, speed, gesture), seq


class LiveSession:
    """One keyboard-driven episode of the closed loop.

    The subject's root pose integrates the latest accepted TeleopInput
    instead of following the scenario path; everything downstream of the
    pose (sensing, control, logging) is the same tick code the offline
    runner uses. Applied inputs are recorded with the tick they first
    affect, so a finished episode can be reproduced exactly with
    run_live_schedule.
    """

    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        self.tick = 0
        self.n_ticks = round(cfg.duration / cfg.dt)
        self.frames: list[FrameRecord] = []
        self.input_history: list[tuple[int, TeleopInput]] = []
        self._rng = np.random.default_rng(cfg.seed)
        self._vehicle = cfg.vehicle
        self._tff = cfg.tff
        self._root = path_pose(cfg.path, 0.0)
        self._phase = 0.0
        self._intent = IDLE_INPUT
        self._last_seq: dict[object, int] = {}
        self._hip_t: list[float] = []
        self._hip_d: list[float] = []
        self._no_detects = 0
        self._false_detects = 0
        self._variability = 0.0

    @property
    def done(self) -> bool:
        return self.tick >= self.n_ticks

    def submit(self, cmd: TeleopInput, client_seq: int, client: object = "local") -> bool:
        """Replace the current intent; duplicates apply once.

        Returns False when the sequence number was already used by this
        client (retransmission or stale reordering) and the command was
        dropped.
        """
        last = self._last_seq.get(client)
        if last is not None and client_seq <= last:
            return False
        self._last_seq[client] = client_seq
        self._intent = cmd
        self.input_history.append((self.tick, cmd))
        return True

    def _pose_subject(self, t: float) -> tuple[SkeletonFrame, Pose2D]:
        cmd = self._intent
        dt = self.cfg.dt
        speed = min(max(cmd.speed_target, 0.0), SPEED_TARGET_MAX)
        yaw = self._root.yaw + cmd.heading_delta * dt
        yaw = math.atan2(math.sin(yaw), math.cos(yaw))
        self._root = Pose2D(
            self._root.x + speed * math.cos(yaw) * dt,
            self._root.y + speed * math.sin(yaw) * dt,
            yaw,
        )
        params = self.cfg.vru_params
        gesture = _LIVE_RAISE if cmd.gesture else None
        pace = speed / params.speed if params.speed > 0 else 0.0
        posed = self._root
        if isinstance(params, GaitParams):
            self._phase += 2.0 * math.pi * (params.cadence / 2.0) * pace * dt
            local = pedestrian_local_joints(
                self._phase, params, gesture, swing=1.0 if speed > 0 else 0.0
            )
        else:
            self._phase += 2.0 * math.pi * params.pedal_cadence * pace * dt
            wobble = (
                params.wobble_amplitude
                * math.sin(2.0 * math.pi * params.wobble_frequency * t)
                if speed > 0
                else 0.0
            )
            # balance wobble shows in the posed yaw but doesn't steer the
            # integrated heading
            posed = Pose2D(posed.x, posed.y, posed.yaw + 0.5 * wobble)
            local = cyclist_local_joints(self._phase, wobble, params, gesture)
        frame = SkeletonFrame(t, 0, compose_root(posed, local), "world")
        return frame, posed

    def step(self) -> FrameRecord:
        """Advance one tick under the current intent."""
        if self.done:
            raise RuntimeError("session already finished")
        t = self.tick * self.cfg.dt
        vru_frame, vru_root = self._pose_subject(t)
        record, self._vehicle, self._tff = step_tick(
            self.cfg, self.tick, vru_frame, vru_root, self._vehicle, self._tff, self._rng
        )
        self.frames.append(record)
        self.tick += 1
        self._update_live_metrics(record)
        return record

    def _update_live_metrics(self, record: FrameRecord) -> None:
        if record.visible and record.hip_est is None:
            self._no_detects += 1
        if len(record.detections) > 1:
            self._false_detects += 1
        if record.hip_est is not None:
            self._hip_t.append(record.t)
            self._hip_d.append(record.hip_est)
            if len(self._hip_t) > _VARIABILITY_WINDOW:
                del self._hip_t[0], self._hip_d[0]
        if len(self._hip_d) >= 12:
            smooth = smooth_series(np.array(self._hip_t), np.array(self._hip_d))
            self._variability = abs(self._hip_d[-1] - float(smooth[-1]))

    def snapshot_dict(self, record: FrameRecord) -> dict:
        """Wire form of one tick, small enough for the message cap."""
        hip = int(Joint.PELVIS)
        return {
            "type": "snapshot",
            "tick": record.tick,
            "sim_time": record.t,
            "vehicle": {
                "x": record.vehicle.x,
                "y": record.vehicle.y,
                "yaw": record.vehicle.yaw,
                "v": record.vehicle.v,
            },
            "tff": {
                "mode": record.tff_mode,
                "v_cmd": record.v_cmd,
                "steer": record.steer,
            },
            "vru": {
                "x": record.vru_root.x,
                "y": record.vru_root.y,
                "yaw": record.vru_root.yaw,
                "joints": [[round(v, 4) for v in row] for row in record.vru_frame.joints.tolist()],
            },
            "detections": [
                {
                    "subject_id": det.subject_id,
                    "source": det.source,
                    "hip": [round(v, 4) for v in det.skeleton.joints[hip].tolist()],
                }
                for det in record.detections
            ],
            "metrics": {
                "hip_distance": record.hip_est,
                "local_variability": self._variability,
                "no_detects": self._no_detects,
                "false_detects": self._false_detects,
            },
        }

    def to_log(self) -> RunLog:
        return RunLog(scenario=scenario_to_dict(self.cfg), frames=list(self.frames))


def run_live_schedule(
    cfg: ScenarioConfig, schedule: Iterable[tuple[int, TeleopInput]]
) -> RunLog:
    """Run a live-mode episode offline from a (tick, command) schedule.

    Each command takes effect from the given tick on, exactly as if a
    client had submitted it just before that tick was stepped. Feeding a
    served session's input_history back through this function reproduces
    its RunLog byte for byte.
    """
    session = LiveSession(cfg)
    pending = sorted(schedule, key=lambda item: item[0])
    seq = 0
    i = 0
    while not session.done:
        while i < len(pending) and pending[i][0] <= session.tick:
            seq += 1
            session.submit(pending[i][1], seq)
            i += 1
        session.step()
    return session.to_log()


class _ServerState:
    """Shared mutable state between the stepping loop and the handlers."""

    def __init__(self, session: LiveSession):
        self.session = session
        self.subscribers: dict[ServerConnection, asyncio.Queue[str]] = {}
        self.stopping = asyncio.Event()

    def broadcast(self, text: str) -> None:
        for conn, queue in list(self.subscribers.items()):
            try:
                queue.put_nowait(text)
            except asyncio.QueueFull:
                # a client that cannot keep up would otherwise see gaps;
                # drop it instead of violating the gap-free contract
                self.subscribers.pop(conn, None)
                asyncio.ensure_future(conn.close(1013, "too slow"))


def _error_reply(reason: str) -> str:
    return json.dumps({"type": "error", "reason": reason})


async def _handle_message(state: _ServerState, conn: ServerConnection, raw: str | bytes) -> None:
    if isinstance(raw, bytes):
        await conn.send(_error_reply("messages must be JSON text"))
        return
    try:
        msg = json.loads(raw)
    except json.JSONDecodeError:
        await conn.send(_error_reply("message is not valid JSON"))
        return
    if not isinstance(msg, dict) or "type" not in msg:
        await conn.send(_error_reply("message must be an object with a type field"))
        return
    kind = msg["type"]
    if kind == "input":
        try:
            cmd, seq = parse_input(msg)
        except ValueError as exc:
            await conn.send(_error_reply(str(exc)))
            return
        state.session.submit(cmd, seq, client=conn)
    elif kind == "subscribe":
        state.subscribers.setdefault(
            conn, asyncio.Queue(maxsize=SNAPSHOT_QUEUE_LIMIT)
        )
    elif kind == "reset":
        scenario = msg.get("scenario")
        if not isinstance(scenario, dict):
            await conn.send(_error_reply("reset requires a scenario object"))
            return
        try:
            cfg = scenario_from_dict(scenario)
        except (ValueError, TypeError) as exc:
            await conn.send(_error_reply(f"bad scenario: {exc}"))
            return
        state.session = LiveSession(cfg)
    else:
        await conn.send(_error_reply(f"unknown message type {kind!r}"))


async def _sender(state: _ServerState, conn: ServerConnection, queue: asyncio.Queue[str]) -> None:
    try:
        while True:
            await conn.send(await queue.get())
    except ConnectionClosed:
        pass
    finally:
        state.subscribers.pop(conn, None)


async def _client_handler(state: _ServerState, conn: ServerConnection) -> None:
    await conn.send(json.dumps({"type": "hello", "schema_version": SCHEMA_VERSION}))
    sender_task: asyncio.Task | None = None
    try:
        async for raw in conn:
            await _handle_message(state, conn, raw)
            queue = state.subscribers.get(conn)
            if queue is not None and sender_task is None:
                sender_task = asyncio.create_task(_sender(state, conn, queue))
    except ConnectionClosed:
        pass
    finally:
        state.subscribers.pop(conn, None)
        if sender_task is not None:
            sender_task.cancel()


async def _stepping_loop(state: _ServerState, pace: bool) -> None:
    loop = asyncio.get_running_loop()
    deadline = loop.time()
    while not state.stopping.is_set():
        session = state.session
        if session.done:
            break
        record = session.step()
        state.broadcast(json.dumps(session.snapshot_dict(record)))
        if pace:
            deadline += session.cfg.dt
            await asyncio.sleep(max(0.0, deadline - loop.time()))
        else:
            await asyncio.sleep(0)


async def serve(
    cfg: ScenarioConfig,
    port: int,
    host: str = "127.0.0.1",
    out_path: str | None = None,
    *,
    pace: bool = True,
    ready: asyncio.Event | None = None,
    bound_port: list[int] | None = None,
) -> RunLog:
    """Serve one live episode; returns (and optionally writes) its log.

    Runs until the episode's tick budget is exhausted or the stepping
    loop is cancelled. ``pace=True`` holds the loop to wall-clock dt
    (20 Hz at the default 0.05 s step); ``pace=False`` runs the same
    code as fast as the event loop allows. Port 0 binds an ephemeral
    port, reported through ``bound_port``.
    """
    state = _ServerState(LiveSession(cfg))

    async def handler(conn: ServerConnection) -> None:
        await _client_handler(state, conn)

    async with ws_serve(handler, host, port, max_size=MAX_MESSAGE_BYTES) as server:
        if bound_port is not None:
            bound_port.append(server.sockets[0].getsockname()[1])
        if ready is not None:
            ready.set()
        try:
            await _stepping_loop(state, pace)
        finally:
            state.stopping.set()
    log = state.session.to_log()
    if out_path is not None:
        write_log(log, out_path)
    return log

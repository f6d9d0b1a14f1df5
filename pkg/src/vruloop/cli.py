"""Command line front end (installed as ``sim``)."""

from __future__ import annotations

import argparse
import asyncio
import json
import math
import sys
from pathlib import Path

from . import bridge
from .harness import (
    ScenarioConfig,
    read_log,
    run_scenario,
    run_suite,
    scenario_from_catalog,
    scenario_from_dict,
    write_log,
)
from .metrics import (
    ComparisonTable,
    StabilityReport,
    analyze_log,
    build_comparison,
)
from .perception import CameraModel, MountPose
from .stimulation import (
    ProjectionGeometry,
    ProjectorPose,
    alignment_error,
    horizon_height,
    virtual_camera_config,
)


def _parse_ids(text: str) -> list[int]:
    """Expand '1-3,7,10-12' into a sorted id list."""
    ids: set[int] = set()
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if "-" in chunk:
            lo, _, hi = chunk.partition("-")
            try:
                ids.update(range(int(lo), int(hi) + 1))
            except ValueError:
                raise ValueError(f"bad id range {chunk!r}") from None
        else:
            try:
                ids.add(int(chunk))
            except ValueError:
                raise ValueError(f"bad id {chunk!r}") from None
    if not ids:
        raise ValueError("no test case ids given")
    return sorted(ids)


def _load_scenario(token: str) -> ScenarioConfig:
    """A scenario argument is a catalog id or a JSON file path."""
    if token.isdigit():
        return scenario_from_catalog(int(token))
    path = Path(token)
    if not path.exists():
        raise ValueError(
            f"scenario {token!r} is neither a catalog id (1-12) nor an existing file"
        )
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return scenario_from_dict(data)


def _report_csv(report: StabilityReport) -> str:
    lines = ["lower_m,upper_m,max_dev_m,p95_dev_m,samples"]
    for b in report.distance_variability:
        lines.append(
            f"{b.lower_m!r},{b.upper_m!r},{b.max_dev_m!r},{b.p95_dev_m!r},{b.samples}"
        )
    return "\n".join(lines) + "\n"


def _comparison_json(table: ComparisonTable) -> dict:
    return {
        "vru": table.vru,
        "perspective": table.perspective,
        "denominator": table.denominator,
        "rows": [
            {
                "joint": r.joint,
                "perspective": r.perspective,
                "sd_rw_m": r.sd_rw,
                "sd_cp_m": r.sd_cp,
                "re_pct": r.relative_error_pct,
            }
            for r in table.rows
        ],
    }


def _print_report(report: StabilityReport) -> None:
    md = report.metadata
    print(
        f"{md.get('vru', '?')} / {md.get('domain', '?')} / "
        f"perspective {md.get('perspective', '?')}"
    )
    print(f"no detects:    {report.no_detects}")
    print(f"false detects: {report.false_detects}")
    if report.distance_variability:
        print(f"{'bin':>10} {'max_dev_m':>10} {'p95_dev_m':>10} {'samples':>8}")
        for b in report.distance_variability:
            label = f"[{b.lower_m:g},{b.upper_m:g})"
            print(f"{label:>10} {b.max_dev_m:>10.4f} {b.p95_dev_m:>10.4f} {b.samples:>8}")
    else:
        print("no frames inside the binned distance range")


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = _load_scenario(args.scenario)
    log = run_scenario(cfg)
    write_log(log, args.out)
    meta = log.metadata
    print(
        f"wrote {len(log.frames)} frames to {args.out} "
        f"({meta.get('vru')}/{meta.get('domain')}/{meta.get('perspective')}, "
        f"seed {meta.get('seed')})"
    )
    return 0


def _cmd_suite(args: argparse.Namespace) -> int:
    ids = _parse_ids(args.ids)
    result = run_suite(ids, denominator=args.re_denominator)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for case_id, log in result.logs.items():
        write_log(log, out_dir / f"case_{case_id:02d}.jsonl")
        report = result.reports[case_id]
        with open(out_dir / f"case_{case_id:02d}.report.json", "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    for table in result.comparisons:
        stem = f"comparison_{table.vru}_{table.perspective}"
        with open(out_dir / f"{stem}.json", "w", encoding="utf-8") as fh:
            json.dump(_comparison_json(table), fh, indent=2, sort_keys=True)
            fh.write("\n")
        (out_dir / f"{stem}.csv").write_text(table.to_csv(), encoding="utf-8")
        print(table.to_text())
    print(f"ran {len(result.logs)} cases, {len(result.comparisons)} comparisons -> {out_dir}")
    return 0


def _cmd_analyze(args: argparse.Namespace) -> int:
    log = read_log(args.log)
    report = analyze_log(
        log,
        bin_width=args.bin_width,
        window=args.window,
        stiffness=args.stiffness,
    )
    _print_report(report)
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    if args.csv:
        Path(args.csv).write_text(_report_csv(report), encoding="utf-8")
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    rw_path, cp_path = args.pair
    kwargs = dict(window=args.window, stiffness=args.stiffness)
    rep_rw = analyze_log(read_log(rw_path), bin_width=args.bin_width, **kwargs)
    rep_cp = analyze_log(read_log(cp_path), bin_width=args.bin_width, **kwargs)
    table = build_comparison(rep_rw, rep_cp, denominator=args.re_denominator)
    print(table.to_text())
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(_comparison_json(table), fh, indent=2, sort_keys=True)
            fh.write("\n")
    if args.csv:
        Path(args.csv).write_text(table.to_csv(), encoding="utf-8")
    return 0


def _geometry_from_dict(data: dict) -> tuple[ProjectionGeometry, CameraModel]:
    try:
        projector = ProjectorPose(**data.get("projector", {}))
        resolution = tuple(data.get("projector_resolution", (1920, 1080)))
        geometry = ProjectionGeometry(
            width=float(data["width"]),
            d_cam=float(data["d_cam"]),
            h_cam=float(data["h_cam"]),
            d_horizon=float(data["d_horizon"]),
            camera_pitch=float(data.get("camera_pitch", 0.0)),
            projector=projector,
            projector_resolution=resolution,
        )
    except KeyError as exc:
        raise ValueError(f"geometry file is missing field {exc.args[0]!r}") from None
    cam_data = data.get("camera", {})
    mount_data = cam_data.get("mount", {})
    mount = MountPose(
        x=float(mount_data.get("x", 0.0)),
        y=float(mount_data.get("y", 0.0)),
        z=float(mount_data.get("z", data["h_cam"])),
        yaw=float(mount_data.get("yaw", 0.0)),
        pitch=float(mount_data.get("pitch", data.get("camera_pitch", 0.0))),
        roll=float(mount_data.get("roll", 0.0)),
    )
    camera = CameraModel(
        width=int(cam_data.get("width", 1280)),
        height=int(cam_data.get("height", 960)),
        fps=float(cam_data.get("fps", 20.0)),
        horizontal_fov=float(cam_data.get("horizontal_fov", math.pi / 2.0)),
        mount=mount,
    )
    return geometry, camera


def _cmd_calibrate(args: argparse.Namespace) -> int:
    if args.check is not None:
        rw_h, cp_h = args.check
        err = alignment_error(rw_h, cp_h)
        taller = "taller" if err > 0 else "shorter"
        print(f"alignment error: {err:+.2f}% (projected object appears {taller})")
        return 0
    with open(args.geometry, encoding="utf-8") as fh:
        data = json.load(fh)
    geometry, camera = _geometry_from_dict(data)
    cfg = virtual_camera_config(geometry, camera)
    horizon = horizon_height(geometry.h_cam, geometry.d_cam, geometry.d_horizon)
    screen_h = geometry.width * cfg.height_px / cfg.width_px
    print("virtual camera:")
    print(f"  horizontal fov: {math.degrees(cfg.horizontal_fov):.4f} deg")
    print(f"  vertical fov:   {math.degrees(cfg.vertical_fov):.4f} deg")
    print(f"  resolution:     {cfg.width_px}x{cfg.height_px}")
    print(f"  camera height:  {cfg.camera_height:.4f} m")
    print(f"  camera pitch:   {math.degrees(cfg.camera_pitch):.4f} deg")
    print("horizon placement:")
    print(f"  height on screen: {horizon:.4f} m")
    if horizon <= screen_h:
        row = horizon / screen_h * cfg.height_px
        print(f"  row from bottom:  {row:.1f} px of {cfg.height_px}")
    else:
        print(f"  above the projected area ({screen_h:.3f} m tall)")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    cfg = _load_scenario(args.scenario)

    async def main() -> None:
        ports: list[int] = []
        ready = asyncio.Event()
        task = asyncio.create_task(
            bridge.serve(
                cfg,
                args.port,
                host=args.host,
                out_path=args.out,
                pace=not args.no_pace,
                ready=ready,
                bound_port=ports,
            )
        )
        await ready.wait()
        print(f"serving ws://{args.host}:{ports[0]} (schema {bridge.SCHEMA_VERSION})")
        sys.stdout.flush()
        await task

    try:
        asyncio.run(main())
    except KeyboardInterrupt:
        print("stopped")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sim",
        description="Closed-loop VRU perception test bench, desk scale.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario and write its log")
    p_run.add_argument(
        "--scenario",
        required=True,
        help="catalog id (1-12) or scenario JSON file",
    )
    p_run.add_argument("--out", required=True, help="output JSONL log path")
    p_run.set_defaults(func=_cmd_run)

    p_suite = sub.add_parser("suite", help="run catalog cases and pair rw/cp reports")
    p_suite.add_argument("--ids", default="1-12", help="ids like '1-12' or '1,4,7'")
    p_suite.add_argument("--out-dir", required=True)
    p_suite.add_argument("--re-denominator", choices=("rw", "cp"), default="rw")
    p_suite.set_defaults(func=_cmd_suite)

    p_an = sub.add_parser("analyze", help="stability report for one log")
    p_an.add_argument("log")
    p_an.add_argument("--bin-width", type=float, default=1.0)
    p_an.add_argument("--window", type=int, default=11)
    p_an.add_argument("--stiffness", type=float, default=1.0)
    p_an.add_argument("--json", help="also write the full report as JSON")
    p_an.add_argument("--csv", help="also write the distance bins as CSV")
    p_an.set_defaults(func=_cmd_analyze)

    p_rep = sub.add_parser("report", help="compare an rw log against a cp log")
    p_rep.add_argument("--pair", nargs=2, metavar=("RW_LOG", "CP_LOG"), required=True)
    p_rep.add_argument("--bin-width", type=float, default=1.0)
    p_rep.add_argument("--window", type=int, default=11)
    p_rep.add_argument("--stiffness", type=float, default=1.0)
    p_rep.add_argument("--re-denominator", choices=("rw", "cp"), default="rw")
    p_rep.add_argument("--json", help="also write the comparison as JSON")
    p_rep.add_argument("--csv", help="also write the comparison as CSV")
    p_rep.set_defaults(func=_cmd_report)

    p_cal = sub.add_parser(
        "calibrate", help="derive the virtual camera for a bench geometry"
    )
    p_cal.add_argument(
        "geometry", nargs="?", help="bench geometry JSON (see README for the schema)"
    )
    p_cal.add_argument(
        "--check",
        nargs=2,
        type=float,
        metavar=("RW_HEIGHT", "CP_HEIGHT"),
        help="compare two measured heights and print the alignment error",
    )
    p_cal.set_defaults(func=_cmd_calibrate)

    p_srv = sub.add_parser("serve", help="expose a live session over a websocket")
    p_srv.add_argument("--scenario", required=True, help="catalog id or JSON file")
    p_srv.add_argument("--port", type=int, default=8787)
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--out", help="write the episode log here when it ends")
    p_srv.add_argument(
        "--no-pace",
        action="store_true",
        help="run unpaced instead of 20 Hz wall clock",
    )
    p_srv.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "calibrate" and args.check is None and args.geometry is None:
        parser.error("calibrate needs a geometry file or --check")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

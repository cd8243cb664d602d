"""Command line front end: validate scenes, run simulations, fold reports, serve."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .analytics import accumulate_report, format_report, parse_log
from .scene import load_scene
from .sim import RunConfig, run_simulation

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_IO = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aarsim",
        description="audio gallery simulator: scene validation, offline runs, live serving",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="check a scene file and its clips")
    p_validate.add_argument("--scene", required=True, help="scene JSON path")

    p_sim = sub.add_parser("simulate", help="run a scripted walk offline")
    p_sim.add_argument("--scene", required=True, help="scene JSON path")
    p_sim.add_argument("--walk", required=True, help="walk script JSON path")
    p_sim.add_argument("--seed", required=True, type=int, help="simulation RNG seed")
    p_sim.add_argument("--out", required=True, help="output WAV path")
    p_sim.add_argument("--log", required=True, help="output event log path (JSONL)")
    p_sim.add_argument("--report", help="optional engagement report CSV ('-' for stdout)")
    p_sim.add_argument(
        "--duration", type=float, help="run length in seconds (default: walk length)"
    )

    p_report = sub.add_parser("report", help="fold an event log into a report CSV")
    p_report.add_argument("--log", required=True, help="event log path (JSONL)")
    p_report.add_argument("--out", required=True, help="report CSV path ('-' for stdout)")

    p_serve = sub.add_parser("serve", help="serve the live preview protocol")
    p_serve.add_argument("--scene", required=True, help="scene JSON path")
    p_serve.add_argument("--port", required=True, type=int, help="TCP port to bind")
    p_serve.add_argument("--host", default="127.0.0.1", help="bind address")
    p_serve.add_argument("--seed", type=int, default=0, help="base seed for sessions")
    p_serve.add_argument(
        "--ui", help="directory with the built preview page, served at /ui"
    )
    return parser


def _cmd_validate(args: argparse.Namespace) -> int:
    scene = load_scene(args.scene)
    print(
        f"{args.scene}: ok ({len(scene.sources)} sources, {len(scene.anchors)} anchors, "
        f"{len(scene.occluders)} occluders)",
        file=sys.stderr,
    )
    return EXIT_OK


def _cmd_simulate(args: argparse.Namespace) -> int:
    cfg = RunConfig(
        scene_path=args.scene,
        walk_path=args.walk,
        seed=args.seed,
        wav_path=args.out,
        log_path=args.log,
        report_path=args.report,
        duration=args.duration,
    )
    run_simulation(cfg)
    print(f"wrote {args.out} and {args.log}", file=sys.stderr)
    return EXIT_OK


def _cmd_report(args: argparse.Namespace) -> int:
    with open(args.log, "r", encoding="utf-8") as fh:
        events = parse_log(fh)
    report = accumulate_report(events)
    if args.out == "-":
        sys.stdout.write(format_report(report))
    else:
        Path(args.out).write_text(format_report(report), encoding="utf-8")
        print(f"wrote {args.out}", file=sys.stderr)
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    scene = load_scene(args.scene)
    ui_dir = Path(args.ui) if args.ui else None
    app = create_app(scene, base_seed=args.seed, ui_dir=ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


_COMMANDS = {
    "validate": _cmd_validate,
    "simulate": _cmd_simulate,
    "report": _cmd_report,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help; pass both through
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())

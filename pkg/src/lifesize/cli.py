"""Command-line entry point: ``lifesize {layout,fit,occluders,simulate}``.

Exit codes: 0 success, 2 usage or malformed input, 3 domain error.
Relative output paths resolve against ``$LIFESIZE_OUTPUT_DIR`` when set.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .errors import InvalidInput, LifesizeError
from .fitting import fit_document, fit_monotone_poly, read_samples_csv
from .fov import DEFAULT_OCCLUDER_DISTANCE_M, FieldOfView, occluder_layout, parse_aspect
from .models import TARGETS, layout_for
from .session.sim import SimConfig, simulate
from .session.wire import Mode
from .svg import layout_svg

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
OUTPUT_DIR_ENV = "LIFESIZE_OUTPUT_DIR"


def _out_path(path: str) -> Path:
    p = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _emit_json(doc: dict, output: str | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if output:
        _out_path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def _positive(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _aspect(text: str) -> tuple[float, float]:
    try:
        return parse_aspect(text)
    except InvalidInput as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _fov(diagonal: float, aspect: tuple[float, float]) -> FieldOfView:
    return FieldOfView(diagonal, *aspect)


def cmd_layout(args: argparse.Namespace) -> int:
    fov = _fov(args.fov, args.aspect) if args.fov < 180 else args.fov
    placed = layout_for(fov, args.remote_users, source=args.source)
    for flag in placed.flags:
        _warn(flag)
    _emit_json(placed.to_dict(), args.output)
    if args.svg:
        _out_path(args.svg).write_text(layout_svg(placed.layout), encoding="utf-8")
    return EXIT_OK


def cmd_fit(args: argparse.Namespace) -> int:
    try:
        text = Path(args.input).read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidInput(f"cannot read {args.input}: {exc.strerror}") from None
    samples = [
        s for s in read_samples_csv(text) if s.target == args.target and s.scenario == args.scenario
    ]
    result = fit_monotone_poly(samples, max_order=args.max_order)
    xs = [s.fov_deg for s in samples]
    ys = [s.value for s in samples]
    doc = fit_document(result, args.target, args.scenario, xs, ys)
    fit = doc["fit"]
    print(
        f"order={result.order} pearson={fit['pearson']} spearman={fit['spearman']}",
        file=sys.stderr,
    )
    _emit_json(doc, args.output)
    return EXIT_OK


def cmd_occluders(args: argparse.Namespace) -> int:
    rig = occluder_layout(
        _fov(args.device_fov, args.aspect), _fov(args.target_fov, args.aspect), args.distance
    )
    if rig.degenerate:
        _warn("target FoV equals device FoV; occluders have zero area")
    _emit_json(rig.to_dict(), args.output)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = SimConfig(
        peers=args.peers,
        mode=args.mode,
        duration_s=args.duration_s,
        seed=args.seed,
        fps=args.fps,
        frame_bytes=args.frame_bytes,
        latency_ms=args.latency_ms,
        jitter_ms=args.jitter_ms,
        fov_deg=args.fov,
    )
    result = simulate(cfg)
    summary = result.summary()
    dropped = sum(s["frames_dropped"] for s in summary["streams"])
    if dropped:
        _warn(f"{dropped} frames dropped by pacing")
    if args.rates:
        _out_path(args.rates).write_text(result.rate_csv(), encoding="utf-8")
    if args.transcript:
        _out_path(args.transcript).write_text(result.transcript.text(), encoding="utf-8")
    _emit_json(summary, args.output)
    return EXIT_OK


def _mode(text: str) -> Mode:
    try:
        return Mode.from_slug(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lifesize", description="Life-size video-avatar layout and session toolkit."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("layout", help="compute avatar poses for a FoV and group size")
    p.add_argument("--fov", type=_positive, required=True, help="diagonal FoV in degrees (<= 180)")
    p.add_argument("--aspect", type=_aspect, default=(3.0, 2.0), help="aspect ratio W:H (default 3:2)")
    p.add_argument("--remote-users", type=int, required=True)
    p.add_argument("--source", choices=("model", "pilot"), default="model")
    p.add_argument("--svg", metavar="PATH", help="also write a top-down SVG plot")
    p.add_argument("--output", "-o", metavar="PATH", help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_layout)

    p = sub.add_parser("fit", help="fit a monotone placement model from CSV samples")
    p.add_argument("--input", required=True, metavar="CSV")
    p.add_argument("--target", choices=TARGETS, required=True)
    p.add_argument("--scenario", type=int, required=True)
    p.add_argument("--max-order", type=int, default=2, choices=(1, 2, 3))
    p.add_argument("--output", "-o", metavar="PATH")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("occluders", help="occluder rig masking a device FoV to a target FoV")
    p.add_argument("--device-fov", type=_positive, required=True)
    p.add_argument("--target-fov", type=_positive, required=True)
    p.add_argument("--aspect", type=_aspect, default=(3.0, 2.0))
    p.add_argument("--distance", type=_positive, default=DEFAULT_OCCLUDER_DISTANCE_M)
    p.add_argument("--output", "-o", metavar="PATH")
    p.set_defaults(func=cmd_occluders)

    p = sub.add_parser("simulate", help="simulate a full-mesh session with bandwidth accounting")
    p.add_argument("--peers", type=int, required=True)
    p.add_argument("--mode", type=_mode, default=Mode.AVATAR, help="avatar, video-grid or video-avatar")
    p.add_argument("--duration-s", type=_positive, default=10.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fps", type=_positive)
    p.add_argument("--frame-bytes", type=int, help="wire size of each video frame message")
    p.add_argument("--latency-ms", type=float, default=20.0)
    p.add_argument("--jitter-ms", type=float, default=5.0)
    p.add_argument("--fov", type=_positive, default=110.0, help="FoV used for announced placements")
    p.add_argument("--rates", metavar="CSV", help="write per-window rate report")
    p.add_argument("--transcript", metavar="JSONL", help="write the session transcript")
    p.add_argument("--output", "-o", metavar="PATH")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except InvalidInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except LifesizeError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())

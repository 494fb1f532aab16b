"""Command-line front end: track, bench, sim, and convert subcommands.

Every config-file key is also a flag with the same dotted name
(--classifier.h_t, --sim.fps, ...), and flags override file values.
Exit codes: 0 success, 1 usage, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .bench import emit_report, load_ground_truth, run_benchmark
from .config import AppConfig, config_keys, load_config
from .errors import TrackError
from .imaging import Rect, load_sequence, rgb_to_hsv, write_ppm
from .pipeline_sim import simulate
from .tracker import track_sequence


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


class _ConfigOverride(argparse.Action):
    def __call__(self, parser, namespace, value, option_string=None):
        overrides = getattr(namespace, "config_overrides", None)
        if overrides is None:
            overrides = []
            setattr(namespace, "config_overrides", overrides)
        overrides.append((option_string.lstrip("-"), value))


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", help="TOML config file")
    group = parser.add_argument_group("config overrides (flag = file key)")
    for key in config_keys():
        group.add_argument(
            f"--{key}", action=_ConfigOverride, metavar="VALUE",
            help=f"override config key {key}",
        )


def _build_config(args) -> AppConfig:
    cfg = load_config(args.config)
    for key, value in getattr(args, "config_overrides", None) or []:
        cfg.set(key, value)
    if getattr(args, "workers", None) is not None:
        cfg.set("tracker.workers", args.workers)
    return cfg


def _parse_rect(text: str, flag: str) -> Rect:
    try:
        x, y, w, h = (int(p) for p in text.split(","))
        return Rect(x, y, w, h)
    except ValueError as exc:
        raise UsageError(f"{flag} expects x,y,w,h integers: {exc}") from exc


def _parse_size(text: str | None, flag: str = "--size"):
    if text is None:
        return None, None
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError as exc:
        raise UsageError(f"{flag} expects WIDTHxHEIGHT: {exc}") from exc


def build_parser() -> _Parser:
    parser = _Parser(prog="camtrack", description=__doc__)
    parser.add_argument("--version", action="version", version=f"camtrack {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_track = sub.add_parser("track", help="track one target through a sequence")
    p_track.add_argument("sequence", help="image directory or raw YCbCr 4:2:2 file")
    p_track.add_argument("--init", required=True, metavar="X,Y,W,H",
                         help="initial bounding box, 0-based")
    p_track.add_argument("--kind", choices=("images", "raw"),
                         help="sequence kind (default: inferred from path)")
    p_track.add_argument("--size", metavar="WxH",
                         help="frame size for raw sequences")
    p_track.add_argument("--raw-layout", choices=("yuyv", "planar"), default="yuyv")
    p_track.add_argument("--workers", type=int, help="shorthand for --tracker.workers")
    p_track.add_argument("--output", metavar="FILE",
                         help="result file (default: stdout)")
    p_track.add_argument("--debug-masks", metavar="DIR",
                         help="dump per-frame classification masks as PBM")
    _add_config_flags(p_track)
    p_track.set_defaults(func=cmd_track)

    p_bench = sub.add_parser("bench", help="evaluate sequences listed in a manifest")
    p_bench.add_argument("manifest",
                         help="one entry per line: seq_path gt_path [x,y,w,h]")
    p_bench.add_argument("--output", metavar="DIR", default="bench_out")
    p_bench.add_argument("--formats", metavar="LIST",
                         help="comma-separated subset of csv,json,svg")
    p_bench.add_argument("--workers", type=int, help="shorthand for --tracker.workers")
    _add_config_flags(p_bench)
    p_bench.set_defaults(func=cmd_bench)

    p_sim = sub.add_parser("sim", help="simulate the frame-buffer pipeline")
    p_sim.add_argument("--n-frames", type=int, default=10)
    p_sim.add_argument("--output", metavar="FILE", help="write the JSON report here")
    _add_config_flags(p_sim)
    p_sim.set_defaults(func=cmd_sim)

    p_conv = sub.add_parser("convert", help="convert a sequence to RGB or HSV PPM frames")
    p_conv.add_argument("input", help="image directory or raw YCbCr 4:2:2 file")
    p_conv.add_argument("--output", metavar="DIR", required=True)
    p_conv.add_argument("--to", choices=("rgb", "hsv"), default="rgb")
    p_conv.add_argument("--kind", choices=("images", "raw"))
    p_conv.add_argument("--size", metavar="WxH")
    p_conv.add_argument("--raw-layout", choices=("yuyv", "planar"), default="yuyv")
    _add_config_flags(p_conv)
    p_conv.set_defaults(func=cmd_convert)

    return parser


def cmd_track(args) -> int:
    cfg = _build_config(args)
    width, height = _parse_size(args.size)
    init_box = _parse_rect(args.init, "--init")
    seq = load_sequence(
        args.sequence, args.kind, width=width, height=height,
        matrix=cfg.matrix, layout=args.raw_layout,
    )
    run = track_sequence(seq, init_box, cfg.tracker_config(),
                         mask_dir=args.debug_masks)
    lines = [out.line(i) for i, out in enumerate(run.outputs)]
    text = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _read_manifest(path: Path):
    """Yield (name, sequence, ground truth, init box) per usable entry,
    plus a list of (name, reason) for entries that could not be loaded."""
    entries, failures = [], []
    lines = path.read_text().splitlines()
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        name = f"line{lineno}"
        try:
            if len(parts) not in (2, 3):
                raise TrackError("expected: seq_path gt_path [x,y,w,h]")
            seq_path, gt_path = parts[0], parts[1]
            name = Path(seq_path).name or name
            seq = load_sequence(seq_path)
            gt = load_ground_truth(gt_path)
            if len(parts) == 3:
                x, y, w, h = (int(p) for p in parts[2].split(","))
                init_box = Rect(x, y, w, h)
            else:
                init_box = gt[0]
            entries.append((name, seq, gt, init_box))
        except (TrackError, OSError, ValueError) as exc:
            failures.append((name, str(exc)))
            print(f"warning: manifest line {lineno} skipped: {exc}", file=sys.stderr)
    return entries, failures


def cmd_bench(args) -> int:
    cfg = _build_config(args)
    if args.formats is not None:
        cfg.set("bench.formats", args.formats)
    entries, load_failures = _read_manifest(Path(args.manifest))
    if not entries and not load_failures:
        raise TrackError(f"{args.manifest}: empty manifest")
    if not entries:
        raise TrackError(f"{args.manifest}: no usable manifest entries")
    report = run_benchmark(
        [(seq, gt, box) for _, seq, gt, box in entries],
        cfg.tracker_config(),
        names=[name for name, *_ in entries],
    )
    report.failures = load_failures + report.failures
    written = emit_report(report, args.output, formats=cfg.bench_formats)
    for sr in report.sequences:
        print(
            f"{sr.name}: AUC {sr.success.auc:.3f}, "
            f"precision@20px {sr.precision_at_20:.3f}, "
            f"{sr.mean_fps:.1f} FPS"
        )
    print(
        f"aggregate: AUC {report.mean_success_auc:.3f}, "
        f"precision@20px {report.mean_precision_at_20:.3f}, "
        f"{report.mean_fps:.1f} FPS"
    )
    for path in written:
        print(f"wrote {path}")
    return 0 if not report.failures else 2


def cmd_sim(args) -> int:
    cfg = _build_config(args)
    report = simulate(cfg.sim_config(), args.n_frames)
    print(report.schedule_table())
    print(
        f"latency {report.display_latency} slots, "
        f"throughput {report.steady_throughput:g} frame/slot, "
        f"hazards {report.hazards}, "
        f"bandwidth {report.total_gbit:.2f}/{report.max_bandwidth:g} Gbit/s"
    )
    if args.output:
        import json

        Path(args.output).write_text(json.dumps(report.to_dict(), indent=2) + "\n")
        print(f"wrote {args.output}")
    if not report.within_budget:
        print("error: aggregate bandwidth exceeds the budget", file=sys.stderr)
        return 2
    return 0


def cmd_convert(args) -> int:
    cfg = _build_config(args)
    width, height = _parse_size(args.size)
    seq = load_sequence(
        args.input, args.kind, width=width, height=height,
        matrix=cfg.matrix, layout=args.raw_layout,
    )
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    for i in range(len(seq)):
        rgb = seq.load_rgb(i)
        data = rgb.data if args.to == "rgb" else rgb_to_hsv(rgb).data
        write_ppm(out_dir / f"frame{i:05d}.ppm", data)
    print(f"wrote {len(seq)} {args.to} frames to {out_dir}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (TrackError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

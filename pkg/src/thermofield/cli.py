"""Command line front end: ``thermofield {rescale,batch,iqa,bench}``."""
from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import _backend, baselines, bench, imgio
from .errors import LoadError, ParameterError
from .fieldcore import FieldscaleParams, Role
from .iqa import iqa_batch
from .rescaler import TemporalState, fieldscale

log = logging.getLogger("thermofield")

METHODS = ("fieldscale", "minmax", "clip", "clipvideo", "he", "msr", "cgf")
GLOBAL_METHODS = {
    "minmax": baselines.minmax_rescale,
    "clip": baselines.clip_percentile_rescale,
    "he": baselines.he30_clahe,
    "msr": baselines.msr_rescale,
    "cgf": baselines.cgf_rescale,
}


def _method_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("rescaling")
    g.add_argument("--method", choices=METHODS, default="fieldscale")
    g.add_argument("--grid", nargs=2, type=int, metavar=("R", "C"), help="field grid size (default 8 8)")
    g.add_argument("--iters", type=int, help="message passing iterations (default 7)")
    g.add_argument("--les-threshold", type=float, help="LES threshold in RAW counts (default 100)")
    g.add_argument("--les-distance", type=int, help="LES neighbourhood distance (default 2 on 8x8, rows/4 otherwise)")
    g.add_argument("--les-target", choices=["max", "both", "none"], default="max")
    g.add_argument("--fast", action="store_true", help="shorthand for --iters 1 --les-threshold 800")
    g.add_argument("--gamma", type=float, default=1.5)
    g.add_argument("--gamma-mode", choices=["brighten", "darken"], default="brighten",
                   help="brighten uses exponent 1/gamma, darken uses gamma")
    g.add_argument("--no-enhance", action="store_true", help="skip gamma correction and CLAHE")
    g.add_argument("--clahe-clip", type=float, default=2.0)
    g.add_argument("--clahe-tiles", nargs=2, type=int, default=[8, 8], metavar=("R", "C"))
    g.add_argument("--clip-percentiles", nargs=2, type=float, default=[1.0, 99.0], metavar=("LO", "HI"))
    return p


def params_from_args(args: argparse.Namespace, parser: argparse.ArgumentParser) -> FieldscaleParams:
    if args.fast and (args.iters is not None or args.les_threshold is not None):
        parser.error("--fast conflicts with explicit --iters/--les-threshold")
    kw = dict(
        les_target=args.les_target, gamma=args.gamma, gamma_brighten=args.gamma_mode == "brighten",
        enhance=not args.no_enhance, clahe_clip_limit=args.clahe_clip, clahe_tiles=tuple(args.clahe_tiles),
    )
    if args.les_distance is not None:
        kw["les_distance"] = args.les_distance
    if args.grid:
        kw["grid_rows"], kw["grid_cols"] = args.grid
    if args.fast:
        return FieldscaleParams.fast(**kw)
    if args.iters is not None:
        kw["mp_iterations"] = args.iters
    if args.les_threshold is not None:
        kw["les_threshold"] = args.les_threshold
    return FieldscaleParams(**kw)


def _rescale_global(method: str, frame: np.ndarray, args) -> np.ndarray:
    if method in ("clip", "clipvideo"):
        return baselines.clip_percentile_rescale(frame, *args.clip_percentiles)
    return GLOBAL_METHODS[method](frame)


def _write_extras(frame, out, state: TemporalState | None, out_path: Path, args) -> None:
    stem = out_path.stem
    if args.dump_fields and state is not None:
        d = Path(args.dump_fields)
        for field, role in ((state.prev_min, Role.MIN), (state.prev_max, Role.MAX)):
            tag = role.name.lower()
            imgio.write_field_dump(field, role, d / f"{stem}_{tag}.tfld")
            imgio.save_image8(imgio.normalize8(field), d / f"{stem}_{tag}.png")
    if args.montage:
        panels = [baselines.minmax_rescale(frame)]
        if state is not None:
            panels += [imgio.normalize8(state.prev_min), imgio.normalize8(state.prev_max)]
        panels.append(out)
        imgio.save_image8(imgio.montage(panels), out_path.with_name(f"{stem}_montage.png"))


def cmd_rescale(args, parser) -> int:
    params = params_from_args(args, parser)
    frame = imgio.load_raw(args.input)
    state = None
    if args.method == "fieldscale":
        out, state = fieldscale(frame, params)
    else:
        out = _rescale_global(args.method, frame, args)
    out_path = Path(args.output)
    imgio.save_image8(out, out_path)
    _write_extras(frame, out, state, out_path, args)
    return 0


def _thread_cap(requested: int) -> int:
    cap = os.environ.get("THERMOFIELD_THREADS")
    n = max(1, requested)
    if cap:
        n = min(n, max(1, int(cap)))
    return n


def cmd_batch(args, parser) -> int:
    params = params_from_args(args, parser)
    if args.smooth_alpha is not None and args.method != "fieldscale":
        parser.error("--smooth-alpha only applies to --method fieldscale")
    entries = imgio.scan_raw(args.input)
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)

    def dest(e):
        return out_dir / (e.path.stem + ".png")

    if args.method == "clipvideo":
        frames = [e.raw for e in entries]
        if not frames:
            raise ParameterError(f"{args.input}: no frames")
        for e, img in zip(entries, baselines.clip_video_rescale(frames, *args.clip_percentiles)):
            imgio.save_image8(img, dest(e))
        return 0

    if args.method == "fieldscale" and args.smooth_alpha is not None:
        # one stream: frames must be processed in order
        state = TemporalState(args.smooth_alpha)
        for e in entries:
            out, state = fieldscale(e.raw, params, state)
            imgio.save_image8(out, dest(e))
            _write_extras(e.raw, out, state, dest(e), args)
        return 0

    def one(e):
        frame = e.raw
        state = None
        if args.method == "fieldscale":
            out, state = fieldscale(frame, params)
        else:
            out = _rescale_global(args.method, frame, args)
        imgio.save_image8(out, dest(e))
        _write_extras(frame, out, state, dest(e), args)

    jobs = _thread_cap(args.jobs)
    if jobs == 1:
        for e in entries:
            one(e)
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(one, entries))
    return 0


def cmd_iqa(args, parser) -> int:
    d = Path(args.input)
    if not d.is_dir():
        raise ParameterError(f"{d}: not a directory")
    paths = sorted((p for p in d.iterdir() if p.is_file() and p.suffix.lower() == ".png"),
                   key=lambda p: p.name)
    report = iqa_batch(paths)
    text = report.to_csv(header=not args.no_header)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0 if report.rows else 1


def cmd_bench(args, parser) -> int:
    if args.synthetic:
        from .synthetic import thermal_scene
        rng = np.random.default_rng(0)
        frames = [thermal_scene(rng) for _ in range(args.synthetic)]
    else:
        if args.input is None:
            parser.error("bench needs a frame directory or --synthetic N")
        frames = [e.raw for e in imgio.scan_raw(args.input)]
    if not frames:
        raise ParameterError("no frames to benchmark")
    backends = _backend.available() if args.compare_backends else [args.backend or _backend.NAME]
    records = []
    for name in backends:
        if args.sweep:
            axis, values = args.sweep
            records += bench.bench_sweep(frames, axis, values.split(","), args.repeats, args.warmup, name)
        else:
            records += bench.bench_settings(frames, [FieldscaleParams(), FieldscaleParams.fast()],
                                            args.repeats, args.warmup, name)
    text = bench.to_csv(records)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    for rec in records:
        log.info("%s %s %s=%s: fields %.2f±%.2f ms, rescale %.2f±%.2f ms, total %.2f±%.2f ms",
                 rec.backend, rec.setting.value, rec.axis or "-", rec.value or "-",
                 rec.field_construction.mean_ms, rec.field_construction.std_ms,
                 rec.rescaling.mean_ms, rec.rescaling.std_ms, rec.total.mean_ms, rec.total.std_ms)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thermofield", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    flags = _method_flags()

    p = sub.add_parser("rescale", parents=[flags], help="rescale one RAW frame to 8 bits")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--dump-fields", metavar="DIR")
    p.add_argument("--montage", action="store_true")
    p.set_defaults(func=cmd_rescale)

    p = sub.add_parser("batch", parents=[flags], help="rescale every RAW frame in a directory")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--smooth-alpha", type=float, help="temporal field smoothing weight on the past")
    p.add_argument("--jobs", type=int, default=1, help="parallel frames (capped by THERMOFIELD_THREADS)")
    p.add_argument("--dump-fields", metavar="DIR")
    p.add_argument("--montage", action="store_true")
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("iqa", help="gradient/entropy report for a directory of 8-bit PNGs")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.add_argument("--no-header", action="store_true")
    p.set_defaults(func=cmd_iqa)

    p = sub.add_parser("bench", help="time field construction and rescaling")
    p.add_argument("input", nargs="?")
    p.add_argument("-o", "--output")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--warmup", type=int, default=3)
    p.add_argument("--sweep", nargs=2, metavar=("AXIS", "VALUES"),
                   help=f"AXIS in {[a.value for a in bench.Axis]}, VALUES comma separated")
    p.add_argument("--backend", choices=_backend.available())
    p.add_argument("--compare-backends", action="store_true")
    p.add_argument("--synthetic", type=int, metavar="N", help="use N generated 640x512 frames")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "sweep", None) and args.sweep[0] not in {a.value for a in bench.Axis}:
            parser.error(f"unknown sweep axis {args.sweep[0]!r}")
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args, parser)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    except (LoadError, ParameterError, OSError, ValueError) as exc:
        print(f"thermofield: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

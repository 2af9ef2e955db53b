"""bgsub command line: synth | segment | evaluate | bench."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import bench, frameio, metrics, registry, synthgen
from .core import BgsubError
from .frameio import open_sequence

log = logging.getLogger("bgsub")

RUN_MANIFEST = "run_manifest.txt"
MASK_PATTERN = "mask_%06d"


class UsageError(BgsubError):
    pass


class LeadInError(BgsubError):
    pass


def parse_index_list(text: str) -> list[int]:
    """'5,10,20-23' -> [5, 10, 20, 21, 22, 23]."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError(f"no indices in {text!r}")
    return out


def parse_int_list(text: str) -> list[int]:
    try:
        out = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}") from None
    if not out or min(out) < 1:
        raise argparse.ArgumentTypeError(f"need positive integers, got {text!r}")
    return out


def _bool(text: str) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


# Flag name -> (param field, type). Names follow the constructor arguments.
ALGO_FLAGS = {
    "--history": ("history", int),
    "--nmixtures": ("nmixtures", int),
    "--background-ratio": ("background_ratio", float),
    "--noise-sigma": ("noise_sigma", float),
    "--var-threshold": ("var_threshold", float),
    "--detect-shadows": ("detect_shadows", _bool),
    "--initialization-frames": ("initialization_frames", int),
    "--decision-threshold": ("decision_threshold", float),
    "--smoothing-radius": ("smoothing_radius", int),
}


def _add_algo_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("algorithm parameters (defaults: constructor defaults)")
    for flag, (dest, typ) in ALGO_FLAGS.items():
        g.add_argument(flag, dest=f"param_{dest}", type=typ, default=None)


def _algo_params(args) -> dict:
    return {
        dest: getattr(args, f"param_{dest}")
        for _, (dest, _t) in ALGO_FLAGS.items()
        if getattr(args, f"param_{dest}", None) is not None
    }


def _algorithms(text: str) -> list[str]:
    names = [a.strip() for a in text.split(",") if a.strip()]
    for a in names:
        if a not in registry.ALGORITHMS:
            raise argparse.ArgumentTypeError(
                f"unknown algorithm {a!r}; choose from {', '.join(sorted(registry.ALGORITHMS))}"
            )
    return names


# ---------------------------------------------------------------- synth


def cmd_synth(args) -> int:
    spec = synthgen.SynthSpec(
        width=args.width, height=args.height, frames=args.frames,
        bg_intensity=args.bg, fg_intensity=args.fg,
        rect_width=args.rect_width, rect_height=args.rect_height,
        velocity=args.velocity, start_x=args.start_x, start_y=args.start_y,
        noise_sigma=args.noise_sigma, seed=args.seed,
    )
    out = synthgen.synth_sequence(spec, args.out, ext=args.ext)
    print(f"wrote {len(out['frames'])} frames and masks to {args.out}")
    return 0


# ---------------------------------------------------------------- segment


def segment(algorithm: str, params: dict, seq: frameio.SequenceRef, targets: list[int],
            warmup_frames: int, out_dir, clamp: bool = False, ext: str = "png",
            video: str = "") -> list[Path]:
    """Start a fresh model ``warmup_frames`` before each target and keep only the target mask."""
    out_dir = Path(out_dir)
    if warmup_frames < 0:
        raise UsageError("warm-up must be >= 0")
    plan = []
    for t in targets:
        if not seq.start <= t <= seq.end:
            raise UsageError(f"target frame {t} outside sequence [{seq.start}, {seq.end}]")
        begin = t - warmup_frames
        if begin < seq.start:
            if not clamp:
                raise LeadInError(
                    f"target {t} needs {warmup_frames} lead-in frames but the sequence starts "
                    f"at {seq.start}; pass --clamp to start there instead"
                )
            log.warning("target %d: lead-in clamped to sequence start %d", t, seq.start)
            begin = seq.start
        plan.append((t, begin))

    first = frameio.load_frame(seq.path(seq.start))
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for t, begin in plan:
        model = registry.create(algorithm, first.width, first.height, params)
        mask = None
        for frame in seq.frames(begin, t + 1):
            mask = model.apply(frame)
        written.append(frameio.write_mask(mask, out_dir / f"{MASK_PATTERN % t}.{ext}"))

    model = registry.create(algorithm, first.width, first.height, params)
    manifest = {
        "algorithm": algorithm,
        "video": video,
        "input_dir": str(Path(seq.directory).resolve()),
        "pattern": seq.pattern,
        "start_index": seq.start,
        "end_index": seq.end,
        "warmup_frames": warmup_frames,
        "targets": ",".join(str(t) for t in targets),
        "clamp": clamp,
        "ext": ext,
        "width": first.width,
        "height": first.height,
    }
    manifest.update({f"param.{k}": v for k, v in model.params.to_dict().items()})
    synthgen.write_manifest(manifest, out_dir / RUN_MANIFEST)
    return written


def _coerce(value: str):
    for conv in (int, float):
        try:
            return conv(value)
        except ValueError:
            pass
    if value in ("True", "False"):
        return value == "True"
    if value == "None":
        return None
    return value


def cmd_segment(args) -> int:
    if args.replay:
        m = synthgen.read_manifest(args.replay)
        algorithm = m["algorithm"]
        params = {k[len("param."):]: _coerce(v) for k, v in m.items() if k.startswith("param.")}
        seq = open_sequence(m["input_dir"], m["pattern"], int(m["start_index"]), int(m["end_index"]))
        targets = parse_index_list(m["targets"])
        warm = int(m["warmup_frames"])
        clamp = m["clamp"] == "True"
        ext = m["ext"]
        video = m.get("video", "")
    else:
        if not (args.algo and args.input and args.targets):
            raise UsageError("segment needs --algo, --input and --targets (or --replay)")
        algorithm = args.algo
        params = _algo_params(args)
        seq = open_sequence(args.input, args.pattern)
        targets, warm, clamp, ext = args.targets, args.warmup, args.clamp, args.ext
        video = args.video or Path(args.input).name
    written = segment(algorithm, params, seq, targets, warm, args.out, clamp, ext, video)
    print(f"{algorithm}: wrote {len(written)} mask(s) to {args.out}")
    return 0


# ---------------------------------------------------------------- evaluate


def _find_gt(gt_dir: Path, index: int) -> Path:
    for ext in ("pgm", "png", "ppm"):
        p = gt_dir / f"gt_{index:06d}.{ext}"
        if p.is_file():
            return p
    raise frameio.MissingFileError(f"no ground truth gt_{index:06d}.* in {gt_dir}")


def evaluate(pred_dir, gt_dir, bins: int = metrics.DEFAULT_BINS, algorithm: str | None = None,
             video: str | None = None):
    """Score every mask_N in ``pred_dir`` against gt_N in ``gt_dir``.

    Returns (metric rows, {"accuracy": HistogramReport, "precision": HistogramReport}).
    """
    pred_dir, gt_dir = Path(pred_dir), Path(gt_dir)
    manifest = {}
    if (pred_dir / RUN_MANIFEST).is_file():
        manifest = synthgen.read_manifest(pred_dir / RUN_MANIFEST)
    algorithm = algorithm or manifest.get("algorithm", "unknown")
    video = video or manifest.get("video") or gt_dir.name
    ext = manifest.get("ext", "png")
    indices = frameio.scan_indices(pred_dir, f"{MASK_PATTERN}.{ext}")
    if not indices:
        raise frameio.MissingFileError(f"no prediction masks in {pred_dir}")
    rows, accs, precs = [], [], []
    for i in indices:
        pred = frameio.load_mask(pred_dir / f"{MASK_PATTERN % i}.{ext}")
        gt = frameio.load_mask(_find_gt(gt_dir, i), ground_truth=True)
        cm = metrics.confusion(pred, gt)
        rows.append(metrics.metric_row(video, i, algorithm, cm))
        accs.append(metrics.accuracy(cm))
        prec = metrics.precision_or_none(cm)
        if prec is not None:
            precs.append(prec)
    reports = {
        "accuracy": metrics.histogram(accs, bins),
        "precision": metrics.histogram(precs, bins),
    }
    return rows, reports


def cmd_evaluate(args) -> int:
    rows, reports = evaluate(args.pred, args.gt, args.bins, args.algorithm, args.video)
    algo = rows[0]["algorithm"]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    mpath = metrics.write_metrics_csv(rows, out / f"metrics_{algo}.csv")
    hpath = metrics.write_histogram_csv(reports, out / f"histogram_{algo}.csv")
    if args.json:
        payload = {
            "metrics": rows,
            "histograms": {
                k: {"bin_edges": r.bin_edges, "counts": r.counts, "cumulative": r.cumulative}
                for k, r in reports.items()
            },
        }
        (out / f"metrics_{algo}.json").write_text(json.dumps(payload, indent=2) + "\n")
    print(f"{algo}: {len(rows)} pair(s) -> {mpath}, {hpath}")
    return 0


# ---------------------------------------------------------------- bench


def run_bench(algorithms, frames, frame, warmup_frames: int, repetitions, runs: int = 1,
              params: dict | None = None, multi_worker: bool = False) -> list[bench.TimingReport]:
    """One row per (algorithm, repetition count): the median of ``runs`` fresh warm-up+time runs."""
    reports = []
    for algo in algorithms:
        for reps in repetitions:
            trials = []
            for _ in range(runs):
                model = registry.create(algo, frame.width, frame.height, params)
                bench.warmup(model, frames, warmup_frames)
                trials.append(
                    bench.time_apply(model, frame, reps, warmup_frames, multi_worker=multi_worker)
                )
            reports.append(bench.median_report(trials))
    return reports


def cmd_bench(args) -> int:
    if args.input:
        seq = open_sequence(args.input, args.pattern)
        frames = list(seq.frames())
    else:
        spec = synthgen.SynthSpec(width=args.width, height=args.height, frames=300,
                                  noise_sigma=3.0, seed=args.seed,
                                  start_y=max(0, args.height // 2 - 10),
                                  rect_width=min(20, args.width), rect_height=min(20, args.height))
        frames = [f for f, _ in synthgen.iter_frames(spec)]
    frame = frameio.load_frame(args.frame) if args.frame else frames[args.warmup % len(frames)]
    reports = run_bench(args.algos, frames, frame, args.warmup, args.repetitions, args.runs,
                        _algo_params(args), args.multi_worker)
    rows = [r.as_row() for r in reports]
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=bench.REPORT_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    if args.json:
        out.with_suffix(".json").write_text(json.dumps(rows, indent=2) + "\n")
    for r in reports:
        print(f"{r.algorithm:5s} reps={r.repetitions:6d} mean={r.mean_seconds_per_op * 1e3:8.3f} ms "
              f"fps={r.fps:9.1f}")
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bgsub", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic moving-rectangle sequence")
    p.add_argument("--out", required=True)
    p.add_argument("--width", type=int, default=320)
    p.add_argument("--height", type=int, default=240)
    p.add_argument("--frames", type=int, default=300)
    p.add_argument("--bg", type=int, default=104)
    p.add_argument("--fg", type=int, default=200)
    p.add_argument("--rect-width", type=int, default=20)
    p.add_argument("--rect-height", type=int, default=20)
    p.add_argument("--velocity", type=int, default=2)
    p.add_argument("--start-x", type=int, default=0)
    p.add_argument("--start-y", type=int, default=0)
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ext", choices=["pgm", "png"], default="pgm")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("segment", help="segment target frames after a warm-up lead-in")
    p.add_argument("--algo", choices=sorted(registry.ALGORITHMS))
    p.add_argument("--input", help="directory of numbered frames")
    p.add_argument("--pattern", default="frame_%06d.pgm")
    p.add_argument("--targets", type=parse_index_list, help="e.g. 250,260 or 250-299")
    p.add_argument("--warmup", type=int, default=bench.DEFAULT_WARMUP)
    p.add_argument("--clamp", action="store_true", help="start at the sequence start when the lead-in is short")
    p.add_argument("--out", required=True)
    p.add_argument("--ext", choices=["png", "pgm"], default="png")
    p.add_argument("--video", default=None, help="video name recorded in the manifest")
    p.add_argument("--replay", help="re-run from a run_manifest.txt")
    _add_algo_flags(p)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("evaluate", help="confusion-matrix metrics against ground truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--bins", type=int, default=metrics.DEFAULT_BINS)
    p.add_argument("--out", required=True)
    p.add_argument("--algorithm", default=None)
    p.add_argument("--video", default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", help="warm-up-then-repeat timing")
    p.add_argument("--algos", type=_algorithms, default=["gmg", "mog", "mog2"])
    p.add_argument("--input", help="directory of warm-up frames (default: synthetic scene)")
    p.add_argument("--pattern", default="frame_%06d.pgm")
    p.add_argument("--frame", help="image to time (default: the frame after the warm-up)")
    p.add_argument("--width", type=int, default=320)
    p.add_argument("--height", type=int, default=240)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--warmup", type=int, default=bench.DEFAULT_WARMUP)
    p.add_argument("--repetitions", type=parse_int_list,
                   default=list(bench.DEFAULT_REPETITIONS))
    p.add_argument("--runs", type=int, default=1, help="independent runs per cell; the median is reported")
    p.add_argument("--multi-worker", action="store_true",
                   help="time with BGSUB_THREADS workers instead of one")
    p.add_argument("--out", default="timing.csv")
    p.add_argument("--json", action="store_true")
    _add_algo_flags(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (BgsubError, OSError, ValueError) as exc:
        print(f"bgsub {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

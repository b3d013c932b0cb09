"""Command-line front end.

Exit codes: 0 success, 1 fatal error, 2 partial success (some inputs
skipped). Settings resolve as flag > config file > built-in default.
"""

import argparse
import json
import logging
import os
import sys
from datetime import datetime, timezone

from . import __version__
from .config import read_kv
from .evaluate import (
    ZeroVarianceError,
    format_report,
    intensity_size_report,
    load_ground_truth,
    match,
    write_report,
)
from .pipeline import DetectConfig, detect_batch
from .raster import histogram, list_pgm_files, load_pgm
from .regionprops import read_csv
from .synthgen import PlacementError, SynthConfig, write_synth

EXIT_OK, EXIT_FATAL, EXIT_PARTIAL = 0, 1, 2


def _now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _fail(msg):
    print(f"error: {msg}", file=sys.stderr)
    return EXIT_FATAL


def resolve_detect_config(config_path=None, overrides=None):
    """Defaults, then the config file, then non-None `overrides`."""
    cfg = DetectConfig()
    if config_path:
        cfg = DetectConfig.from_mapping(read_kv(config_path), base=cfg)
    flags = {k: v for k, v in (overrides or {}).items() if v is not None}
    if flags:
        cfg = DetectConfig.from_mapping(flags, base=cfg)
    return cfg


def cmd_detect(args):
    started = _now()
    try:
        cfg = resolve_detect_config(
            args.config,
            {
                "max_iterations": args.max_iterations,
                "min_area": args.min_area,
                "separation": args.separation,
            },
        )
    except (OSError, ValueError) as exc:
        return _fail(str(exc))

    if os.path.isdir(args.input):
        files = list_pgm_files(args.input)
    elif os.path.isfile(args.input):
        files = [args.input]
    else:
        return _fail(f"input not found: {args.input}")

    batch = detect_batch(None, cfg, out_dir=args.out, workers=args.workers, files=files)
    if not batch.results:
        print("error: no processable images", file=sys.stderr)
        code = EXIT_FATAL
    elif batch.skipped:
        code = EXIT_PARTIAL
    else:
        code = EXIT_OK
    for path, res in batch.results.items():
        print(f"{os.path.basename(path)}: {len(res.particles)} particles, "
              f"thresholds {res.thresholds_used}")

    manifest = {
        "tool_version": __version__,
        "command": "detect",
        "config_snapshot": cfg.to_mapping(),
        "input_files": [os.path.basename(f) for f in files],
        "skipped": sorted(os.path.basename(f) for f in batch.skipped),
        "started": started,
        "finished": _now(),
        "exit_code": code,
    }
    with open(os.path.join(args.out, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return code


def cmd_eval(args):
    try:
        particles = read_csv(args.particles)
        gt = load_ground_truth(args.ground_truth)
        report = match(gt, particles, args.radius)
    except (OSError, ValueError) as exc:
        return _fail(str(exc))
    text = format_report(report)
    sys.stdout.write(text)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "report.txt"), "w") as fh:
            fh.write(text)
        write_report(report, os.path.join(args.out, "match.csv"))
    return EXIT_OK


def cmd_synth(args):
    try:
        cfg = SynthConfig.from_mapping(read_kv(args.config))
    except (OSError, ValueError) as exc:
        return _fail(str(exc))
    try:
        paths = write_synth(cfg, args.out, stem=args.name)
    except PlacementError as exc:
        return _fail(str(exc))
    for kind, path in paths.items():
        print(f"{kind}: {path}")
    return EXIT_OK


def cmd_stats(args):
    try:
        particles = read_csv(args.particles)
        r, pairs_csv = intensity_size_report(particles)
    except ZeroVarianceError as exc:
        return _fail(f"zero variance: {exc}")
    except (OSError, ValueError) as exc:
        return _fail(str(exc))
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "intensity_size.csv"), "w") as fh:
        fh.write(pairs_csv)
    with open(os.path.join(args.out, "pearson.txt"), "w") as fh:
        fh.write(f"pearson_r={r:.6f}\n")
    print(f"pearson_r={r:.6f}")
    if args.histogram:
        try:
            bins = histogram(load_pgm(args.histogram))
        except (OSError, ValueError) as exc:
            return _fail(str(exc))
        with open(os.path.join(args.out, "histogram.csv"), "w") as fh:
            fh.write("intensity,count\n")
            fh.writelines(f"{v},{c}\n" for v, c in enumerate(bins.tolist()))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nanofind", description="Recursive nanoparticle detection for SEM images."
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="detect particles in a PGM file or directory")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--max-iterations", type=int)
    p.add_argument("--min-area", type=int)
    p.add_argument("--separation", choices=["morphological", "watershed"])
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("eval", help="match detections against point labels")
    p.add_argument("particles")
    p.add_argument("ground_truth")
    p.add_argument("--radius", type=float, default=10.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="generate a synthetic test image")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--name", default="synth")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("stats", help="intensity/size correlation of a particle CSV")
    p.add_argument("particles")
    p.add_argument("--out", required=True)
    p.add_argument("--histogram", metavar="IMAGE")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

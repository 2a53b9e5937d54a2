"""Command line interface.

Subcommands: ``recommend`` (pick annotation frames), ``propagate`` (spread
annotations over the sequence), ``benchmark`` (evaluate against ground
truth), ``serve`` (local HTTP bridge for the browser UI).

Exit codes: 0 success, 1 usage error, 2 data error.
"""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from .config import RunConfig
from .data import AnnotationSet
from .io import load_dataset_sequence, load_mask, load_sequence, save_mask


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="videocutout",
                     description="Interactive video object cutout engine")
    parser.add_argument("--config", metavar="FILE", help="key=value config file")
    parser.add_argument("--set", metavar="KEY=VALUE", action="append", default=[],
                        dest="overrides", help="override one config key")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("recommend", parents=[], help="pick frames to annotate")
    p.add_argument("--seq", required=True, metavar="DIR",
                   help="sequence directory (frames/ inside, or plain image dir)")
    p.add_argument("-k", type=int, required=True, help="number of annotation frames")
    p.add_argument("--matrix-csv", metavar="PATH",
                   help="also write the propagation-error matrix as CSV")

    p = sub.add_parser("propagate", help="propagate annotations over the sequence")
    p.add_argument("--seq", required=True, metavar="DIR")
    p.add_argument("--ann", action="append", default=[], metavar="IDX=PATH",
                   help="annotation mask for a 1-based frame index (repeatable); "
                        "omit to use every mask in <seq>/masks/")
    p.add_argument("--forward-only", action="store_true")
    p.add_argument("--out", metavar="DIR", default="out_masks",
                   help="directory for the result masks")
    p.add_argument("--dump-superpixels", metavar="DIR")
    p.add_argument("--dump-confidence", metavar="DIR")
    p.add_argument("--dump-uncertainty", metavar="DIR")

    p = sub.add_parser("benchmark", help="evaluate propagation on a dataset")
    p.add_argument("--root", required=True, metavar="DIR")
    p.add_argument("--protocol", required=True, choices=["davis", "jumpcut"])
    p.add_argument("--csv", metavar="PATH", help="write the report as CSV")

    p = sub.add_parser("serve", help="run the local annotation service")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui-dir", metavar="DIR", help="built UI bundle to serve at /")
    return parser


def _load_config(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    cfg.apply_overrides(args.overrides)
    return cfg.validate()


def _sequence_dir(path: str) -> Path:
    p = Path(path)
    return p / "frames" if (p / "frames").is_dir() else p


def _cmd_recommend(args, cfg) -> int:
    sequence = load_sequence(_sequence_dir(args.seq))
    from .pipeline import CutoutSession

    session = CutoutSession(sequence, cfg)
    frames = session.recommend(args.k)
    print(" ".join(str(f) for f in frames))
    if args.matrix_csv:
        with open(args.matrix_csv, "w", newline="") as fh:
            writer = csv.writer(fh)
            for row in session.error_matrix_:
                writer.writerow([f"{v:.6f}" for v in row])
    return 0


def _cmd_propagate(args, cfg) -> int:
    seq_dir = _sequence_dir(args.seq)
    sequence = load_sequence(seq_dir)
    shape = (sequence.height, sequence.width)
    if args.ann:
        entries = []
        for item in args.ann:
            if "=" not in item:
                raise SystemExit(1)
            idx, path = item.split("=", 1)
            entries.append((int(idx), load_mask(path, int(idx), expected_shape=shape)))
        annotations = AnnotationSet(tuple(sorted(entries)))
    else:
        _, masks = load_dataset_sequence(Path(args.seq))
        if not masks:
            print("error: no annotations given and no masks/ directory", file=sys.stderr)
            return 2
        annotations = AnnotationSet(tuple(sorted(masks.items())))
    dumps = {}
    if args.dump_superpixels:
        dumps["superpixels"] = args.dump_superpixels
    if args.dump_confidence:
        dumps["confidence"] = args.dump_confidence
    if args.dump_uncertainty:
        dumps["uncertainty"] = args.dump_uncertainty

    from .pipeline import propagate

    masks = propagate(sequence, annotations, cfg,
                      forward_only=args.forward_only, dumps=dumps)
    out = Path(args.out)
    for m in masks:
        save_mask(m, out / f"{m.frame_index - 1:05d}.png")
    print(f"wrote {len(masks)} masks to {out}")
    return 0


def _cmd_benchmark(args, cfg) -> int:
    from .pipeline import benchmark

    report = benchmark(args.root, args.protocol, cfg)
    print(report.format_table())
    if args.csv:
        report.to_csv(args.csv)
    return 0


def _cmd_serve(args, cfg) -> int:
    import os

    from .service import serve

    ui_dir = args.ui_dir or os.environ.get("VIDEOCUTOUT_UI_DIR")
    if ui_dir is None and Path("frontend/dist").is_dir():
        ui_dir = "frontend/dist"
    serve(host=args.host, port=args.port, config=cfg, ui_dir=ui_dir)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
        handler = {
            "recommend": _cmd_recommend,
            "propagate": _cmd_propagate,
            "benchmark": _cmd_benchmark,
            "serve": _cmd_serve,
        }[args.command]
        return handler(args, cfg)
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: ``sglhn {generate,learn,sweep,realdata}``.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 solver failure
(single runs only; sweeps record failures in the ``status`` column).
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import experiments as ex

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_SOLVER = 0, 2, 3, 4


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="flat key = value config file")
    common.add_argument("--seed", type=_u64, help="base seed (overrides the config)")
    common.add_argument("--out", metavar="PATH", help="output file or directory")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="sglhn", description=(
        "Signed graph learning from smooth signals with hidden nodes."))
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("generate", parents=[common],
                   help="write a synthetic dataset directory")

    learn = sub.add_parser("learn", parents=[common],
                           help="learn a graph from a dataset directory")
    learn.add_argument("dataset", metavar="DIR")
    learn.add_argument("--method", choices=ex.METHODS, default="sgl-hncs")

    for name, text in (("sweep", "run a hidden-count or signal-count sweep"),
                       ("realdata", "run the pipeline on a signed edge list")):
        sp = sub.add_parser(name, parents=[common], help=text)
        if name == "realdata":
            sp.add_argument("edges", metavar="EDGE_LIST")
        sp.add_argument("--method", choices=ex.METHODS, action="append",
                        help="restrict to this method (repeatable)")
        sp.add_argument("--workers", type=_positive, help="parallel sweep cells")
    return p


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {"seed": args.seed}
    if getattr(args, "workers", None):
        overrides["workers"] = args.workers
    if args.command in ("sweep", "realdata") and args.method:
        overrides["methods"] = tuple(args.method)
    defaults = ex.REALDATA_DEFAULTS if args.command == "realdata" else None
    try:
        cfg = ex.load_config(args.config, defaults, **overrides)
        if args.command == "generate":
            path = ex.cmd_generate(cfg, args.out or "dataset")
            print(f"wrote dataset to {path}")
        elif args.command == "learn":
            rows, trace = ex.cmd_learn(args.dataset, args.method, cfg, args.out or cfg.out)
            print(f"wrote {len(rows)} rows to {args.out or cfg.out}; trace in {trace}")
            if rows[0]["status"] != "ok":
                print(f"solver failure: {rows[0]['status']}", file=sys.stderr)
                return EXIT_SOLVER
        elif args.command == "sweep":
            if cfg.sweep == "none":
                raise ex.ConfigError("sweep: set sweep = hidden_count or signal_count")
            rows = ex.cmd_sweep(cfg, args.out)
            print(f"wrote {len(rows)} rows to {args.out or cfg.out}")
        else:
            rows = ex.cmd_realdata(args.edges, cfg, args.out)
            print(f"wrote {len(rows)} rows to {args.out or cfg.out}")
    except ex.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ex.DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

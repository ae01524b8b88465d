"""Command-line entry point: ``brainstorm run|compare|sweep|catalog``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .benchmarks import CATALOG_SEED, catalog_manifest
from .core import ConfigurationError, InsufficientDataError
from .harness import compare, default_manifest, load_manifest, run_manifest, sweep

EXIT_OK, EXIT_VALIDATION, EXIT_IO, EXIT_INSUFFICIENT = 0, 2, 3, 4


def _manifest(path, seed_base):
    if path == "default":
        return default_manifest(seed_base=seed_base or 0)
    return load_manifest(path, seed_base=seed_base)


def _cmd_run(args):
    m = _manifest(args.manifest, args.seed_base)
    out = run_manifest(m, args.out, args.workers)
    print(f"wrote {out / 'trials.csv'}, {out / 'convergence.csv'}, {out / 'summary.csv'}")


def _cmd_compare(args):
    report = compare(args.trials, args.control, args.test, out_dir=args.out)
    print(report["text"])


def _cmd_sweep(args):
    m = _manifest(args.manifest, args.seed_base)
    values = [v for v in args.values.split(",") if v.strip()]
    report = sweep(args.param, values, m, out_dir=args.out, workers=args.workers)
    print(report["text"])


def _cmd_catalog(args):
    text = catalog_manifest(args.seed)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="brainstorm",
                                description="Brain storm optimization experiment harness")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="execute a manifest grid")
    r.add_argument("manifest", help="manifest JSON path, or 'default'")
    r.add_argument("--out", default=None)
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--seed-base", type=int, default=None)
    r.set_defaults(func=_cmd_run)

    c = sub.add_parser("compare", help="statistical comparison of a trials.csv")
    c.add_argument("trials")
    c.add_argument("--control", required=True)
    c.add_argument("--test", choices=("wilcoxon", "friedman"), default="wilcoxon")
    c.add_argument("--out", default=None)
    c.set_defaults(func=_cmd_compare)

    s = sub.add_parser("sweep", help="parameter sweep with Friedman ranking")
    s.add_argument("manifest")
    s.add_argument("--param", required=True)
    s.add_argument("--values", required=True, help="comma-separated list")
    s.add_argument("--out", default=None)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--seed-base", type=int, default=None)
    s.set_defaults(func=_cmd_sweep)

    k = sub.add_parser("catalog", help="print the benchmark catalog manifest")
    k.add_argument("--seed", type=int, default=CATALOG_SEED)
    k.add_argument("--out", default=None)
    k.set_defaults(func=_cmd_catalog)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        args.func(args)
    except InsufficientDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INSUFFICIENT
    except (ConfigurationError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

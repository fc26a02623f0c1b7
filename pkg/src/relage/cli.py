"""Command-line interface.

Subcommands:

    compare  --config FILE [--out-dir DIR]   full comparison report (JSON)
    classify --config FILE                   ageing-class table per level
    curves   --config FILE --out-dir DIR     CSV curve export
    mc-check --config FILE [--seed N]        Monte Carlo agreement check

Exit codes: 0 = ran with decisive verdicts, 2 = ran but some verdicts are
inconclusive, 1 = error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from .ageing import CLASS_TAGS, classical_name
from .montecarlo import ks_distance_phi
from .reporting import ComparisonConfig, load_config, run_comparison, emit_curves

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INCONCLUSIVE = 2


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="relage",
        description="Relative-ageing comparisons of lifetime distributions",
    )
    sub = p.add_subparsers(dest="command", required=True)

    compare = sub.add_parser("compare", help="run a two-distribution comparison")
    compare.add_argument("--config", required=True)
    compare.add_argument("--out-dir", default=None)

    classify = sub.add_parser("classify", help="classify into ageing classes")
    classify.add_argument("--config", required=True)

    curves = sub.add_parser("curves", help="export curve CSV files")
    curves.add_argument("--config", required=True)
    curves.add_argument("--out-dir", required=True)

    mc = sub.add_parser("mc-check", help="Monte Carlo agreement check")
    mc.add_argument("--config", required=True)
    mc.add_argument("--seed", type=int, default=None)
    return p


def _cmd_compare(args) -> int:
    cfg = load_config(args.config)
    if cfg.y is None:
        print("compare needs both distributions x and y", file=sys.stderr)
        return EXIT_ERROR
    report, tables = run_comparison(cfg, return_tables=True)
    out_dir = args.out_dir or cfg.out_dir
    text = report.to_json()
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, "report.json")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        print(path)
    else:
        print(text)
    for line in report.conclusions:
        print(line)
    return EXIT_INCONCLUSIVE if report.has_inconclusive else EXIT_OK


def _cmd_classify(args) -> int:
    cfg = load_config(args.config)
    report = run_comparison(cfg)
    inconclusive = False
    for role, rep in report.classifications.items():
        print(f"{role}: {rep.label}")
        for s, tags in sorted(rep.verdicts.items()):
            cells = []
            for tag in CLASS_TAGS:
                v = tags[tag]
                name = classical_name(s, tag)
                alias = f" ({name})" if name else ""
                cells.append(f"{s}-{tag}{alias}: {v.kind}")
                inconclusive |= v.kind == "inconclusive"
            print("  " + "; ".join(cells))
    return EXIT_INCONCLUSIVE if inconclusive else EXIT_OK


def _cmd_curves(args) -> int:
    cfg = load_config(args.config)
    _, tables = run_comparison(
        dataclasses.replace(cfg, mc_enabled=False), return_tables=True)
    paths = emit_curves(tables, args.out_dir, cfg.orderings)
    for path in paths:
        print(path)
    return EXIT_OK


def _cmd_mc(args) -> int:
    cfg = load_config(args.config)
    if cfg.y is None:
        print("mc-check needs both distributions x and y", file=sys.stderr)
        return EXIT_ERROR
    mc = cfg.mc if args.seed is None else dataclasses.replace(cfg.mc,
                                                              seed=args.seed)
    cfg = dataclasses.replace(cfg, mc_enabled=True, mc=mc)
    report, tables = run_comparison(cfg, return_tables=True)
    results = report.monte_carlo or {"ks": {}}
    print(json.dumps({"n": cfg.mc.n, "seed": cfg.mc.seed,
                      "ks": results["ks"]}, indent=2))
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    handlers = {
        "compare": _cmd_compare,
        "classify": _cmd_classify,
        "curves": _cmd_curves,
        "mc-check": _cmd_mc,
    }
    try:
        return handlers[args.command](args)
    except Exception as exc:  # surface the failing stage, no partial output
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

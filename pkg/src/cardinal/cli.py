"""Command-line front end: ``run``, ``compare`` and ``validate``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from .config import load_config
from .errors import ConfigError
from .harness import compare_runs
from .metrics import summarize, write_csv, write_summary
from .netsim import run

EXIT_OK, EXIT_CONFIG, EXIT_CRITERION, EXIT_IO = 0, 1, 2, 3


def parse_seeds(text: str) -> List[int]:
    """``"3"`` or an inclusive range ``"0..9"``."""
    try:
        if ".." in text:
            lo, hi = (int(x) for x in text.split("..", 1))
        else:
            lo = hi = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or A..B, got {text!r}") from None
    if lo < 0 or hi < lo:
        raise argparse.ArgumentTypeError(f"empty or negative seed range {text!r}")
    return list(range(lo, hi + 1))


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    trace_fh = open(out / "trace.jsonl", "w", encoding="utf-8") if args.trace else None
    try:
        sink = None
        if trace_fh is not None:
            sink = lambda rows: trace_fh.writelines(json.dumps(r, sort_keys=True) + "\n" for r in rows)
        world = run(cfg, args.seed, strict=args.strict, workers=args.workers, trace_sink=sink)
    finally:
        if trace_fh is not None:
            trace_fh.close()
    write_csv(out / "metrics.csv", world.metrics, cfg.antigens)
    write_summary(out / "summary.json", summarize(world))
    print(f"wrote {out / 'metrics.csv'} and {out / 'summary.json'}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    cfg = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = compare_runs(cfg, args.seeds, workers=args.workers)
    (out / "comparison.json").write_text(
        json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    with open(out / "comparison.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["seed", "antigen", "defended_final", "defended_peak", "baseline_final",
                    "baseline_peak", "ratio", "false_positive_strong"])
        for r in report.rows:
            w.writerow([r.seed, r.antigen, r.defended_final, r.defended_peak, r.baseline_final,
                        r.baseline_peak, "" if r.ratio is None else r.ratio, r.false_positive_strong])
    for antigen, outcome in report.outcome.items():
        ratio = report.median_ratio[antigen]
        shown = "n/a" if ratio is None else f"{ratio:.3f}"
        print(f"{antigen}: median peak ratio {shown}, "
              f"{report.seeds_within_ratio[antigen]}/{len(report.seeds)} seeds within bound: {outcome}")
    print(f"verdict: {report.verdict}")
    return EXIT_OK if report.passed else EXIT_CRITERION


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    print(f"ok: {cfg.topology.hosts} hosts, antigens {', '.join(cfg.antigens) or '(none)'}, "
          f"horizon {cfg.horizon}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cardinal", description="Cooperative worm-response simulator.")
    p.add_argument("-v", "--verbose", action="store_true", help="also log progress messages")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one seed and write metrics")
    r.add_argument("--config", required=True)
    r.add_argument("--seed", type=int, required=True)
    r.add_argument("--out", required=True)
    r.add_argument("--trace", action="store_true", help="also write trace.jsonl")
    r.add_argument("--strict", action="store_true", help="check invariants every step")
    r.add_argument("--workers", type=int, default=1, help="threads for host-parallel stepping")
    r.set_defaults(func=_cmd_run)

    c = sub.add_parser("compare", help="defended vs baseline over a seed range")
    c.add_argument("--config", required=True)
    c.add_argument("--seeds", type=parse_seeds, required=True, help="N or A..B (inclusive)")
    c.add_argument("--out", required=True)
    c.add_argument("--workers", type=int, default=1, help="processes for independent runs")
    c.set_defaults(func=_cmd_compare)

    v = sub.add_parser("validate", help="check a config file")
    v.add_argument("--config", required=True)
    v.set_defaults(func=_cmd_validate)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

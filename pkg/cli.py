"""Command-line runner for the seat apportionment engine.

Subcommands: allocate, metrics, simulate, whatif, backtest. Every command
prints a JSON document (or a table with --format table). Exit codes: 0 ok,
2 unreadable input, 3 rule violation, 4 simulation without --seed.
"""
from typing import List, Optional, Tuple
import argparse
import csv
import logging
import sys

from src import metrics, report
from src.apportion import MODIFIED, PURE
from src.data import PRESETS
from src.election_io import load_election, load_rules, parse_delta
from src.errors import ApportionmentError, ElectionFileError
from src.logging_config import configure_logging
from src.montecarlo import PerturbationConfig, run_batch
from src.systems import CURRENT, DYNAMIC, SYSTEMS, DynamicOptions, ElectionRules, allocate, what_if

logger = logging.getLogger("cli")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_RULES = 3
EXIT_NO_SEED = 4

DEFAULT_PRESET = {CURRENT: "swedish-current", DYNAMIC: "dynamic-pure"}


def resolve_rules(args, system: str) -> Tuple[ElectionRules, DynamicOptions]:
    if args.rules:
        rules, opts = load_rules(args.rules)
    else:
        rules, opts = PRESETS[args.preset or DEFAULT_PRESET[system]], DynamicOptions()
    if getattr(args, "min_permanent", None) is not None or getattr(args, "floor", None) is not None:
        opts = DynamicOptions(
            args.min_permanent if args.min_permanent is not None else opts.min_permanent,
            args.floor if args.floor is not None else opts.constituency_floor,
        )
    return rules, opts


def emit(doc, text: Optional[str], fmt: str) -> None:
    if fmt == "table" and text is not None:
        print(text)
    else:
        print(report.dumps(doc))


def cmd_allocate(args) -> int:
    election = load_election(args.election)
    rules, opts = resolve_rules(args, args.system)
    outcome = allocate(election, rules, args.system, opts)
    emit(report.outcome_to_dict(outcome), report.render_table(outcome), args.format)
    return EXIT_OK


def cmd_metrics(args) -> int:
    election = load_election(args.election)
    rules, opts = resolve_rules(args, args.system)
    outcome = allocate(election, rules, args.system, opts)
    result = metrics.report(election, outcome, args.category, args.basis, args.sl_weighting)
    doc = report.metrics_to_dict(result)
    doc["system"] = args.system
    emit(doc, report.render_metrics(result), args.format)
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.seed is None:
        print("simulate needs --seed; results are only reproducible from an explicit seed", file=sys.stderr)
        return EXIT_NO_SEED
    election = load_election(args.election)
    rules, opts = resolve_rules(args, DYNAMIC)
    if args.divisor:
        rules = rules.with_within(PURE if args.divisor == "pure" else MODIFIED)
    config = PerturbationConfig(seed=args.seed, n_replications=args.n, factor_low=args.low, factor_high=args.high)
    stats = run_batch(
        election, rules, opts, config,
        compare_modified=args.compare_modified, scan=not args.no_scan, workers=args.threads,
    )
    if args.histogram:
        with open(args.histogram, "w", newline="", encoding="utf-8") as f:
            writer = csv.DictWriter(f, fieldnames=["series", "bin", "count"])
            writer.writeheader()
            for row in report.histogram_rows(stats):
                writer.writerow(row)
        logger.info("wrote histogram to %s", args.histogram)
    print(report.dumps(report.batch_to_dict(stats)))
    return EXIT_OK


def cmd_whatif(args) -> int:
    election = load_election(args.election)
    rules, opts = resolve_rules(args, args.system)
    deltas = [parse_delta(d) for d in args.delta]
    result = what_if(election, rules, args.system, deltas, opts)
    doc = report.whatif_to_dict(result)
    if not args.full:
        del doc["before"], doc["after"]
    emit(doc, report.render_whatif(result), args.format)
    return EXIT_OK


def cmd_backtest(args) -> int:
    from src.backtest import backtest_rows, elections_from_args, write_csv

    rows = backtest_rows(elections_from_args(args.elections))
    print(report.dumps({"rows": rows}))
    if args.csvfile:
        write_csv(rows, args.csvfile)
    return EXIT_OK


def _add_rules_args(p: argparse.ArgumentParser, with_system: bool = True) -> None:
    p.add_argument("election", help="Election CSV file")
    p.add_argument("--rules", help="Rules JSON file (overrides --preset)")
    p.add_argument("--preset", choices=sorted(PRESETS), help="Built-in rules preset")
    if with_system:
        p.add_argument("--system", choices=SYSTEMS, default=DYNAMIC, help="Electoral system (default dynamic)")
    p.add_argument("--min-permanent", type=int, default=None, help="Dynamic method: minimum permanent seats")
    p.add_argument("--floor", type=int, default=None, help="Dynamic method: permanent seats given to every constituency first")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description="Two-tier seat apportionment: current Swedish system and dynamic adjustment")
    p.add_argument("--verbose", action="store_true", help="Debug logging")
    p.add_argument("--quiet", action="store_true", help="Warnings only")
    p.add_argument("--format", choices=["json", "table"], default="json", help="Output format (default json)")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("allocate", help="Allocate seats and print the seat matrix")
    _add_rules_args(a)
    a.set_defaults(func=cmd_allocate)

    m = sub.add_parser("metrics", help="Disproportionality measures of an allocation")
    _add_rules_args(m)
    m.add_argument("--category", choices=metrics.CATEGORIES, default=metrics.PARTY)
    m.add_argument("--basis", choices=metrics.BASES, default=None, help="Constituency basis (default entitled)")
    m.add_argument("--sl-weighting", choices=metrics.WEIGHTINGS, default=None)
    m.set_defaults(func=cmd_metrics)

    s = sub.add_parser("simulate", help="Perturbation batch around an election")
    _add_rules_args(s, with_system=False)
    s.add_argument("--seed", type=int, default=None, help="Required; replication k uses streams seeded by (seed, k)")
    s.add_argument("--n", type=int, default=10000, help="Number of replications (default 10000)")
    s.add_argument("--low", type=float, default=0.9, help="Lower perturbation factor (default 0.9)")
    s.add_argument("--high", type=float, default=1.1, help="Upper perturbation factor (default 1.1)")
    s.add_argument("--divisor", choices=["pure", "modified"], default=None, help="First divisor inside constituencies")
    s.add_argument("--threads", type=int, default=1, help="Worker processes (default 1)")
    s.add_argument("--compare-modified", action="store_true", help="Also run the dynamic method with the modified divisor")
    s.add_argument("--no-scan", action="store_true", help="Skip the non-monotonicity scan")
    s.add_argument("--histogram", help="Write histogram rows (series,bin,count) to this CSV file")
    s.set_defaults(func=cmd_simulate)

    w = sub.add_parser("whatif", help="Seat changes after vote deltas")
    _add_rules_args(w)
    w.add_argument("--delta", nargs="+", action="extend", default=[], help="constituency:party:+n (repeatable)")
    w.add_argument("--full", action="store_true", help="Include both full outcomes in the document")
    w.set_defaults(func=cmd_whatif)

    b = sub.add_parser("backtest", help="Adjustment seats and measures for recorded elections")
    b.add_argument("elections", nargs="*", help="Election CSV files (default: bundled 2010 election)")
    b.add_argument("--csv", dest="csvfile", help="Optional CSV output file")
    b.set_defaults(func=cmd_backtest)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose, args.quiet)
    try:
        return args.func(args)
    except ElectionFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ApportionmentError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RULES


if __name__ == "__main__":
    sys.exit(main())

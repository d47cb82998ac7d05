"""Back-test both systems on one or more recorded elections.

Usage:
  python src/backtest.py                         # runs the bundled 2010 election
  python src/backtest.py data/sweden_2010.csv    # any election files
  python src/backtest.py --csv out.csv data/sweden_2010.csv
"""
from typing import Dict, List, Optional, Sequence, Tuple
import argparse
import csv
import json
import logging
import os
import sys

if __package__ in (None, ""):
    sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src import metrics
from src.apportion import MODIFIED, PURE
from src.data import SWEDEN_2010, SWEDISH_CURRENT
from src.election_io import load_election
from src.logging_config import configure_logging
from src.systems import ElectionInput, ElectionRules, allocate_current, allocate_dynamic

logger = logging.getLogger(__name__)

FIELDS = [
    "election",
    "adjustment_current",
    "adjustment_dynamic_pure",
    "adjustment_dynamic_modified",
    "lh_party_current",
    "lh_party_dynamic",
    "lh_constituency_current",
    "lh_constituency_dynamic",
    "sl_constituency_current",
    "sl_constituency_dynamic",
]


def backtest_row(name: str, election: ElectionInput, rules: ElectionRules = SWEDISH_CURRENT) -> Dict[str, object]:
    """One row: adjustment seats per system plus party and constituency measures.

    `rules` are the current-system rules; the dynamic runs reuse them with the
    pure and the modified divisor inside constituencies.
    """
    current = allocate_current(election, rules)
    dynamic = allocate_dynamic(election, rules.with_within(PURE))
    dynamic_modified = allocate_dynamic(election, rules.with_within(MODIFIED))
    row = {
        "election": name,
        "adjustment_current": current.adjustment_count,
        "adjustment_dynamic_pure": dynamic.adjustment_count,
        "adjustment_dynamic_modified": dynamic_modified.adjustment_count,
    }
    for label, outcome in (("current", current), ("dynamic", dynamic)):
        party = metrics.report(election, outcome, metrics.PARTY)
        constituency = metrics.report(election, outcome, metrics.CONSTITUENCY)
        row[f"lh_party_{label}"] = str(party.lh_rounded)
        row[f"lh_constituency_{label}"] = str(constituency.lh_rounded)
        row[f"sl_constituency_{label}"] = str(constituency.sl_rounded)
    logger.info("backtest %s: %d/%d/%d adjustment seats", name, row["adjustment_current"],
                row["adjustment_dynamic_pure"], row["adjustment_dynamic_modified"])
    return {key: row[key] for key in FIELDS}


def backtest_rows(
    named_inputs: Sequence[Tuple[str, ElectionInput]], rules: ElectionRules = SWEDISH_CURRENT
) -> List[Dict[str, object]]:
    return [backtest_row(name, election, rules) for name, election in named_inputs]


def write_csv(rows: List[Dict[str, object]], path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=FIELDS)
        writer.writeheader()
        for r in rows:
            writer.writerow(r)
    logger.info("wrote %d backtest rows to %s", len(rows), path)


def parse_args(argv: List[str]):
    p = argparse.ArgumentParser(description="Back-test the current and the dynamic system")
    p.add_argument("elections", nargs="*", help="Election CSV files (default: bundled 2010 election)")
    p.add_argument("--csv", dest="csvfile", help="Optional CSV output file")
    return p.parse_args(argv)


def elections_from_args(paths: Optional[List[str]]) -> List[Tuple[str, ElectionInput]]:
    paths = paths or [SWEDEN_2010]
    return [(os.path.splitext(os.path.basename(p))[0], load_election(p)) for p in paths]


def main(argv: List[str]):
    args = parse_args(argv)
    configure_logging()
    rows = backtest_rows(elections_from_args(args.elections))
    print(json.dumps(rows, indent=2))
    if args.csvfile:
        write_csv(rows, args.csvfile)
        print(f"Wrote CSV to {args.csvfile}")


if __name__ == "__main__":
    main(sys.argv[1:])

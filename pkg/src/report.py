"""Report documents for the CLI.

Every command builds one JSON-serialisable dict; the human-readable table is
rendered from that same outcome, never recomputed.
"""
from fractions import Fraction
from typing import Any, Dict, List
import json

from .metrics import DisproportionalityReport
from .montecarlo import BatchStats, SeatHistogram
from .systems import SeatOutcome, WhatIfResult


def dumps(doc: Dict[str, Any]) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False)


def _exact(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def outcome_to_dict(outcome: SeatOutcome) -> Dict[str, Any]:
    parties, labels = outcome.parties, outcome.constituencies
    return {
        "system": outcome.system,
        "parties": list(parties),
        "constituencies": list(labels),
        "cells": [
            {
                "constituency": labels[i],
                "party": parties[j],
                "permanent": outcome.permanent[i][j],
                "adjustment": outcome.adjustment[i][j],
            }
            for i in range(len(labels))
            for j in range(len(parties))
        ],
        "permanent": [list(row) for row in outcome.permanent],
        "adjustment": [list(row) for row in outcome.adjustment],
        "party_totals": dict(zip(parties, outcome.party_totals())),
        "constituency_totals": dict(zip(labels, outcome.constituency_totals())),
        "national_targets": dict(zip(parties, outcome.national_targets)),
        "final_targets": dict(zip(parties, outcome.final_targets)),
        "but_parties": [parties[j] for j in outcome.but_parties],
        "but_rounds": outcome.but_rounds,
        "stop_index": outcome.stop_index,
        "permanent_count": outcome.permanent_count,
        "adjustment_count": outcome.adjustment_count,
        "constituency_seats": (
            dict(zip(labels, outcome.constituency_seats)) if outcome.constituency_seats is not None else None
        ),
        "award_log": [
            {
                "seat": r.seat,
                "constituency": labels[r.constituency],
                "party": parties[r.party],
                "phase": r.phase,
                "tie": r.tie,
            }
            for r in outcome.award_log
        ],
        "ties": len(outcome.ties),
        "notes": list(outcome.notes),
    }


def render_table(outcome: SeatOutcome) -> str:
    """Seat matrix with `permanent+adjustment` cells, one row per constituency."""
    parties = outcome.parties
    width = max(len(c) for c in outcome.constituencies + ("Total",))

    def cell(p: int, a: int) -> str:
        return f"{p}+{a}" if a else str(p)

    lines: List[str] = [" ".join([" " * width] + [f"{p:>6}" for p in parties] + [f"{'Sum':>6}"])]
    for label, prow, arow in zip(outcome.constituencies, outcome.permanent, outcome.adjustment):
        cells = [f"{cell(p, a):>6}" for p, a in zip(prow, arow)]
        lines.append(" ".join([f"{label:<{width}}"] + cells + [f"{cell(sum(prow), sum(arow)):>6}"]))
    perm = outcome.permanent_by_party()
    totals = outcome.party_totals()
    lines.append(" ".join([f"{'Total':<{width}}"] + [f"{t:>6}" for t in totals] + [f"{sum(totals):>6}"]))
    lines.append(" ".join([f"{'Target':<{width}}"] + [f"{t:>6}" for t in outcome.national_targets] + [" " * 6]))
    if outcome.but_parties:
        kept = ", ".join(
            f"{parties[j]} (+{perm[j] - outcome.national_targets[j]})" for j in outcome.but_parties
        )
        lines.append(f"BUT: {kept}")
    if outcome.stop_index is not None:
        lines.append(f"Stop for permanent seats after {outcome.stop_index} seats")
    lines.append(f"Adjustment seats: {outcome.adjustment_count}")
    for note in outcome.notes:
        lines.append(f"Note: {note}")
    return "\n".join(lines)


def metrics_to_dict(report: DisproportionalityReport) -> Dict[str, Any]:
    return {
        "category": report.category,
        "basis": report.basis,
        "sl_weighting": report.sl_weighting,
        "lh": str(report.lh_rounded),
        "sl": str(report.sl_rounded),
        "lh_exact": _exact(report.lh),
        "sl_exact": _exact(report.sl),
        "lh_float": float(report.lh),
        "sl_float": float(report.sl),
        "contributions": [
            {
                "label": c.label,
                "vote_share": float(c.vote_share),
                "seat_share": float(c.seat_share),
                "lh": float(c.lh),
                "sl": float(c.sl),
            }
            for c in report.contributions
        ],
    }


def render_metrics(report: DisproportionalityReport) -> str:
    return f"{report.category} ({report.basis}, SL weighted by {report.sl_weighting}): LH {report.lh_rounded}  SL {report.sl_rounded}"


def whatif_to_dict(result: WhatIfResult) -> Dict[str, Any]:
    return {
        "system": result.before.system,
        "changes": [
            {
                "constituency": c.constituency,
                "party": c.party,
                "permanent": [c.permanent_before, c.permanent_after],
                "adjustment": [c.adjustment_before, c.adjustment_after],
                "seats_delta": c.seats_delta,
            }
            for c in result.changes
        ],
        "party_deltas": result.party_deltas(),
        "before": outcome_to_dict(result.before),
        "after": outcome_to_dict(result.after),
    }


def render_whatif(result: WhatIfResult) -> str:
    if not result.changes:
        return "No seat changes"
    lines = []
    for c in result.changes:
        lines.append(
            f"{c.constituency} {c.party}: permanent {c.permanent_before}->{c.permanent_after}, "
            f"adjustment {c.adjustment_before}->{c.adjustment_after} ({c.seats_delta:+d})"
        )
    return "\n".join(lines)


def _histogram_to_dict(h: SeatHistogram) -> Dict[str, Any]:
    return {
        "mean": h.mean,
        "max": h.maximum,
        "min": h.minimum,
        "std": h.std,
        "bins": [{"bin": b, "count": c} for b, c in h.bins],
    }


def batch_to_dict(stats: BatchStats) -> Dict[str, Any]:
    doc: Dict[str, Any] = {
        "seed": stats.config.seed,
        "n_replications": stats.n_replications,
        "factor_low": stats.config.factor_low,
        "factor_high": stats.config.factor_high,
        "adjustment_seats": _histogram_to_dict(stats.adjustment),
        "but_count": stats.but_count,
        "but_rate": stats.but_rate,
        "measures": {
            name: {"lh_mean": m.lh_mean, "lh_max": m.lh_max, "sl_mean": m.sl_mean, "sl_max": m.sl_max}
            for name, m in stats.measures.items()
        },
        "sl_dynamic_better": stats.sl_dynamic_better,
    }
    if stats.modified_adjustment is not None:
        doc["modified_adjustment_seats"] = _histogram_to_dict(stats.modified_adjustment)
    if stats.nonmono is not None:
        n = stats.nonmono
        doc["nonmono"] = {
            "triples": n.triples,
            "concentrated_lost_permanent": n.concentrated_lost_permanent,
            "concentrated_gained_adjustment": n.concentrated_gained_adjustment,
            "concentrated_candidate_lost": n.concentrated_candidate_lost,
            "proportional_candidate_lost": n.proportional_candidate_lost,
        }
    return doc


def histogram_rows(stats: BatchStats) -> List[Dict[str, Any]]:
    """(series, bin, count) rows for plotting, decade bins."""
    rows = [{"series": "dynamic", "bin": b, "count": c} for b, c in stats.adjustment.bins]
    if stats.modified_adjustment is not None:
        rows += [{"series": "dynamic-modified", "bin": b, "count": c} for b, c in stats.modified_adjustment.bins]
    return rows

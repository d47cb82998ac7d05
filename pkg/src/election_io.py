"""Election and rules files.

Election files are UTF-8 CSV: a header `constituency,<party>,...,entitled`,
then one row per constituency. Lines starting with `#` and blank lines are
ignored. Errors carry the 1-based line and field number.

Rules files are JSON objects mirroring ElectionRules, plus an optional
`dynamic` object for DynamicOptions.
"""
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Tuple
import csv
import io
import json
import logging

from .apportion import MODIFIED, PURE, DivisorSequence, TieRule
from .errors import ApportionmentError, ElectionFileError, InvalidRules
from .systems import Delta, DynamicOptions, ElectionInput, ElectionRules

logger = logging.getLogger(__name__)

ENTITLED_COLUMN = "entitled"

DIVISOR_PRESETS = {"pure": PURE, "modified-1.4": MODIFIED}
DIVISOR_FIELDS = ("within_constituency_divisors", "adjustment_divisors", "national_divisors", "list_divisors")
THRESHOLD_FIELDS = ("national_threshold", "constituency_threshold")
INT_FIELDS = ("house_size", "permanent_seats")
RULE_KEYS = set(DIVISOR_FIELDS + THRESHOLD_FIELDS + INT_FIELDS + ("tie", "dynamic"))


def _rows(lines: Iterable[str]) -> Iterable[Tuple[int, List[str]]]:
    for number, line in enumerate(lines, 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        yield number, next(csv.reader([line]))


def _parse_count(text: str, line: int, column: int, source: str, what: str) -> int:
    text = text.strip()
    try:
        value = int(text)
    except ValueError:
        raise ElectionFileError(f"{what} must be an integer, got {text!r}", line, column, source) from None
    if value < 0:
        raise ElectionFileError(f"{what} must be nonnegative, got {value}", line, column, source)
    return value


def parse_election(text: str, source: str = "<input>") -> ElectionInput:
    rows = _rows(text.splitlines())
    try:
        header_line, header = next(rows)
    except StopIteration:
        raise ElectionFileError("no header row", source=source) from None
    header = [h.strip() for h in header]
    if len(header) < 3 or header[-1] != ENTITLED_COLUMN:
        raise ElectionFileError(
            f"header must be: label, at least one party, {ENTITLED_COLUMN!r}", header_line, len(header), source
        )
    parties = header[1:-1]
    for col, party in enumerate(parties, 2):
        if not party:
            raise ElectionFileError("empty party label", header_line, col, source)
        if parties.count(party) > 1:
            raise ElectionFileError(f"duplicate party {party!r}", header_line, col, source)

    labels: List[str] = []
    votes: List[List[int]] = []
    entitled: List[int] = []
    for line, cells in rows:
        if len(cells) != len(header):
            raise ElectionFileError(f"expected {len(header)} fields, got {len(cells)}", line, len(cells), source)
        label = cells[0].strip()
        if not label:
            raise ElectionFileError("empty constituency label", line, 1, source)
        if label in labels:
            raise ElectionFileError(f"duplicate constituency {label!r}", line, 1, source)
        labels.append(label)
        votes.append([
            _parse_count(cell, line, col, source, f"votes for {party!r}")
            for col, (party, cell) in enumerate(zip(parties, cells[1:-1]), 2)
        ])
        count = _parse_count(cells[-1], line, len(cells), source, "entitled voters")
        if count == 0:
            raise ElectionFileError("entitled voters must be positive", line, len(cells), source)
        entitled.append(count)
    if not labels:
        raise ElectionFileError("no constituency rows", header_line, None, source)
    return ElectionInput(tuple(parties), tuple(labels), votes, entitled)


def load_election(path: str) -> ElectionInput:
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        raise ElectionFileError(f"cannot read election file: {exc.strerror}", source=path) from exc
    election = parse_election(text, source=path)
    logger.info("loaded %d constituencies x %d parties from %s", election.n_constituencies, election.n_parties, path)
    return election


def format_election(election: ElectionInput, label: str = "constituency") -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([label, *election.parties, ENTITLED_COLUMN])
    for name, row, count in zip(election.constituencies, election.votes, election.entitled):
        writer.writerow([name, *row, count])
    return buf.getvalue()


def parse_divisors(value: Any, name: str = "divisors") -> DivisorSequence:
    if isinstance(value, str) and value in DIVISOR_PRESETS:
        return DIVISOR_PRESETS[value]
    if isinstance(value, str) and "/" in value:
        return DivisorSequence(_parse_fraction(value, name))
    if isinstance(value, int) and not isinstance(value, bool):
        return DivisorSequence(Fraction(value))
    raise InvalidRules(f"{name}: expected 'pure', 'modified-1.4' or 'p/q', got {value!r}")


def format_divisors(divisors: DivisorSequence) -> str:
    return divisors.label


def _parse_fraction(value: Any, name: str) -> Fraction:
    if not isinstance(value, str) or value.count("/") != 1:
        raise InvalidRules(f"{name}: expected a 'p/q' string, got {value!r}")
    num, den = (part.strip() for part in value.split("/"))
    try:
        return Fraction(int(num), int(den))
    except (ValueError, ZeroDivisionError):
        raise InvalidRules(f"{name}: cannot read {value!r} as a rational") from None


def _format_fraction(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def parse_tie(value: Any) -> TieRule:
    if not isinstance(value, dict) or "mode" not in value:
        raise InvalidRules(f"tie: expected an object with a 'mode', got {value!r}")
    unknown = set(value) - {"mode", "seed"}
    if unknown:
        raise InvalidRules(f"tie: unknown keys {sorted(unknown)}")
    return TieRule(value["mode"], value.get("seed"))


def rules_from_dict(doc: Dict[str, Any], source: str = "<input>") -> Tuple[ElectionRules, DynamicOptions]:
    if not isinstance(doc, dict):
        raise ElectionFileError("rules document must be a JSON object", source=source)
    unknown = set(doc) - RULE_KEYS
    if unknown:
        raise ElectionFileError(f"unknown rule keys {sorted(unknown)}", source=source)
    kwargs: Dict[str, Any] = {}
    try:
        for name in INT_FIELDS:
            if name in doc:
                if not isinstance(doc[name], int) or isinstance(doc[name], bool):
                    raise InvalidRules(f"{name}: expected an integer, got {doc[name]!r}")
                kwargs[name] = doc[name]
        for name in THRESHOLD_FIELDS:
            if name in doc:
                kwargs[name] = _parse_fraction(doc[name], name)
        for name in DIVISOR_FIELDS:
            if name in doc:
                kwargs[name] = parse_divisors(doc[name], name)
        if "tie" in doc:
            kwargs["tie"] = parse_tie(doc["tie"])
        dynamic = doc.get("dynamic") or {}
        if not isinstance(dynamic, dict) or set(dynamic) - {"min_permanent", "constituency_floor"}:
            raise InvalidRules("dynamic: expected an object with min_permanent and/or constituency_floor")
        opts = DynamicOptions(dynamic.get("min_permanent"), dynamic.get("constituency_floor"))
        return ElectionRules(**kwargs), opts
    except ApportionmentError as exc:
        raise ElectionFileError(str(exc), source=source) from exc


def rules_to_dict(rules: ElectionRules, opts: Optional[DynamicOptions] = None) -> Dict[str, Any]:
    doc: Dict[str, Any] = {
        "house_size": rules.house_size,
        "permanent_seats": rules.permanent_seats,
        "national_threshold": _format_fraction(rules.national_threshold),
        "constituency_threshold": _format_fraction(rules.constituency_threshold),
    }
    for name in DIVISOR_FIELDS:
        doc[name] = format_divisors(getattr(rules, name))
    doc["tie"] = {"mode": rules.tie.mode} if rules.tie.seed is None else {"mode": rules.tie.mode, "seed": rules.tie.seed}
    if opts is not None and (opts.min_permanent is not None or opts.constituency_floor is not None):
        doc["dynamic"] = {
            k: v for k, v in (("min_permanent", opts.min_permanent), ("constituency_floor", opts.constituency_floor))
            if v is not None
        }
    return doc


def parse_rules(text: str, source: str = "<input>") -> Tuple[ElectionRules, DynamicOptions]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ElectionFileError(exc.msg, exc.lineno, exc.colno, source) from exc
    return rules_from_dict(doc, source)


def load_rules(path: str) -> Tuple[ElectionRules, DynamicOptions]:
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        raise ElectionFileError(f"cannot read rules file: {exc.strerror}", source=path) from exc
    return parse_rules(text, source=path)


def format_rules(rules: ElectionRules, opts: Optional[DynamicOptions] = None) -> str:
    return json.dumps(rules_to_dict(rules, opts), indent=2) + "\n"


def parse_delta(spec: str) -> Delta:
    """Read 'constituency:party:+n' (the constituency label may itself contain colons)."""
    parts = spec.rsplit(":", 2)
    if len(parts) != 3 or not parts[0] or not parts[1]:
        raise ElectionFileError(f"delta {spec!r} is not of the form constituency:party:+n", source="<delta>")
    try:
        amount = int(parts[2])
    except ValueError:
        raise ElectionFileError(f"delta {spec!r}: {parts[2]!r} is not an integer", source="<delta>") from None
    return Delta(parts[0], parts[1], amount)

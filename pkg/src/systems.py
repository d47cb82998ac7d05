"""Two-tier electoral systems over a constituency x party vote matrix.

`allocate_current` follows the Swedish Riksdag rules: permanent seats per
constituency by Hamilton over entitled voters, modified Sainte-Lague inside each
constituency, adjustment seats per party column and the BUT clause for parties
whose permanent seats already exceed their national share.

`allocate_dynamic` walks a precomputed constituency order (list L) and hands out
permanent seats until the next one would push a party past its national target;
every remaining seat becomes an adjustment seat.
"""
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple
import logging

from .apportion import (
    MODIFIED,
    PURE,
    AwardList,
    DivisorSequence,
    TieBreaker,
    TieRule,
    award_sequence,
    hamilton_split,
    next_award,
    to_fraction,
)
from .errors import (
    InfeasibleAdjustment,
    InfeasibleFloor,
    InvalidElection,
    InvalidRules,
    NegativeVotes,
    NoEligibleParty,
)

logger = logging.getLogger(__name__)

CURRENT = "current"
DYNAMIC = "dynamic"
SYSTEMS = (CURRENT, DYNAMIC)

PERMANENT = "permanent"
ADJUSTMENT = "adjustment"

Matrix = Tuple[Tuple[int, ...], ...]


@dataclass(frozen=True)
class ElectionInput:
    parties: Tuple[str, ...]
    constituencies: Tuple[str, ...]
    votes: Matrix
    entitled: Tuple[int, ...]

    def __post_init__(self):
        parties = tuple(str(p) for p in self.parties)
        constituencies = tuple(str(c) for c in self.constituencies)
        votes = tuple(tuple(int(v) for v in row) for row in self.votes)
        entitled = tuple(int(e) for e in self.entitled)
        if not parties:
            raise InvalidElection("election has no parties")
        if not constituencies:
            raise InvalidElection("election has no constituencies")
        if len(set(parties)) != len(parties):
            raise InvalidElection("party labels must be unique")
        if len(set(constituencies)) != len(constituencies):
            raise InvalidElection("constituency labels must be unique")
        if len(votes) != len(constituencies):
            raise InvalidElection(f"{len(votes)} vote rows for {len(constituencies)} constituencies")
        for label, row in zip(constituencies, votes):
            if len(row) != len(parties):
                raise InvalidElection(f"row {label!r} has {len(row)} cells, expected {len(parties)}")
            for party, v in zip(parties, row):
                if v < 0:
                    raise NegativeVotes(f"negative vote count {v} for {party!r} in {label!r}")
        if len(entitled) != len(constituencies):
            raise InvalidElection("entitled-voter vector does not match the constituencies")
        for label, e in zip(constituencies, entitled):
            if e <= 0:
                raise InvalidElection(f"entitled voters must be positive, got {e} for {label!r}")
        object.__setattr__(self, "parties", parties)
        object.__setattr__(self, "constituencies", constituencies)
        object.__setattr__(self, "votes", votes)
        object.__setattr__(self, "entitled", entitled)

    @property
    def n_parties(self) -> int:
        return len(self.parties)

    @property
    def n_constituencies(self) -> int:
        return len(self.constituencies)

    def party_totals(self) -> Tuple[int, ...]:
        return tuple(sum(col) for col in zip(*self.votes))

    def row_totals(self) -> Tuple[int, ...]:
        return tuple(sum(row) for row in self.votes)

    def column(self, j: int) -> Tuple[int, ...]:
        return tuple(row[j] for row in self.votes)

    @property
    def total_votes(self) -> int:
        return sum(self.row_totals())

    def party_index(self, label: str) -> int:
        try:
            return self.parties.index(label)
        except ValueError:
            raise InvalidElection(f"unknown party {label!r}") from None

    def constituency_index(self, label: str) -> int:
        try:
            return self.constituencies.index(label)
        except ValueError:
            raise InvalidElection(f"unknown constituency {label!r}") from None

    def with_votes(self, votes: Sequence[Sequence[int]]) -> "ElectionInput":
        return replace(self, votes=tuple(tuple(row) for row in votes))


@dataclass(frozen=True)
class ElectionRules:
    """Rule parameters; defaults are the Swedish Riksdag values."""

    house_size: int = 349
    permanent_seats: int = 310
    national_threshold: Fraction = Fraction(4, 100)
    constituency_threshold: Fraction = Fraction(12, 100)
    within_constituency_divisors: DivisorSequence = MODIFIED
    adjustment_divisors: DivisorSequence = PURE
    national_divisors: DivisorSequence = PURE
    list_divisors: DivisorSequence = PURE
    tie: TieRule = TieRule()

    def __post_init__(self):
        if self.house_size <= 0:
            raise InvalidRules(f"house size must be positive, got {self.house_size}")
        if not 0 <= self.permanent_seats <= self.house_size:
            raise InvalidRules(f"permanent seats must lie in [0, {self.house_size}], got {self.permanent_seats}")
        for name in ("national_threshold", "constituency_threshold"):
            value = to_fraction(getattr(self, name), name)
            if not 0 <= value < 1:
                raise InvalidRules(f"{name} must lie in [0, 1), got {value}")
            object.__setattr__(self, name, value)
        for name in ("within_constituency_divisors", "adjustment_divisors", "national_divisors", "list_divisors"):
            if not isinstance(getattr(self, name), DivisorSequence):
                raise InvalidRules(f"{name} must be a DivisorSequence")
        if not isinstance(self.tie, TieRule):
            raise InvalidRules("tie must be a TieRule")

    def with_within(self, divisors: DivisorSequence) -> "ElectionRules":
        return replace(self, within_constituency_divisors=divisors)


@dataclass(frozen=True)
class DynamicOptions:
    min_permanent: Optional[int] = None
    constituency_floor: Optional[int] = None

    def __post_init__(self):
        for name in ("min_permanent", "constituency_floor"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise InvalidRules(f"{name} must be nonnegative, got {value}")

    def check(self, house_size: int, n_constituencies: int) -> None:
        if self.min_permanent is not None and self.min_permanent > house_size:
            raise InfeasibleFloor(f"minimum of {self.min_permanent} permanent seats exceeds the house of {house_size}")
        if self.constituency_floor and self.constituency_floor * n_constituencies > house_size:
            raise InfeasibleFloor(
                f"floor of {self.constituency_floor} seats in {n_constituencies} constituencies exceeds the house of {house_size}"
            )


@dataclass(frozen=True)
class AwardRecord:
    seat: int
    constituency: int
    party: int
    phase: str
    tie: bool = False


@dataclass(frozen=True)
class SeatOutcome:
    system: str
    parties: Tuple[str, ...]
    constituencies: Tuple[str, ...]
    permanent: Matrix
    adjustment: Matrix
    national_targets: Tuple[int, ...]
    final_targets: Tuple[int, ...]
    award_log: Tuple[AwardRecord, ...] = ()
    but_parties: Tuple[int, ...] = ()
    but_rounds: int = 0
    stop_index: Optional[int] = None
    constituency_seats: Optional[Tuple[int, ...]] = None
    notes: Tuple[str, ...] = ()

    def totals(self) -> Matrix:
        return tuple(
            tuple(p + a for p, a in zip(prow, arow)) for prow, arow in zip(self.permanent, self.adjustment)
        )

    def party_totals(self) -> Tuple[int, ...]:
        return tuple(sum(col) for col in zip(*self.totals()))

    def constituency_totals(self) -> Tuple[int, ...]:
        return tuple(sum(row) for row in self.totals())

    def permanent_by_party(self) -> Tuple[int, ...]:
        return tuple(sum(col) for col in zip(*self.permanent))

    @property
    def permanent_count(self) -> int:
        return sum(map(sum, self.permanent))

    @property
    def adjustment_count(self) -> int:
        return sum(map(sum, self.adjustment))

    @property
    def house_size(self) -> int:
        return self.permanent_count + self.adjustment_count

    @property
    def ties(self) -> Tuple[AwardRecord, ...]:
        return tuple(r for r in self.award_log if r.tie)


def eligibility(election: ElectionInput, rules: ElectionRules) -> Tuple[Tuple[bool, ...], Tuple[Tuple[bool, ...], ...]]:
    """National and local eligibility masks; both thresholds compare with >=."""
    nt, ct = rules.national_threshold, rules.constituency_threshold
    total = election.total_votes
    national = tuple(
        v > 0 and v * nt.denominator >= nt.numerator * total for v in election.party_totals()
    )
    local = []
    for row, row_total in zip(election.votes, election.row_totals()):
        local.append(tuple(
            national[j] or (v > 0 and v * ct.denominator >= ct.numerator * row_total)
            for j, v in enumerate(row)
        ))
    return national, tuple(local)


def _masked(values: Sequence[int], mask: Sequence[bool]) -> Tuple[int, ...]:
    return tuple(v if ok else 0 for v, ok in zip(values, mask))


def national_awards(
    election: ElectionInput, rules: ElectionRules, house_size: Optional[int] = None
) -> AwardList:
    """Award order of the national reference allocation over nationally eligible parties."""
    national, _ = eligibility(election, rules)
    if not any(national):
        raise NoEligibleParty("no party reaches the national threshold")
    house = rules.house_size if house_size is None else house_size
    return award_sequence(_masked(election.party_totals(), national), house, rules.national_divisors, rules.tie)


def national_reference(election: ElectionInput, rules: ElectionRules) -> Tuple[int, ...]:
    return national_awards(election, rules).totals


def _empty(n_rows: int, n_cols: int) -> List[List[int]]:
    return [[0] * n_cols for _ in range(n_rows)]


def _frozen(matrix: List[List[int]]) -> Matrix:
    return tuple(tuple(row) for row in matrix)


def _fill_adjustment(
    election: ElectionInput,
    rules: ElectionRules,
    permanent: List[List[int]],
    targets: Dict[int, int],
    log: List[AwardRecord],
) -> List[List[int]]:
    """Fill each party column up to its target, continuing from its permanent seats."""
    adjustment = _empty(election.n_constituencies, election.n_parties)
    for j in sorted(targets):
        initial = [row[j] for row in permanent]
        deficit = targets[j] - sum(initial)
        if deficit < 0:
            raise InfeasibleAdjustment(
                f"party {election.parties[j]!r} holds {sum(initial)} permanent seats but its target is {targets[j]}"
            )
        if deficit == 0:
            continue
        awards = award_sequence(election.column(j), deficit, rules.adjustment_divisors, rules.tie, initial)
        tied = set(awards.ties)
        for k, i in enumerate(awards.order):
            adjustment[i][j] += 1
            log.append(AwardRecord(len(log) + 1, i, j, ADJUSTMENT, k in tied))
    return adjustment


def allocate_current(election: ElectionInput, rules: ElectionRules) -> SeatOutcome:
    national, local = eligibility(election, rules)
    if not any(national):
        raise NoEligibleParty("no party reaches the national threshold")
    notes: List[str] = []
    log: List[AwardRecord] = []

    seats, tied = hamilton_split(election.entitled, rules.permanent_seats, rules.tie)
    if tied:
        notes.append("permanent seats per constituency decided by a tie on Hamilton remainders")

    permanent = _empty(election.n_constituencies, election.n_parties)
    for i, row in enumerate(election.votes):
        if seats[i] == 0:
            continue
        awards = award_sequence(_masked(row, local[i]), seats[i], rules.within_constituency_divisors, rules.tie)
        tied_at = set(awards.ties)
        for k, j in enumerate(awards.order):
            permanent[i][j] += 1
            log.append(AwardRecord(len(log) + 1, i, j, PERMANENT, k in tied_at))

    held = [sum(row[j] for row in permanent) for j in range(election.n_parties)]
    totals = election.party_totals()
    # parties seated only through the constituency threshold keep their seats outside the national count
    local_only = [j for j in range(election.n_parties) if not national[j] and held[j] > 0]
    house = rules.house_size - sum(held[j] for j in local_only)
    active = [j for j in range(election.n_parties) if national[j]]
    initial_targets = national_reference(election, rules)

    frozen: List[int] = []
    rounds = 0
    while True:
        reference = award_sequence([totals[j] for j in active], house, rules.national_divisors, rules.tie).totals
        targets = dict(zip(active, reference))
        exceeding = [j for j in active if held[j] > targets[j]]
        if not exceeding:
            break
        rounds += 1
        for j in exceeding:
            logger.debug(
                "BUT round %d: %s keeps %d permanent seats against a target of %d",
                rounds, election.parties[j], held[j], targets[j],
            )
        frozen.extend(exceeding)
        house -= sum(held[j] for j in exceeding)
        active = [j for j in active if j not in exceeding]
        if not active:
            targets = {}
            break

    adjustment = _fill_adjustment(election, rules, permanent, targets, log)
    final = [0] * election.n_parties
    for j, t in targets.items():
        final[j] = t
    for j in frozen + local_only:
        final[j] = held[j]
    outcome = SeatOutcome(
        system=CURRENT,
        parties=election.parties,
        constituencies=election.constituencies,
        permanent=_frozen(permanent),
        adjustment=_frozen(adjustment),
        national_targets=initial_targets,
        final_targets=tuple(final),
        award_log=tuple(log),
        but_parties=tuple(sorted(frozen)),
        but_rounds=rounds,
        constituency_seats=tuple(seats),
        notes=tuple(notes),
    )
    if outcome.house_size != rules.house_size:
        raise InfeasibleAdjustment(f"allocated {outcome.house_size} seats for a house of {rules.house_size}")
    return outcome


@lru_cache(maxsize=64)
def _constituency_list(
    entitled: Tuple[int, ...], n_awards: int, divisors: DivisorSequence, tie: TieRule, floor: int
) -> AwardList:
    initial = [floor] * len(entitled) if floor else None
    return award_sequence(entitled, n_awards, divisors, tie, initial)


def constituency_list(
    election: ElectionInput, rules: ElectionRules, opts: Optional[DynamicOptions] = None
) -> AwardList:
    """List L: the order in which constituencies receive seats, after any floor seats."""
    floor = (opts.constituency_floor or 0) if opts else 0
    n_awards = rules.house_size - floor * election.n_constituencies
    return _constituency_list(election.entitled, n_awards, rules.list_divisors, rules.tie, floor)


class _PermanentPhase:
    """Mutable state of the dynamic method while permanent seats are placed."""

    def __init__(self, election: ElectionInput, rules: ElectionRules):
        self.election = election
        self.rules = rules
        self.national, self.local = eligibility(election, rules)
        if not any(self.national):
            raise NoEligibleParty("no party reaches the national threshold")
        awards = national_awards(election, rules)
        self.national_order = awards.order
        self.national_targets = awards.totals
        self.targets = list(awards.totals)
        self.cursor = len(awards.order)
        self.permanent = _empty(election.n_constituencies, election.n_parties)
        self.held = [0] * election.n_parties
        self.breaker = TieBreaker(rules.tie)
        self.log: List[AwardRecord] = []
        self.notes: List[str] = []
        self.local_only_seats = 0

    @property
    def placed(self) -> int:
        return len(self.log)

    def _row_votes(self, i: int) -> Tuple[int, ...]:
        return _masked(self.election.votes[i], self.local[i])

    def best(self, i: int, allowed: Optional[Iterable[int]] = None) -> Tuple[Optional[int], bool]:
        return next_award(
            self._row_votes(i), self.permanent[i], self.rules.within_constituency_divisors, self.breaker, allowed
        )

    def fits(self, j: int) -> bool:
        if self.national[j]:
            return self.held[j] < self.targets[j]
        if self.cursor == 0:
            return False
        donor = self.national_order[self.cursor - 1]
        return self.held[donor] < self.targets[donor]

    def place(self, i: int, j: int, tie: bool) -> None:
        if not self.national[j]:
            donor = self.national_order[self.cursor - 1]
            self.targets[donor] -= 1
            self.cursor -= 1
            self.local_only_seats += 1
            logger.debug(
                "%s takes a seat in %s on the constituency threshold; target of %s lowered to %d",
                self.election.parties[j], self.election.constituencies[i], self.election.parties[donor], self.targets[donor],
            )
            if self.local_only_seats == 2:
                self.notes.append("more than one seat won on the constituency threshold alone; review the target reductions")
        self.permanent[i][j] += 1
        self.held[j] += 1
        self.log.append(AwardRecord(len(self.log) + 1, i, j, PERMANENT, tie))

    def force(self, i: int, reason: str) -> bool:
        """Place a seat in row i for the best party with room; False when none has room."""
        room = [j for j in range(self.election.n_parties) if self.local[i][j] and self.fits(j)]
        j, tie = self.best(i, room)
        if j is None:
            logger.warning("%s: no party in %s has room for a seat", reason, self.election.constituencies[i])
            return False
        self.place(i, j, tie)
        return True


def allocate_dynamic(
    election: ElectionInput, rules: ElectionRules, opts: Optional[DynamicOptions] = None
) -> SeatOutcome:
    opts = opts or DynamicOptions()
    opts.check(rules.house_size, election.n_constituencies)
    phase = _PermanentPhase(election, rules)
    minimum = opts.min_permanent or 0

    for _ in range(opts.constituency_floor or 0):
        for i in range(election.n_constituencies):
            if not phase.force(i, "constituency floor"):
                raise InfeasibleFloor(f"cannot give {election.constituencies[i]!r} its floor seats")

    stopped = False
    for position, i in enumerate(constituency_list(election, rules, opts).order):
        j, tie = phase.best(i)
        if j is not None and phase.fits(j):
            phase.place(i, j, tie)
            continue
        if phase.placed >= minimum:
            stopped = True
            logger.debug(
                "stop for permanent seats after %d seats (entry %d of the constituency list, %s)",
                phase.placed, position, election.constituencies[i],
            )
            break
        if not phase.force(i, "minimum permanent seats"):
            logger.warning("skipping entry %d of the constituency list (%s)", position, election.constituencies[i])
    if not stopped and phase.placed < minimum:
        raise InfeasibleFloor(f"constituency list exhausted after {phase.placed} of {minimum} permanent seats")

    stop_index = phase.placed
    targets = {j: phase.targets[j] for j in range(election.n_parties) if phase.national[j]}
    adjustment = _fill_adjustment(election, rules, phase.permanent, targets, phase.log)
    final = [targets.get(j, phase.held[j]) for j in range(election.n_parties)]
    outcome = SeatOutcome(
        system=DYNAMIC,
        parties=election.parties,
        constituencies=election.constituencies,
        permanent=_frozen(phase.permanent),
        adjustment=_frozen(adjustment),
        national_targets=phase.national_targets,
        final_targets=tuple(final),
        award_log=tuple(phase.log),
        stop_index=stop_index,
        notes=tuple(phase.notes),
    )
    if outcome.house_size != rules.house_size:
        raise InfeasibleAdjustment(f"allocated {outcome.house_size} seats for a house of {rules.house_size}")
    return outcome


def allocate(
    election: ElectionInput, rules: ElectionRules, system: str, opts: Optional[DynamicOptions] = None
) -> SeatOutcome:
    if system == CURRENT:
        return allocate_current(election, rules)
    if system == DYNAMIC:
        return allocate_dynamic(election, rules, opts)
    raise InvalidRules(f"unknown system {system!r}; expected one of {', '.join(SYSTEMS)}")


@dataclass(frozen=True)
class Delta:
    constituency: str
    party: str
    amount: int


@dataclass(frozen=True)
class CellChange:
    constituency: str
    party: str
    permanent_before: int
    permanent_after: int
    adjustment_before: int
    adjustment_after: int

    @property
    def seats_delta(self) -> int:
        return (self.permanent_after + self.adjustment_after) - (self.permanent_before + self.adjustment_before)


@dataclass(frozen=True)
class WhatIfResult:
    before: SeatOutcome
    after: SeatOutcome
    changes: Tuple[CellChange, ...] = field(default_factory=tuple)

    def party_deltas(self) -> Dict[str, int]:
        out: Dict[str, int] = {}
        for c in self.changes:
            out[c.party] = out.get(c.party, 0) + c.seats_delta
        return {p: d for p, d in out.items() if d}


def apply_deltas(election: ElectionInput, deltas: Sequence[Delta]) -> ElectionInput:
    votes = [list(row) for row in election.votes]
    for d in deltas:
        i = election.constituency_index(d.constituency)
        j = election.party_index(d.party)
        votes[i][j] += int(d.amount)
    for i, row in enumerate(votes):
        for j, v in enumerate(row):
            if v < 0:
                raise NegativeVotes(
                    f"deltas leave {v} votes for {election.parties[j]!r} in {election.constituencies[i]!r}"
                )
    return election.with_votes(votes)


def what_if(
    election: ElectionInput,
    rules: ElectionRules,
    system: str,
    deltas: Sequence[Delta],
    opts: Optional[DynamicOptions] = None,
) -> WhatIfResult:
    changed = apply_deltas(election, deltas)
    before = allocate(election, rules, system, opts)
    after = allocate(changed, rules, system, opts)
    changes: List[CellChange] = []
    for i, label in enumerate(election.constituencies):
        for j, party in enumerate(election.parties):
            cell = CellChange(
                label, party,
                before.permanent[i][j], after.permanent[i][j],
                before.adjustment[i][j], after.adjustment[i][j],
            )
            if (cell.permanent_before, cell.adjustment_before) != (cell.permanent_after, cell.adjustment_after):
                changes.append(cell)
    return WhatIfResult(before, after, tuple(changes))

"""Disproportionality measures between vote shares and seat shares.

Both measures are computed exactly with Fractions and only rendered to Decimal
for display:

  LH = 50 * sum |v_i/V - s_i/S|
  SL = 100 * sum (v_i/V - s_i/S)^2 / w_i

where w_i is the vote share (the published SL formula) or the seat share.
"""
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import List, Optional, Tuple
import logging

from .errors import InvalidRules, MismatchedEntities, SingularTerm, ZeroBasis
from .systems import ElectionInput, SeatOutcome

logger = logging.getLogger(__name__)

PARTY = "party"
CONSTITUENCY = "constituency"
PAIR = "pair"
CATEGORIES = (PARTY, CONSTITUENCY, PAIR)

CAST_VOTES = "cast-votes"
ENTITLED = "entitled"
BASES = (CAST_VOTES, ENTITLED)

BY_VOTES = "votes"
BY_SEATS = "seats"
WEIGHTINGS = (BY_VOTES, BY_SEATS)


@dataclass(frozen=True)
class ShareVector:
    labels: Tuple[str, ...]
    weights: Tuple[int, ...]

    def __post_init__(self):
        labels = tuple(self.labels)
        weights = tuple(int(w) for w in self.weights)
        if len(labels) != len(weights):
            raise MismatchedEntities(f"{len(labels)} labels for {len(weights)} weights")
        if any(w < 0 for w in weights):
            raise InvalidRules("share weights must be nonnegative")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "weights", weights)

    @property
    def total(self) -> int:
        return sum(self.weights)

    def shares(self) -> Tuple[Fraction, ...]:
        total = self.total
        if total <= 0:
            raise ZeroBasis(f"share basis is {total}")
        return tuple(Fraction(w, total) for w in self.weights)


def _paired(votes: ShareVector, seats: ShareVector) -> List[Tuple[str, Fraction, Fraction]]:
    if votes.labels != seats.labels:
        raise MismatchedEntities("vote and seat vectors cover different entities")
    return list(zip(votes.labels, votes.shares(), seats.shares()))


def lh_terms(votes: ShareVector, seats: ShareVector) -> List[Fraction]:
    return [50 * abs(v - s) for _, v, s in _paired(votes, seats)]


def sl_terms(votes: ShareVector, seats: ShareVector, weighting: str = BY_VOTES) -> List[Fraction]:
    if weighting not in WEIGHTINGS:
        raise InvalidRules(f"unknown SL weighting {weighting!r}")
    terms = []
    for label, v, s in _paired(votes, seats):
        if v == s:
            terms.append(Fraction(0))
            continue
        w = v if weighting == BY_VOTES else s
        if w == 0:
            raise SingularTerm(f"{label!r} has a zero {weighting} share but a nonzero gap")
        terms.append(100 * (v - s) ** 2 / w)
    return terms


def lh_measure(votes: ShareVector, seats: ShareVector) -> Fraction:
    return sum(lh_terms(votes, seats), Fraction(0))


def sl_measure(votes: ShareVector, seats: ShareVector, weighting: str = BY_VOTES) -> Fraction:
    return sum(sl_terms(votes, seats, weighting), Fraction(0))


def render(value: Fraction, places: int = 2) -> Decimal:
    """Round half away from zero to `places` decimals."""
    value = Fraction(value)
    scale = 10 ** places
    scaled = abs(value) * scale
    rounded = int(scaled + Fraction(1, 2))
    if value < 0:
        rounded = -rounded
    return Decimal(rounded).scaleb(-places)


@dataclass(frozen=True)
class Contribution:
    label: str
    vote_share: Fraction
    seat_share: Fraction
    lh: Fraction
    sl: Fraction


@dataclass(frozen=True)
class DisproportionalityReport:
    category: str
    basis: str
    sl_weighting: str
    lh: Fraction
    sl: Fraction
    contributions: Tuple[Contribution, ...]

    @property
    def lh_rounded(self) -> Decimal:
        return render(self.lh)

    @property
    def sl_rounded(self) -> Decimal:
        return render(self.sl)


def measure(
    votes: ShareVector, seats: ShareVector, category: str, basis: str, sl_weighting: str
) -> DisproportionalityReport:
    lh = lh_terms(votes, seats)
    sl = sl_terms(votes, seats, sl_weighting)
    contributions = tuple(
        Contribution(label, v, s, a, b)
        for (label, v, s), a, b in zip(_paired(votes, seats), lh, sl)
    )
    return DisproportionalityReport(category, basis, sl_weighting, sum(lh, Fraction(0)), sum(sl, Fraction(0)), contributions)


def seated_parties(election: ElectionInput, outcome: SeatOutcome) -> List[int]:
    """Parties entering parliament, i.e. holding at least one seat."""
    totals = outcome.party_totals()
    return [j for j in range(election.n_parties) if totals[j] > 0]


def share_vectors(
    election: ElectionInput, outcome: SeatOutcome, category: str, constituency_basis: str = ENTITLED
) -> Tuple[ShareVector, ShareVector]:
    if outcome.parties != election.parties or outcome.constituencies != election.constituencies:
        raise MismatchedEntities("outcome does not belong to this election")
    seats = outcome.totals()
    if category == CONSTITUENCY:
        if constituency_basis == ENTITLED:
            weights = election.entitled
        elif constituency_basis == CAST_VOTES:
            weights = election.row_totals()
        else:
            raise InvalidRules(f"unknown constituency basis {constituency_basis!r}")
        labels = election.constituencies
        return ShareVector(labels, weights), ShareVector(labels, outcome.constituency_totals())
    included = seated_parties(election, outcome)
    if category == PARTY:
        labels = tuple(election.parties[j] for j in included)
        votes = election.party_totals()
        party_seats = outcome.party_totals()
        return (
            ShareVector(labels, [votes[j] for j in included]),
            ShareVector(labels, [party_seats[j] for j in included]),
        )
    if category == PAIR:
        labels, vote_cells, seat_cells = [], [], []
        for i, name in enumerate(election.constituencies):
            for j in included:
                labels.append(f"{name}/{election.parties[j]}")
                vote_cells.append(election.votes[i][j])
                seat_cells.append(seats[i][j])
        return ShareVector(tuple(labels), vote_cells), ShareVector(tuple(labels), seat_cells)
    raise InvalidRules(f"unknown category {category!r}; expected one of {', '.join(CATEGORIES)}")


def report(
    election: ElectionInput,
    outcome: SeatOutcome,
    category: str,
    constituency_basis: Optional[str] = None,
    sl_weighting: Optional[str] = None,
) -> DisproportionalityReport:
    """LH and SL for one error category.

    The constituency category defaults to entitled voters with seat-share
    weighting; party and pair categories default to cast votes with vote-share
    weighting.
    """
    if category == CONSTITUENCY:
        basis = constituency_basis or ENTITLED
        weighting = sl_weighting or BY_SEATS
    else:
        basis = CAST_VOTES
        weighting = sl_weighting or BY_VOTES
    votes, seats = share_vectors(election, outcome, category, basis)
    return measure(votes, seats, category, basis, weighting)


def constituency_pair(election: ElectionInput, outcome: SeatOutcome) -> Tuple[Fraction, Fraction]:
    """(LH, SL) of the constituency category under the default reading."""
    r = report(election, outcome, CONSTITUENCY)
    return r.lh, r.sl


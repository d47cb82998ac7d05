"""Exact one-dimensional apportionment primitives.

Highest-averages divisor methods (first divisor configurable, then the odd
numbers 3, 5, 7, ...) and Hamilton's largest-remainder method. Comparison
numbers are never turned into floats: two quotients v1/d1 and v2/d2 are
compared by integer cross-multiplication, so every platform produces the same
award order.
"""
from dataclasses import dataclass
from enum import IntEnum
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple, Union
import logging

import numpy as np

from .errors import AllZeroVotes, InvalidRules

logger = logging.getLogger(__name__)

LOWEST_INDEX = "lowest-index"
SEEDED_LOT = "seeded-lot"

RationalLike = Union[int, str, Fraction]


def to_fraction(value: RationalLike, what: str = "value") -> Fraction:
    """Convert ints, Fractions, Decimals and "p/q" strings; floats are refused."""
    if isinstance(value, float):
        raise InvalidRules(f"{what} must be an exact rational (int, 'p/q' or Fraction), got float {value!r}")
    try:
        return Fraction(value)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise InvalidRules(f"{what}: cannot read {value!r} as a rational") from exc


@dataclass(frozen=True)
class DivisorSequence:
    """Divisors first, 3, 5, 7, ... applied to an entity holding 0, 1, 2, 3, ... seats."""

    first: Fraction = Fraction(1)

    def __post_init__(self):
        first = to_fraction(self.first, "first divisor")
        if first <= 0:
            raise InvalidRules(f"first divisor must be positive, got {first}")
        object.__setattr__(self, "first", first)

    def divisor(self, awarded: int) -> Fraction:
        return self.first if awarded == 0 else Fraction(2 * awarded + 1)

    def pair(self, awarded: int) -> Tuple[int, int]:
        """(numerator, denominator) of the divisor for an entity holding `awarded` seats."""
        if awarded == 0:
            return self.first.numerator, self.first.denominator
        return 2 * awarded + 1, 1

    @property
    def label(self) -> str:
        if self.first == 1:
            return "pure"
        if self.first == Fraction(7, 5):
            return "modified-1.4"
        return f"{self.first.numerator}/{self.first.denominator}"


PURE = DivisorSequence(Fraction(1))
MODIFIED = DivisorSequence(Fraction(7, 5))


class Ordering(IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


@dataclass(frozen=True)
class Quotient:
    """A comparison number votes / divisor, kept as an exact pair."""

    votes: int
    divisor: Fraction

    def __post_init__(self):
        if self.votes < 0:
            raise InvalidRules(f"votes must be nonnegative, got {self.votes}")
        divisor = to_fraction(self.divisor, "divisor")
        if divisor <= 0:
            raise InvalidRules(f"divisor must be positive, got {divisor}")
        object.__setattr__(self, "divisor", divisor)


def compare_quotients(a: Quotient, b: Quotient) -> Ordering:
    lhs = a.votes * a.divisor.denominator * b.divisor.numerator
    rhs = b.votes * b.divisor.denominator * a.divisor.numerator
    if lhs < rhs:
        return Ordering.LESS
    if lhs > rhs:
        return Ordering.GREATER
    return Ordering.EQUAL


@dataclass(frozen=True)
class TieRule:
    mode: str = LOWEST_INDEX
    seed: Optional[int] = None

    def __post_init__(self):
        if self.mode == LOWEST_INDEX:
            if self.seed is not None:
                raise InvalidRules("lowest-index tie rule takes no seed")
        elif self.mode == SEEDED_LOT:
            if self.seed is None or not 0 <= int(self.seed) < 2 ** 64:
                raise InvalidRules("seeded-lot tie rule needs a seed in [0, 2**64)")
        else:
            raise InvalidRules(f"unknown tie mode {self.mode!r}")

    @classmethod
    def lowest_index(cls) -> "TieRule":
        return cls(LOWEST_INDEX)

    @classmethod
    def seeded_lot(cls, seed: int) -> "TieRule":
        return cls(SEEDED_LOT, seed)


class TieBreaker:
    """Stateful helper resolving ties for one apportionment run.

    A seeded lot draws from a generator created on the first tie, so the same
    inputs and seed always reproduce the same draws.
    """

    def __init__(self, rule: TieRule):
        self.rule = rule
        self._rng: Optional[np.random.Generator] = None

    def _generator(self) -> np.random.Generator:
        if self._rng is None:
            self._rng = np.random.default_rng(self.rule.seed)
        return self._rng

    def pick(self, candidates: Sequence[int]) -> int:
        """Choose one of `candidates` (given in increasing index order)."""
        if self.rule.mode == LOWEST_INDEX:
            return candidates[0]
        return candidates[int(self._generator().integers(len(candidates)))]

    def pick_many(self, candidates: Sequence[int], k: int) -> List[int]:
        if self.rule.mode == LOWEST_INDEX:
            return list(candidates[:k])
        chosen = self._generator().choice(len(candidates), size=k, replace=False)
        return sorted(candidates[int(c)] for c in chosen)


@dataclass(frozen=True)
class AwardList:
    """Ordered seat awards: order[k] is the entity receiving award k.

    `totals` includes any initial counts the sequence started from; `ties`
    holds the positions in `order` that were decided by the tie rule.
    """

    order: Tuple[int, ...]
    totals: Tuple[int, ...]
    ties: Tuple[int, ...] = ()

    def __len__(self) -> int:
        return len(self.order)

    def __iter__(self):
        return iter(self.order)

    def __getitem__(self, k):
        return self.order[k]


def _check_counts(values: Sequence[int], what: str) -> None:
    for v in values:
        if v < 0:
            raise InvalidRules(f"{what} must be nonnegative, got {v}")


def next_award(
    votes: Sequence[int],
    counts: Sequence[int],
    divisors: DivisorSequence,
    breaker: TieBreaker,
    allowed: Optional[Iterable[int]] = None,
) -> Tuple[Optional[int], bool]:
    """Entity with the largest comparison number, and whether a tie decided it.

    Only entities with positive votes (and in `allowed`, if given) compete;
    returns (None, False) when none does.
    """
    indices = range(len(votes)) if allowed is None else sorted(allowed)
    best: List[int] = []
    best_scaled = best_num = 0
    for i in indices:
        v = votes[i]
        if v <= 0:
            continue
        num, den = divisors.pair(counts[i])
        scaled = v * den
        if not best:
            best, best_scaled, best_num = [i], scaled, num
            continue
        lhs = scaled * best_num
        rhs = best_scaled * num
        if lhs > rhs:
            best, best_scaled, best_num = [i], scaled, num
        elif lhs == rhs:
            best.append(i)
    if not best:
        return None, False
    if len(best) == 1:
        return best[0], False
    winner = breaker.pick(best)
    logger.debug("tie between %s decided for %s", best, winner)
    return winner, True


def award_sequence(
    votes: Sequence[int],
    n_awards: int,
    divisors: DivisorSequence = PURE,
    tie: TieRule = TieRule(),
    initial: Optional[Sequence[int]] = None,
) -> AwardList:
    """Hand out `n_awards` seats one at a time by largest comparison number.

    With `initial`, the entities start from those seat counts (used when
    adjustment seats continue a column from its permanent seats).
    """
    votes = tuple(int(v) for v in votes)
    _check_counts(votes, "votes")
    if n_awards < 0:
        raise InvalidRules(f"number of awards must be nonnegative, got {n_awards}")
    counts = [0] * len(votes) if initial is None else [int(c) for c in initial]
    if len(counts) != len(votes):
        raise InvalidRules("initial counts and votes differ in length")
    _check_counts(counts, "initial counts")
    if n_awards > 0 and not any(votes):
        raise AllZeroVotes(f"{n_awards} seat(s) requested but every entity has zero votes")

    breaker = TieBreaker(tie)
    competing = [i for i, v in enumerate(votes) if v > 0]
    # scaled[i] / nums[i] is entity i's current comparison number
    scaled = [0] * len(votes)
    nums = [1] * len(votes)
    for i in competing:
        num, den = divisors.pair(counts[i])
        scaled[i], nums[i] = votes[i] * den, num

    order: List[int] = []
    ties: List[int] = []
    for k in range(n_awards):
        best = [competing[0]]
        for i in competing[1:]:
            b = best[0]
            lhs = scaled[i] * nums[b]
            rhs = scaled[b] * nums[i]
            if lhs > rhs:
                best = [i]
            elif lhs == rhs:
                best.append(i)
        if len(best) > 1:
            winner = breaker.pick(best)
            ties.append(k)
            logger.debug("award %d: tie between %s decided for %s", k, best, winner)
        else:
            winner = best[0]
        order.append(winner)
        counts[winner] += 1
        num, den = divisors.pair(counts[winner])
        scaled[winner], nums[winner] = votes[winner] * den, num
    return AwardList(tuple(order), tuple(counts), tuple(ties))


def highest_averages_allocate(
    votes: Sequence[int],
    house_size: int,
    divisors: DivisorSequence = PURE,
    tie: TieRule = TieRule(),
) -> Tuple[int, ...]:
    return award_sequence(votes, house_size, divisors, tie).totals


def hamilton_split(
    weights: Sequence[int], house_size: int, tie: TieRule = TieRule()
) -> Tuple[Tuple[int, ...], bool]:
    """Hamilton allocation plus a flag telling whether a remainder tie was decided by `tie`."""
    weights = tuple(int(w) for w in weights)
    _check_counts(weights, "weights")
    if house_size < 0:
        raise InvalidRules(f"house size must be nonnegative, got {house_size}")
    total = sum(weights)
    if house_size == 0:
        return (0,) * len(weights), False
    if total == 0:
        raise AllZeroVotes(f"{house_size} seat(s) requested but every weight is zero")

    seats = [house_size * w // total for w in weights]
    # remainders share the denominator `total`, so integers compare exactly
    remainders = [house_size * w % total for w in weights]
    left = house_size - sum(seats)
    if left == 0:
        return tuple(seats), False

    ranked = sorted(range(len(weights)), key=lambda i: (-remainders[i], i))
    cutoff = remainders[ranked[left - 1]]
    above = [i for i in ranked if remainders[i] > cutoff]
    group = [i for i in ranked if remainders[i] == cutoff]
    need = left - len(above)
    tied = need < len(group)
    if tied:
        logger.debug("Hamilton remainder tie among %s for %d seat(s)", group, need)
    for i in above + TieBreaker(tie).pick_many(group, need):
        seats[i] += 1
    return tuple(seats), tied


def hamilton_allocate(weights: Sequence[int], house_size: int, tie: TieRule = TieRule()) -> Tuple[int, ...]:
    return hamilton_split(weights, house_size, tie)[0]

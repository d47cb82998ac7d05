import itertools
import unittest
from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from src.apportion import (
    MODIFIED,
    PURE,
    DivisorSequence,
    Ordering,
    Quotient,
    TieRule,
    award_sequence,
    compare_quotients,
    hamilton_allocate,
    hamilton_split,
    highest_averages_allocate,
)
from src.data import SWEDEN_2010
from src.election_io import load_election
from src.errors import AllZeroVotes, InvalidRules
from src.metrics import ShareVector, sl_measure

votes_vectors = st.lists(st.integers(min_value=0, max_value=10 ** 6), min_size=1, max_size=6).filter(any)


class QuotientTests(unittest.TestCase):
    def test_integer_comparison(self):
        self.assertEqual(compare_quotients(Quotient(97, Fraction(1)), Quotient(98, Fraction(1))), Ordering.LESS)

    def test_divided_comparison(self):
        self.assertEqual(compare_quotients(Quotient(300, Fraction(3)), Quotient(299, Fraction(1))), Ordering.LESS)

    def test_exact_equality_with_modified_divisor(self):
        self.assertEqual(compare_quotients(Quotient(7, Fraction(7, 5)), Quotient(5, Fraction(1))), Ordering.EQUAL)

    def test_float_divisor_rejected(self):
        with self.assertRaises(InvalidRules):
            DivisorSequence(1.4)

    def test_divisor_sequence(self):
        self.assertEqual(MODIFIED.first, Fraction(7, 5))
        self.assertEqual([PURE.divisor(k) for k in range(4)], [1, 3, 5, 7])
        self.assertEqual(MODIFIED.divisor(0), Fraction(7, 5))
        self.assertEqual(MODIFIED.label, "modified-1.4")
        with self.assertRaises(InvalidRules):
            DivisorSequence(Fraction(0))


class AwardSequenceTests(unittest.TestCase):
    def test_two_parties_three_seats(self):
        awards = award_sequence([300, 299], 3)
        self.assertEqual(list(awards), [0, 1, 0])
        self.assertEqual(awards.totals, (2, 1))

    def test_constituency_order(self):
        self.assertEqual(list(award_sequence([195, 201, 203], 3)), [2, 1, 0])

    def test_lopsided_national_split(self):
        self.assertEqual(award_sequence([63000, 3010], 208).totals, (199, 9))

    def test_zero_vote_entity_never_seated(self):
        self.assertEqual(list(award_sequence([100, 0], 5)), [0] * 5)

    def test_all_zero_votes(self):
        with self.assertRaises(AllZeroVotes):
            award_sequence([0, 0], 1)
        self.assertEqual(len(award_sequence([0, 0], 0)), 0)

    def test_initial_counts_continue_the_sequence(self):
        # party with one seat already competes at divisor 3
        awards = award_sequence([300, 150], 1, PURE, TieRule(), initial=[1, 0])
        self.assertEqual(list(awards), [1])
        self.assertEqual(awards.totals, (1, 1))

    def test_ties_recorded(self):
        awards = award_sequence([1, 1, 1], 3)
        self.assertEqual(awards.totals, (1, 1, 1))
        self.assertEqual(awards.ties, (0, 1))

    def test_sweden_2010_national_totals(self):
        election = load_election(SWEDEN_2010)
        seats = highest_averages_allocate(election.party_totals(), 349)
        self.assertEqual(seats, (106, 23, 25, 20, 109, 20, 26, 20))

    def test_seeded_lot_is_reproducible(self):
        rule = TieRule.seeded_lot(12345)
        first = award_sequence([5, 5, 5, 5], 2, PURE, rule)
        again = award_sequence([5, 5, 5, 5], 2, PURE, rule)
        self.assertEqual(first, again)
        self.assertEqual(sum(first.totals), 2)

    def test_tie_rule_validation(self):
        with self.assertRaises(InvalidRules):
            TieRule("seeded-lot")
        with self.assertRaises(InvalidRules):
            TieRule("coin")
        with self.assertRaises(InvalidRules):
            TieRule("lowest-index", 3)

    @settings(max_examples=100, deadline=None)
    @given(votes_vectors, st.integers(min_value=0, max_value=30), st.integers(min_value=0, max_value=30))
    def test_prefix_invariance(self, votes, n, k):
        short = award_sequence(votes, n, MODIFIED)
        longer = award_sequence(votes, n + k, MODIFIED)
        self.assertEqual(longer.order[:n], short.order)

    @settings(max_examples=100, deadline=None)
    @given(votes_vectors, st.integers(min_value=0, max_value=30), st.integers(min_value=2, max_value=1000))
    def test_scale_invariance(self, votes, n, factor):
        self.assertEqual(award_sequence(votes, n), award_sequence([v * factor for v in votes], n))

    @settings(max_examples=100, deadline=None)
    @given(votes_vectors, st.integers(min_value=1, max_value=40), st.data())
    def test_party_monotonicity(self, votes, house, data):
        i = data.draw(st.integers(min_value=0, max_value=len(votes) - 1))
        extra = data.draw(st.integers(min_value=1, max_value=10 ** 5))
        before = highest_averages_allocate(votes, house, MODIFIED)
        bumped = list(votes)
        bumped[i] += extra
        after = highest_averages_allocate(bumped, house, MODIFIED)
        self.assertGreaterEqual(after[i], before[i])
        self.assertEqual(sum(after), house)

    @settings(max_examples=60, deadline=None)
    @given(
        st.lists(st.integers(min_value=1, max_value=500), min_size=2, max_size=4),
        st.integers(min_value=1, max_value=8),
    )
    def test_sainte_lague_minimises_sl_measure(self, votes, house):
        labels = tuple(str(i) for i in range(len(votes)))
        vote_shares = ShareVector(labels, votes)
        best = sl_measure(vote_shares, ShareVector(labels, highest_averages_allocate(votes, house)))
        for seats in itertools.product(range(house + 1), repeat=len(votes)):
            if sum(seats) == house:
                self.assertLessEqual(best, sl_measure(vote_shares, ShareVector(labels, seats)))


class HamiltonTests(unittest.TestCase):
    def test_even_split(self):
        self.assertEqual(hamilton_allocate([1, 1], 2), (1, 1))

    def test_zero_weights(self):
        with self.assertRaises(AllZeroVotes):
            hamilton_allocate([0, 0], 3)

    def test_alabama_paradox(self):
        # the first entity loses its seat when the house grows
        self.assertEqual(hamilton_allocate([1, 3, 3], 3), (1, 1, 1))
        self.assertEqual(hamilton_allocate([1, 3, 3], 4), (0, 2, 2))

    def test_remainder_tie_flagged(self):
        seats, tied = hamilton_split([1, 1, 1], 2)
        self.assertEqual(seats, (1, 1, 0))
        self.assertTrue(tied)
        self.assertFalse(hamilton_split([2, 1], 3)[1])

    def test_sweden_2010_permanent_seats_per_constituency(self):
        election = load_election(SWEDEN_2010)
        seats = hamilton_allocate(election.entitled, 310)
        self.assertEqual(sum(seats), 310)
        by_label = dict(zip(election.constituencies, seats))
        self.assertEqual(by_label["Stockholms stad"], 28)
        self.assertEqual(by_label["Stockholms län"], 37)
        self.assertEqual(by_label["Gotlands län"], 2)

    @settings(max_examples=100, deadline=None)
    @given(votes_vectors, st.integers(min_value=0, max_value=60))
    def test_house_exactness(self, weights, house):
        self.assertEqual(sum(hamilton_allocate(weights, house)), house)


if __name__ == "__main__":
    unittest.main()

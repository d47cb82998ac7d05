import os
import tempfile
import unittest
from fractions import Fraction

from src.apportion import MODIFIED, PURE, DivisorSequence, TieRule
from src.data import DATA_DIR, EXAMPLE_TWO_RULES, SWEDEN_2010, SWEDISH_CURRENT, example_two
from src.election_io import (
    format_election,
    format_rules,
    load_election,
    load_rules,
    parse_delta,
    parse_election,
    parse_rules,
    rules_from_dict,
)
from src.errors import ElectionFileError
from src.systems import Delta, DynamicOptions, ElectionRules

EXAMPLE = """# two parties
constituency,A,B,entitled
I,97,98,195

II,101,100,201
III,102,101,203
"""


class ElectionFileTests(unittest.TestCase):
    def test_parse(self):
        election = parse_election(EXAMPLE)
        self.assertEqual(election, example_two())

    def test_bundled_election(self):
        election = load_election(SWEDEN_2010)
        self.assertEqual(election.parties, ("M", "C", "FP", "KD", "S", "V", "MP", "SD"))
        self.assertEqual(election.n_constituencies, 29)
        self.assertEqual(election.constituencies[0], "Stockholms stad")

    def test_bundled_example_matches_builder(self):
        self.assertEqual(load_election(os.path.join(DATA_DIR, "example_two.csv")), example_two())

    def test_format_then_parse(self):
        election = load_election(SWEDEN_2010)
        self.assertEqual(parse_election(format_election(election)), election)

    def test_bad_count_location(self):
        text = "constituency,A,B,entitled\nI,97,x8,195\n"
        with self.assertRaises(ElectionFileError) as ctx:
            parse_election(text, source="e.csv")
        self.assertEqual((ctx.exception.line, ctx.exception.column), (2, 3))
        self.assertTrue(str(ctx.exception).startswith("e.csv:2:3:"))

    def test_negative_votes(self):
        with self.assertRaises(ElectionFileError) as ctx:
            parse_election("constituency,A,entitled\nI,-1,10\n")
        self.assertEqual(ctx.exception.column, 2)

    def test_header_must_end_with_entitled(self):
        with self.assertRaises(ElectionFileError):
            parse_election("constituency,A,B\nI,1,2\n")

    def test_duplicate_labels(self):
        with self.assertRaises(ElectionFileError):
            parse_election("constituency,A,A,entitled\nI,1,2,3\n")
        with self.assertRaises(ElectionFileError) as ctx:
            parse_election("constituency,A,entitled\nI,1,3\nI,2,3\n")
        self.assertEqual(ctx.exception.line, 3)

    def test_short_row(self):
        with self.assertRaises(ElectionFileError) as ctx:
            parse_election("constituency,A,B,entitled\nI,1,3\n")
        self.assertEqual(ctx.exception.line, 2)

    def test_zero_entitled(self):
        with self.assertRaises(ElectionFileError):
            parse_election("constituency,A,entitled\nI,1,0\n")

    def test_empty(self):
        with self.assertRaises(ElectionFileError):
            parse_election("# nothing\n")
        with self.assertRaises(ElectionFileError):
            parse_election("constituency,A,entitled\n")

    def test_missing_file(self):
        with self.assertRaises(ElectionFileError):
            load_election(os.path.join(DATA_DIR, "no_such_election.csv"))


class RulesFileTests(unittest.TestCase):
    def test_bundled_presets(self):
        rules, opts = load_rules(os.path.join(DATA_DIR, "swedish_current.json"))
        self.assertEqual(rules, SWEDISH_CURRENT)
        self.assertEqual(opts, DynamicOptions())
        rules, _ = load_rules(os.path.join(DATA_DIR, "example_two_rules.json"))
        self.assertEqual(rules, EXAMPLE_TWO_RULES)

    def test_defaults_fill_missing_keys(self):
        rules, _ = rules_from_dict({"house_size": 100, "permanent_seats": 90})
        self.assertEqual(rules, ElectionRules(house_size=100, permanent_seats=90))

    def test_divisor_forms(self):
        rules, _ = rules_from_dict({"within_constituency_divisors": "6/5", "adjustment_divisors": "modified-1.4",
                                    "national_divisors": 1})
        self.assertEqual(rules.within_constituency_divisors, DivisorSequence(Fraction(6, 5)))
        self.assertEqual(rules.adjustment_divisors, MODIFIED)
        self.assertEqual(rules.national_divisors, PURE)

    def test_float_divisor_rejected(self):
        with self.assertRaises(ElectionFileError):
            rules_from_dict({"within_constituency_divisors": 1.4})

    def test_thresholds_must_be_fractions(self):
        with self.assertRaises(ElectionFileError):
            rules_from_dict({"national_threshold": 0.04})
        rules, _ = rules_from_dict({"national_threshold": "1/25"})
        self.assertEqual(rules.national_threshold, Fraction(4, 100))

    def test_tie_and_dynamic(self):
        rules, opts = rules_from_dict({"tie": {"mode": "seeded-lot", "seed": 9},
                                       "dynamic": {"min_permanent": 300, "constituency_floor": 2}})
        self.assertEqual(rules.tie, TieRule.seeded_lot(9))
        self.assertEqual(opts, DynamicOptions(300, 2))

    def test_rejections_carry_the_source(self):
        for doc in ({"house": 349}, {"house_size": "349"}, {"permanent_seats": 400},
                    {"tie": {"mode": "coin"}}, {"dynamic": {"floor": 1}}, []):
            with self.assertRaises(ElectionFileError) as ctx:
                rules_from_dict(doc, source="r.json")
            self.assertTrue(str(ctx.exception).startswith("r.json"))

    def test_json_syntax_error_location(self):
        with self.assertRaises(ElectionFileError) as ctx:
            parse_rules('{\n  "house_size": 349,\n}', source="r.json")
        self.assertEqual(ctx.exception.line, 3)

    def test_format_then_parse(self):
        opts = DynamicOptions(min_permanent=250)
        self.assertEqual(parse_rules(format_rules(SWEDISH_CURRENT, opts)), (SWEDISH_CURRENT, opts))

    def test_written_rules_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "rules.json")
            with open(path, "w", encoding="utf-8") as f:
                f.write(format_rules(EXAMPLE_TWO_RULES))
            self.assertEqual(load_rules(path), (EXAMPLE_TWO_RULES, DynamicOptions()))


class DeltaTests(unittest.TestCase):
    def test_parse(self):
        self.assertEqual(parse_delta("I:B:+1"), Delta("I", "B", 1))
        self.assertEqual(parse_delta("Halland:KD:-1337"), Delta("Halland", "KD", -1337))

    def test_label_with_colon(self):
        self.assertEqual(parse_delta("Region: North:A:5"), Delta("Region: North", "A", 5))

    def test_malformed(self):
        for spec in ("I:B", ":B:1", "I:B:many"):
            with self.assertRaises(ElectionFileError):
                parse_delta(spec)


if __name__ == "__main__":
    unittest.main()

"""Rule presets and small reference elections.

Keep data simple and self-contained so examples and tests run without any
external files; the full 2010 election ships separately in data/.
"""
import os

from .apportion import MODIFIED, PURE
from .systems import ElectionInput, ElectionRules

DATA_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "data")
SWEDEN_2010 = os.path.join(DATA_DIR, "sweden_2010.csv")

# 349 seats, 310 permanent; modified divisor inside constituencies only
SWEDISH_CURRENT = ElectionRules()

DYNAMIC_PURE = ElectionRules(within_constituency_divisors=PURE)
DYNAMIC_MODIFIED = ElectionRules(within_constituency_divisors=MODIFIED)

PRESETS = {
    "swedish-current": SWEDISH_CURRENT,
    "dynamic-pure": DYNAMIC_PURE,
    "dynamic-modified": DYNAMIC_MODIFIED,
}


def example_one() -> ElectionInput:
    """Ten close constituencies and a hundred where only A is voted for; 208 seats."""
    labels = tuple(f"C{i}" for i in range(1, 111))
    votes = [(300, 301)] * 10 + [(600, 0)] * 100
    return ElectionInput(("A", "B"), labels, votes, [a + b for a, b in votes])


EXAMPLE_ONE_RULES = ElectionRules(
    house_size=208, permanent_seats=0, national_threshold=0, constituency_threshold=0,
    within_constituency_divisors=PURE,
)


def example_two(moved_vote: bool = False) -> ElectionInput:
    """Two parties, three constituencies, three seats; full turnout."""
    first = (96, 99) if moved_vote else (97, 98)
    votes = [first, (101, 100), (102, 101)]
    return ElectionInput(("A", "B"), ("I", "II", "III"), votes, [a + b for a, b in votes])


EXAMPLE_TWO_RULES = ElectionRules(
    house_size=3, permanent_seats=0, national_threshold=0, constituency_threshold=0,
    within_constituency_divisors=PURE,
)

HALLAND_2006_PARTIES = ("M", "C", "FP", "KD", "S", "VP", "MP")
HALLAND_2006_VOTES = (53257, 18589, 13798, 11987, 56747, 7110, 7236)


def halland_2006() -> ElectionInput:
    """The Halland constituency alone, 2006: ten permanent seats."""
    return ElectionInput(HALLAND_2006_PARTIES, ("Halland",), [HALLAND_2006_VOTES], [sum(HALLAND_2006_VOTES)])


HALLAND_RULES = ElectionRules(house_size=10, permanent_seats=10)

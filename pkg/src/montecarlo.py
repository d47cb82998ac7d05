"""Perturbation experiments around an observed election.

Every replication multiplies each cell by two independent uniform factors, one
per party and one per cell, then runs the dynamic method (and the current
system for comparison). Replication k draws from
default_rng(SeedSequence([seed, k])), so results depend on the seed only and
never on how replications are spread over worker processes.
"""
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple
import logging
import time

import numpy as np

from . import metrics
from .apportion import MODIFIED, TieBreaker, hamilton_allocate, next_award
from .errors import ApportionmentError, InfeasibleAdjustment, InfeasibleProbe, InvalidRules, ReplicationError
from .systems import (
    PERMANENT,
    DynamicOptions,
    ElectionInput,
    ElectionRules,
    SeatOutcome,
    allocate_current,
    allocate_dynamic,
    eligibility,
    national_awards,
    national_reference,
)

logger = logging.getLogger(__name__)

CONCENTRATED = "concentrated"
PROPORTIONAL = "proportional"
STRATEGIES = (CONCENTRATED, PROPORTIONAL)

DYNAMIC_PURE = "dynamic"
DYNAMIC_MODIFIED = "dynamic-modified"
CURRENT = "current"


@dataclass(frozen=True)
class PerturbationConfig:
    seed: int
    n_replications: int = 10000
    factor_low: float = 0.9
    factor_high: float = 1.1

    def __post_init__(self):
        if self.n_replications < 1:
            raise InvalidRules(f"need at least one replication, got {self.n_replications}")
        if not 0 < self.factor_low <= self.factor_high:
            raise InvalidRules(f"factors must satisfy 0 < low <= high, got ({self.factor_low}, {self.factor_high})")
        if not 0 <= self.seed < 2 ** 64:
            raise InvalidRules("seed must be an unsigned 64-bit integer")


def replication_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, index]))


def perturb(election: ElectionInput, config: PerturbationConfig, rng: np.random.Generator) -> ElectionInput:
    """One perturbed election: party factors are drawn before cell factors."""
    votes = np.array(election.votes, dtype=np.float64)
    p = rng.uniform(config.factor_low, config.factor_high, size=election.n_parties)
    x = rng.uniform(config.factor_low, config.factor_high, size=votes.shape)
    perturbed = np.floor(votes * p * x + 0.5).astype(np.int64)
    return election.with_votes(perturbed.tolist())


@dataclass(frozen=True)
class NonMonoTriple:
    """A: last national award; B: runner-up for the next one; K: where B's seat is at risk."""

    a: int
    b: int
    k: int


@dataclass(frozen=True)
class ProbeResult:
    strategy: str
    votes_added: int
    lost_permanent: bool
    gained_adjustment: bool
    candidate_lost: bool
    # largest addition that does not move a seat to B
    certificate: int = 0


@dataclass(frozen=True)
class NonMonoScan:
    triple: Optional[NonMonoTriple] = None
    concentrated: Optional[ProbeResult] = None
    proportional: Optional[ProbeResult] = None


def find_nonmono_triple(
    election: ElectionInput,
    rules: ElectionRules,
    opts: Optional[DynamicOptions] = None,
    outcome: Optional[SeatOutcome] = None,
) -> Optional[NonMonoTriple]:
    """Check whether one extra national seat for the runner-up could cost it a local seat.

    Conditions: the last national award went to A, all of A's seats were
    placed before the stop, and B (the party with the highest next comparison
    number) took a permanent seat after A's final permanent seat. K is the
    constituency of the last such seat.
    """
    outcome = outcome or allocate_dynamic(election, rules, opts)
    awards = national_awards(election, rules)
    if not awards.order:
        return None
    a = awards.order[-1]
    if sum(row[a] for row in outcome.adjustment) or outcome.permanent_by_party()[a] != outcome.final_targets[a]:
        return None

    national, _ = eligibility(election, rules)
    contenders = [j for j in range(election.n_parties) if national[j] and j != a]
    b, _ = next_award(election.party_totals(), awards.totals, rules.national_divisors, TieBreaker(rules.tie), contenders)
    if b is None:
        return None

    permanent = [r for r in outcome.award_log if r.phase == PERMANENT]
    last_a = max(n for n, r in enumerate(permanent) if r.party == a)
    later_b = [r.constituency for r in permanent[last_a + 1:] if r.party == b]
    if not later_b:
        return None
    return NonMonoTriple(a, b, later_b[-1])


def _add_votes(election: ElectionInput, triple: NonMonoTriple, strategy: str, amount: int) -> ElectionInput:
    votes = [list(row) for row in election.votes]
    if strategy == CONCENTRATED:
        votes[triple.k][triple.b] += amount
    elif strategy == PROPORTIONAL:
        if amount > 0:
            spread = hamilton_allocate(election.column(triple.b), amount - 1)
            for i, extra in enumerate(spread):
                votes[i][triple.b] += extra
            votes[triple.k][triple.b] += 1
    else:
        raise InvalidRules(f"unknown probe strategy {strategy!r}; expected one of {', '.join(STRATEGIES)}")
    return election.with_votes(votes)


def probe_nonmono(
    election: ElectionInput,
    rules: ElectionRules,
    triple: NonMonoTriple,
    strategy: str,
    opts: Optional[DynamicOptions] = None,
    before: Optional[SeatOutcome] = None,
) -> ProbeResult:
    """Add the fewest votes to B, shaped by `strategy`, that give B one more national seat."""
    goal = national_reference(election, rules)[triple.b] + 1

    def flips(amount: int) -> bool:
        return national_reference(_add_votes(election, triple, strategy, amount), rules)[triple.b] >= goal

    # any addition beyond this bound beats every comparison number
    limit = (election.total_votes + 1) * (2 * rules.house_size + 1) * rules.national_divisors.first.denominator
    hi = 1
    while not flips(hi):
        hi *= 2
        if hi > 2 * limit:
            raise InfeasibleProbe(f"no addition up to {hi} votes moves a seat to {election.parties[triple.b]!r}")
    lo = hi // 2 if hi > 1 else 0
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if flips(mid):
            hi = mid
        else:
            lo = mid
        logger.debug("probe %s: bracket [%d, %d]", strategy, lo, hi)
    if flips(lo) and lo > 0:
        raise InfeasibleProbe(f"minimal addition certificate failed at {lo}")

    before = before or allocate_dynamic(election, rules, opts)
    after = allocate_dynamic(_add_votes(election, triple, strategy, hi), rules, opts)
    k, b = triple.k, triple.b
    return ProbeResult(
        strategy=strategy,
        votes_added=hi,
        lost_permanent=after.permanent[k][b] < before.permanent[k][b],
        gained_adjustment=after.adjustment[k][b] > before.adjustment[k][b],
        candidate_lost=after.totals()[k][b] < before.totals()[k][b],
        certificate=lo,
    )


def scan_nonmono(
    election: ElectionInput,
    rules: ElectionRules,
    opts: Optional[DynamicOptions] = None,
    outcome: Optional[SeatOutcome] = None,
) -> NonMonoScan:
    outcome = outcome or allocate_dynamic(election, rules, opts)
    triple = find_nonmono_triple(election, rules, opts, outcome)
    if triple is None:
        return NonMonoScan()
    return NonMonoScan(
        triple,
        probe_nonmono(election, rules, triple, CONCENTRATED, opts, outcome),
        probe_nonmono(election, rules, triple, PROPORTIONAL, opts, outcome),
    )


@dataclass(frozen=True)
class SystemResult:
    adjustment_seats: int
    lh: float
    sl: float


@dataclass(frozen=True)
class ReplicationResult:
    index: int
    results: Dict[str, SystemResult]
    but: bool
    scan: Optional[NonMonoScan] = None


def _check_exact(outcome: SeatOutcome) -> None:
    if outcome.party_totals() != outcome.final_targets:
        raise InfeasibleAdjustment("dynamic outcome misses a party target")


def _system_result(election: ElectionInput, outcome: SeatOutcome) -> SystemResult:
    lh, sl = metrics.constituency_pair(election, outcome)
    return SystemResult(outcome.adjustment_count, float(lh), float(sl))


def run_replication(
    election: ElectionInput,
    rules: ElectionRules,
    current_rules: ElectionRules,
    opts: Optional[DynamicOptions],
    config: PerturbationConfig,
    index: int,
    compare_modified: bool = False,
    scan: bool = True,
) -> ReplicationResult:
    perturbed = perturb(election, config, replication_rng(config.seed, index))
    dynamic = allocate_dynamic(perturbed, rules, opts)
    _check_exact(dynamic)
    current = allocate_current(perturbed, current_rules)
    results = {
        DYNAMIC_PURE: _system_result(perturbed, dynamic),
        CURRENT: _system_result(perturbed, current),
    }
    if compare_modified:
        modified = allocate_dynamic(perturbed, rules.with_within(MODIFIED), opts)
        _check_exact(modified)
        results[DYNAMIC_MODIFIED] = _system_result(perturbed, modified)
    nonmono = scan_nonmono(perturbed, rules, opts, dynamic) if scan else None
    return ReplicationResult(index, results, bool(current.but_parties), nonmono)


def _run_chunk(args) -> List[ReplicationResult]:
    """Worker entry point; module level so ProcessPoolExecutor can pickle it."""
    election, rules, current_rules, opts, config, indices, compare_modified, scan = args
    out = []
    for index in indices:
        try:
            out.append(run_replication(election, rules, current_rules, opts, config, int(index), compare_modified, scan))
        except ApportionmentError as exc:
            raise ReplicationError(int(index), exc) from exc
    return out


@dataclass(frozen=True)
class SeatHistogram:
    """Decade bins (20 covers 20-29) and raw value counts of adjustment seats."""

    bins: Tuple[Tuple[int, int], ...]
    counts: Tuple[Tuple[int, int], ...]
    mean: float
    maximum: int
    minimum: int
    std: float

    @classmethod
    def from_values(cls, values: Sequence[int]) -> "SeatHistogram":
        arr = np.asarray(values, dtype=np.int64)
        decades = np.bincount(arr // 10)
        raw = np.bincount(arr)
        return cls(
            bins=tuple((10 * d, int(c)) for d, c in enumerate(decades) if c),
            counts=tuple((v, int(c)) for v, c in enumerate(raw) if c),
            mean=float(arr.mean()),
            maximum=int(arr.max()),
            minimum=int(arr.min()),
            std=float(arr.std()),
        )


@dataclass(frozen=True)
class MeasureSummary:
    system: str
    lh: Tuple[float, ...]
    sl: Tuple[float, ...]

    @property
    def lh_mean(self) -> float:
        return float(np.mean(self.lh))

    @property
    def lh_max(self) -> float:
        return float(np.max(self.lh))

    @property
    def sl_mean(self) -> float:
        return float(np.mean(self.sl))

    @property
    def sl_max(self) -> float:
        return float(np.max(self.sl))


@dataclass(frozen=True)
class NonMonoSummary:
    triples: int = 0
    concentrated_lost_permanent: int = 0
    concentrated_gained_adjustment: int = 0
    concentrated_candidate_lost: int = 0
    proportional_candidate_lost: int = 0

    @classmethod
    def from_scans(cls, scans: Sequence[NonMonoScan]) -> "NonMonoSummary":
        found = [s for s in scans if s.triple is not None]
        return cls(
            triples=len(found),
            concentrated_lost_permanent=sum(s.concentrated.lost_permanent for s in found),
            concentrated_gained_adjustment=sum(
                s.concentrated.lost_permanent and s.concentrated.gained_adjustment for s in found
            ),
            concentrated_candidate_lost=sum(s.concentrated.candidate_lost for s in found),
            proportional_candidate_lost=sum(s.proportional.candidate_lost for s in found),
        )


@dataclass(frozen=True)
class BatchStats:
    config: PerturbationConfig
    adjustment: SeatHistogram
    but_count: int
    measures: Dict[str, MeasureSummary]
    modified_adjustment: Optional[SeatHistogram] = None
    nonmono: Optional[NonMonoSummary] = None
    replications: Tuple[ReplicationResult, ...] = field(default=(), repr=False)

    @property
    def n_replications(self) -> int:
        return self.config.n_replications

    @property
    def but_rate(self) -> float:
        return self.but_count / self.n_replications

    @property
    def sl_dynamic_better(self) -> float:
        """Fraction of replications where the dynamic method has the lower constituency SL."""
        better = sum(r.results[DYNAMIC_PURE].sl < r.results[CURRENT].sl for r in self.replications)
        return better / self.n_replications


def aggregate(config: PerturbationConfig, replications: Sequence[ReplicationResult]) -> BatchStats:
    replications = tuple(sorted(replications, key=lambda r: r.index))
    systems = list(replications[0].results)
    measures = {
        s: MeasureSummary(s, tuple(r.results[s].lh for r in replications), tuple(r.results[s].sl for r in replications))
        for s in systems
    }
    modified = None
    if DYNAMIC_MODIFIED in systems:
        modified = SeatHistogram.from_values([r.results[DYNAMIC_MODIFIED].adjustment_seats for r in replications])
    scans = [r.scan for r in replications if r.scan is not None]
    return BatchStats(
        config=config,
        adjustment=SeatHistogram.from_values([r.results[DYNAMIC_PURE].adjustment_seats for r in replications]),
        but_count=sum(r.but for r in replications),
        measures=measures,
        modified_adjustment=modified,
        nonmono=NonMonoSummary.from_scans(scans) if scans else None,
        replications=replications,
    )


def run_batch(
    election: ElectionInput,
    rules: ElectionRules,
    opts: Optional[DynamicOptions],
    config: PerturbationConfig,
    *,
    current_rules: Optional[ElectionRules] = None,
    compare_modified: bool = False,
    scan: bool = True,
    workers: int = 1,
) -> BatchStats:
    """Run `config.n_replications` perturbed elections and aggregate them.

    `rules` drive the dynamic method; the current system uses `current_rules`,
    by default the same rules with the modified first divisor inside
    constituencies.
    """
    current_rules = current_rules or rules.with_within(MODIFIED)
    start = time.perf_counter()
    n = config.n_replications
    logger.info("simulating %d replications (seed %d, %d worker(s))", n, config.seed, workers)

    if workers <= 1:
        results = _run_chunk((election, rules, current_rules, opts, config, range(n), compare_modified, scan))
    else:
        n_chunks = min(workers * 4, n)
        chunks = np.array_split(np.arange(n), n_chunks)
        results = []
        with ProcessPoolExecutor(max_workers=workers) as executor:
            futures = [
                executor.submit(
                    _run_chunk,
                    (election, rules, current_rules, opts, config, chunk.tolist(), compare_modified, scan),
                )
                for chunk in chunks
            ]
            for future in as_completed(futures):
                results.extend(future.result())

    stats = aggregate(config, results)
    logger.info(
        "finished %d replications in %.1fs: mean %.2f adjustment seats (max %d), BUT in %d",
        n, time.perf_counter() - start, stats.adjustment.mean, stats.adjustment.maximum, stats.but_count,
    )
    if stats.nonmono is not None:
        logger.info(
            "non-monotonicity: %d triples, %d lost permanent, %d regained as adjustment, %d/%d candidate losses",
            stats.nonmono.triples,
            stats.nonmono.concentrated_lost_permanent,
            stats.nonmono.concentrated_gained_adjustment,
            stats.nonmono.concentrated_candidate_lost,
            stats.nonmono.proportional_candidate_lost,
        )
    return stats

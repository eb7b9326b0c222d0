"""
Definition-literal evaluators for tiny supports.

Nothing here uses the interval reduction or the greedy membership automaton:
node sets are arbitrary subsets of the support, partitions are every
composition of a set into successive pieces, and membership in S_n tries
every decomposition. The engine is checked against these functions.
"""
import itertools as it
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from . import engine
from .config import DEFAULT_SETTINGS, Settings
from .exceptions import BoundExceeded, InvalidDef, SupportTooLarge
from .schreier import FinSet, fin_set
from .vectors import FinVec

logger = logging.getLogger(__name__)


# ---------- Schreier families ----------

def _compositions(items: Sequence, minimum_parts: int = 1) -> Iterator[List[Tuple]]:
    """Every split of `items` into consecutive nonempty pieces."""
    size = len(items)
    for count in range(max(minimum_parts, 1) - 1, size):
        for cuts in it.combinations(range(1, size), count):
            bounds = (0,) + cuts + (size,)
            yield [tuple(items[bounds[i]:bounds[i + 1]]) for i in range(len(bounds) - 1)]


@lru_cache(maxsize=None)
def _literal_member(points: FinSet, n: int) -> bool:
    if len(points) <= 1:
        return True
    if n == 0:
        return False
    for pieces in _compositions(points):
        if len(pieces) <= points[0] and all(_literal_member(piece, n - 1) for piece in pieces):
            return True
    return False


def brute_member(F: Sequence[int], n: int, settings: Settings = DEFAULT_SETTINGS) -> bool:
    """Membership in S_n by trying every decomposition."""
    points = fin_set(F)
    if len(points) > settings.brute_member_max_size or n > settings.brute_member_max_order:
        raise BoundExceeded(
            f"brute membership is limited to |F| <= {settings.brute_member_max_size} "
            f"and n <= {settings.brute_member_max_order}"
        )
    return _literal_member(points, n)


def _admissible(mins: Sequence[int], k: int, scale: int) -> bool:
    return _literal_member(tuple(scale * m for m in mins), k)


def _subsets(items: Sequence) -> Iterator[Tuple]:
    for r in range(1, len(items) + 1):
        yield from it.combinations(items, r)


def _guard(x: FinVec, settings: Settings) -> None:
    if len(x) > settings.oracle_support_bound:
        raise SupportTooLarge(len(x), settings.oracle_support_bound)


# ---------- Norms ----------

def _brute_level_tree(x: FinVec, definition: engine.LevelTree) -> Fraction:
    rule = definition.terminal
    offset, period = (0, 1) if isinstance(rule, engine.AllLevels) else (rule.j, rule.n)
    ratio = definition.ratio
    scale = definition.scale

    def next_state(d: int) -> int:
        return d - 1 if d > 0 else period - 1

    @lru_cache(maxsize=None)
    def leaf(points: FinSet) -> Fraction:
        return definition.leaf.evaluate(x.restrict(points))

    @lru_cache(maxsize=None)
    def tree(points: FinSet, d: int) -> Fraction:
        # Normalized value of the best subtree rooted at `points`. A node with
        # a single child keeps its set, so chains are unrolled for one period.
        top = Fraction(0)
        factor = Fraction(1)
        s = d
        for _ in range(d + period):
            if s == 0:
                top = max(top, factor * leaf(points))
            nxt = next_state(s)
            for pieces in _compositions(points, minimum_parts=2):
                if _admissible([p[0] for p in pieces], 1, scale):
                    top = max(top, factor * ratio * sum(tree(p, nxt) for p in pieces))
            s, factor = nxt, factor * ratio
        return top

    best = max(tree(points, offset) for points in _subsets(x.support))
    if definition.floor is engine.Floor.SUP_NORM:
        best = max(best, x.sup_norm())
    return best


def _brute_implicit(x: FinVec, definition: engine.ImplicitEq) -> Fraction:
    rules = definition.rules
    scale = definition.scale
    values = {p: abs(v) for p, v in x.items()}

    @lru_cache(maxsize=None)
    def exact_split(points: FinSet, k: int) -> Optional[Fraction]:
        """Best k-admissible partition of exactly `points` into at least two pieces."""
        top = None
        for pieces in _compositions(points, minimum_parts=2):
            if _admissible([p[0] for p in pieces], k, scale):
                total = sum(norm(p) for p in pieces)
                if top is None or total > top:
                    top = total
        return top

    @lru_cache(maxsize=None)
    def any_split(points: FinSet, k: int) -> Optional[Fraction]:
        """Best over all subsets of `points` (sequences need not cover the set)."""
        top = exact_split(points, k)
        for drop in range(len(points)):
            rest = points[:drop] + points[drop + 1:]
            if len(rest) >= 2:
                candidate = any_split(rest, k)
                if candidate is not None and (top is None or candidate > top):
                    top = candidate
        return top

    def orders(points: FinSet, best: Fraction) -> Iterator[int]:
        if isinstance(rules, engine.FiniteRules):
            yield from sorted({k for k, _ in rules.weights})
            return
        # Beyond k = |points| every order admits the same sequences; keep
        # going until theta^k times that sum cannot beat the best value.
        k = 1
        while True:
            yield k
            k += 1
            if k > len(points):
                ceiling = any_split(points, len(points))
                if ceiling is None or rules.theta ** k * ceiling <= best:
                    return

    @lru_cache(maxsize=None)
    def norm(points: FinSet) -> Fraction:
        best = max(values[p] for p in points)
        if len(points) < 2:
            return best
        for k in orders(points, best):
            inner = any_split(points, min(k, len(points)))
            if inner is not None:
                best = max(best, rules.weight(k) * inner)
        return best

    return norm(x.support)


def brute_norm(x: FinVec, definition: engine.NormDef, settings: Settings = DEFAULT_SETTINGS) -> Fraction:
    """Exact norm by enumerating every admissible tree over arbitrary subsets."""
    engine.validate(definition)
    _guard(x, settings)
    if not x:
        return Fraction(0)
    if isinstance(definition, engine.ImplicitEq):
        return _brute_implicit(x, definition)
    return _brute_level_tree(x, definition)


def brute_schreier_norm(x: FinVec, m: int, settings: Settings = DEFAULT_SETTINGS) -> Fraction:
    _guard(x, settings)
    best = Fraction(0)
    for points in _subsets(x.support):
        if _literal_member(points, m):
            best = max(best, abs(sum(x[p] for p in points)))
    return best


def brute_admissible_sum(x: FinVec, k: int, leaf: Callable[[FinVec], Fraction], scale: int = 1,
                         settings: Settings = DEFAULT_SETTINGS) -> Tuple[Fraction, Tuple[FinSet, ...]]:
    """
    Max of sum leaf(E_i x) over k-admissible (scale) successive sequences of
    nonempty subsets of supp x, by enumeration. The leaf may be any function.
    """
    _guard(x, settings)
    if k < 0 or scale < 1:
        raise InvalidDef(f"need k >= 0 and scale >= 1, got k={k}, scale={scale}")
    if not x:
        return Fraction(0), ()
    cache: Dict[FinSet, Fraction] = {}

    def value(points: FinSet) -> Fraction:
        if points not in cache:
            cache[points] = leaf(x.restrict(points))
        return cache[points]

    best: Optional[Fraction] = None
    witness: Tuple[FinSet, ...] = ()
    for points in _subsets(x.support):
        for pieces in _compositions(points):
            if not _admissible([p[0] for p in pieces], k, scale):
                continue
            total = sum(value(p) for p in pieces)
            if best is None or total > best:
                best, witness = total, tuple(pieces)
    return best, witness


# ---------- Equivalence sweep ----------

SWEEP_DEFINITIONS: Dict[str, engine.NormDef] = {
    "T(S_1,1/2)": engine.tsirelson_def(),
    "T(S_2,1/4)": engine.implicit_def(2, Fraction(1, 4)),
    "|.|_1^2": engine.seminorm_jn_def(1, 2),
    "||.||_1^2": engine.norm_jn_def(1, 2),
    "mixed(1-2^-k)": engine.mixed_def(engine.geometric_coefficient),
}
SWEEP_SCHREIER_ORDERS = (1, 2)


def random_vector(rng: np.random.Generator, max_support: int) -> FinVec:
    """Random FinVec with 1..max_support points and entries p/q in [-4, 4], q <= 4."""
    size = int(rng.integers(1, max_support + 1))
    positions = sorted(int(p) for p in rng.choice(np.arange(1, 2 * max_support + 3), size=size, replace=False))
    entries = {}
    for p in positions:
        q = int(rng.integers(1, 5))
        numerator = int(rng.integers(1, 4 * q + 1)) * (1 if rng.random() < 0.5 else -1)
        entries[p] = Fraction(numerator, q)
    return FinVec(entries)


@dataclass
class TrialOutcome:
    vector: FinVec
    mismatches: List[str] = field(default_factory=list)

    @property
    def matched(self) -> bool:
        return not self.mismatches


def run_trial(x: FinVec, settings: Settings = DEFAULT_SETTINGS) -> TrialOutcome:
    outcome = TrialOutcome(x)
    for name, definition in SWEEP_DEFINITIONS.items():
        result = engine.evaluate(x, definition, settings)
        expected = brute_norm(x, definition, settings)
        if result.value != expected:
            outcome.mismatches.append(f"{name}: engine {result.value} != oracle {expected}")
            continue
        certified = engine.check_certificate(x, definition, result.certificate)
        if certified != result.value:
            outcome.mismatches.append(f"{name}: certificate gives {certified}, engine {result.value}")
    for m in SWEEP_SCHREIER_ORDERS:
        value = engine.schreier_norm(x, m)
        expected = brute_schreier_norm(x, m, settings)
        if value != expected:
            outcome.mismatches.append(f"schreier m={m}: engine {value} != oracle {expected}")
    return outcome


@dataclass
class SweepReport:
    support: int
    seed: int
    outcomes: List[TrialOutcome]

    @property
    def trials(self) -> int:
        return len(self.outcomes)

    @property
    def matches(self) -> int:
        return sum(1 for o in self.outcomes if o.matched)

    @property
    def ok(self) -> bool:
        return self.matches == self.trials

    def summary(self) -> str:
        return f"{self.matches}/{self.trials} exact matches"

    def mismatch_frame(self) -> pd.DataFrame:
        rows = [
            {"trial": i, "vector": repr(o.vector), "detail": detail}
            for i, o in enumerate(self.outcomes)
            for detail in o.mismatches
        ]
        return pd.DataFrame(rows, columns=["trial", "vector", "detail"])


def equivalence_sweep(support: int, trials: int, seed: int, settings: Settings = DEFAULT_SETTINGS) -> SweepReport:
    """Compare engine and oracle on `trials` seeded random vectors."""
    if support > settings.oracle_support_bound:
        raise SupportTooLarge(support, settings.oracle_support_bound)
    rng = np.random.default_rng(seed)
    vectors = [random_vector(rng, support) for _ in range(trials)]
    logger.info(f"Running equivalence sweep: {trials} trials, support <= {support}, seed {seed}")
    outcomes = Parallel(n_jobs=settings.jobs)(delayed(run_trial)(x, settings) for x in vectors)
    report = SweepReport(support, seed, list(outcomes))
    if not report.ok:
        logger.warning(f"Equivalence sweep found {report.trials - report.matches} mismatching trials")
    return report

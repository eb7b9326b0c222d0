"""
Norm combinators on top of a base norm, the delta_n modulus and the
experiment harness.

Experiments return report objects that turn into pandas DataFrames with the
columns experiment, n, j, value_exact, value_decimal, d, ratio, so that the
CLI can print them or write them as CSV.
"""
import dataclasses
import logging
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from . import engine, oracle
from .config import DEFAULT_SETTINGS, Budgets, ExperimentConfig, Settings
from .construct import BlockBasis, build_stabilized, l1_average, n_eps_average, unit_basis
from .exceptions import BudgetExceeded, EpsilonTooSmallForBudget, TsirelsonLabError, UnverifiedUnconditionality, VerificationError
from .schreier import maximal_extension
from .vectors import FinVec, format_decimal

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ["experiment", "n", "j", "value_exact", "value_decimal", "d", "ratio"]


class BaseNorm(engine.Leaf):
    """
    An equivalent norm |.| given by an evaluator.

    Norms declared 1-unconditional are evaluated through interval tables;
    other norms fall back to enumeration over arbitrary subsets.
    """

    def __init__(self, evaluator: Callable[[FinVec], Fraction], declared_unconditional: bool = False,
                 name: str = "base", leaf: Optional[engine.Leaf] = None):
        self.evaluator = evaluator
        self.declared_unconditional = declared_unconditional
        self.name = name
        self._leaf = leaf

    @classmethod
    def from_definition(cls, definition: engine.NormDef, settings: Settings = DEFAULT_SETTINGS) -> "BaseNorm":
        leaf = engine.DefinitionLeaf(definition, settings)
        return cls(leaf.evaluate, True, leaf.name, leaf)

    @classmethod
    def sup(cls) -> "BaseNorm":
        return cls(engine.SUP_LEAF.evaluate, True, "sup", engine.SUP_LEAF)

    def evaluate(self, x: FinVec) -> Fraction:
        return Fraction(self.evaluator(x))

    def __call__(self, x: FinVec) -> Fraction:
        return self.evaluate(x)

    def interval_table(self, x: FinVec) -> List[List[Optional[Fraction]]]:
        if self._leaf is not None:
            return self._leaf.interval_table(x)
        return super().interval_table(x)

    def spot_check(self, x: FinVec) -> bool:
        """|Ex| <= |x| for every restriction of x to a support interval or a one-point deletion."""
        whole = self.evaluate(x)
        table = self.interval_table(x)
        if any(value is not None and value > whole for row in table for value in row):
            return False
        support = x.support
        return all(self.evaluate(x.restrict(support[:a] + support[a + 1:])) <= whole for a in range(len(support)))


TSIRELSON_BASE = BaseNorm.from_definition(engine.tsirelson_def())
SPOT_CHECK_TRIALS = 8
SPOT_CHECK_SUPPORT = 6


def _unverified(base: BaseNorm) -> None:
    message = f"base norm '{base.name}' is not declared 1-unconditional; using exhaustive subsets"
    logger.warning(message)
    warnings.warn(message, UnverifiedUnconditionality, stacklevel=3)


def _spot_check_input(base: BaseNorm, x: FinVec) -> None:
    if x and not base.spot_check(x):
        message = f"base norm '{base.name}' is declared 1-unconditional but grows under a restriction of the input"
        logger.warning(message)
        warnings.warn(message, UnverifiedUnconditionality, stacklevel=3)


def spot_check_base(base: BaseNorm, rng: np.random.Generator, trials: int = SPOT_CHECK_TRIALS,
                    max_support: int = SPOT_CHECK_SUPPORT) -> bool:
    """Spot-check a declared base norm on random vectors; warns and returns False on the first failure."""
    for _ in range(trials):
        x = oracle.random_vector(rng, max_support)
        if not base.spot_check(x):
            message = f"base norm '{base.name}' failed the unconditionality spot check on {x!r}"
            logger.warning(message)
            warnings.warn(message, UnverifiedUnconditionality, stacklevel=2)
            return False
    return True


def norm_j(x: FinVec, j: int, base: BaseNorm, settings: Settings = DEFAULT_SETTINGS) -> Fraction:
    """|x|_j = 2^-j sup { sum |E_i x| : (E_i) j-admissible }."""
    if j < 0:
        raise ValueError("j must be nonnegative")
    if j == 0:
        return base.evaluate(x)
    if base.declared_unconditional:
        _spot_check_input(base, x)
        value, _ = engine.best_admissible_sum(x, j, base, settings=settings)
    else:
        _unverified(base)
        value, _ = oracle.brute_admissible_sum(x, j, base.evaluate, settings=settings)
    return value / 2 ** j


def norm_avg(x: FinVec, n: int, base: BaseNorm, settings: Settings = DEFAULT_SETTINGS) -> Fraction:
    """(1/n) sum_{j<n} |x|_j."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return sum((norm_j(x, j, base, settings) for j in range(n)), Fraction(0)) / n


def tree_norm_def(base: BaseNorm) -> engine.LevelTree:
    return engine.LevelTree(terminal=engine.AllLevels(), floor=engine.Floor.NONE, leaf=base)


def norm_tr(x: FinVec, base: BaseNorm, settings: Settings = DEFAULT_SETTINGS) -> Fraction:
    """sup over admissible trees of sum 2^-level |E x| on the terminal sets."""
    definition = tree_norm_def(base)
    if base.declared_unconditional:
        _spot_check_input(base, x)
        return engine.evaluate(x, definition, settings).value
    _unverified(base)
    return oracle.brute_norm(x, definition, settings)


# ---------- delta_n ----------

@dataclass
class DeltaSearch:
    n: int
    value: Fraction
    witness: Tuple[FinVec, ...]
    rows: List[Dict[str, object]] = field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=["family", "size", "sum_norm", "norm_sum", "ratio", "running_min"])


def _tail_blocks(basis: BlockBasis, start: int, width: int, count: int) -> List[FinVec]:
    blocks = []
    for index in range(start, len(basis) - width + 1, width):
        if len(blocks) == count:
            break
        block = basis[index]
        for extra in range(1, width):
            block = block + basis[index + extra]
        blocks.append(block)
    return blocks


def _admissible_prefix(blocks: Sequence[FinVec], n: int, family: int) -> List[FinVec]:
    mins = [b.min_support for b in blocks[:family]]
    return list(blocks[:len(maximal_extension(mins, n))])


def _maximal_family(basis: BlockBasis, start: int, n: int, limit: int) -> Optional[List[FinVec]]:
    """
    Basis vectors from `start` on forming a maximal S_n family, or None when
    that family needs more than `limit` points.
    """
    window: List[FinVec] = []
    used = 0
    for y in basis.vectors[start:]:
        if used + len(y) > limit:
            break
        window.append(y)
        used += len(y)
    chosen = maximal_extension([y.min_support for y in window], n)
    if len(chosen) == len(window):
        return None
    return window[:len(chosen)]


def _candidate_families(basis: BlockBasis, n: int, budget: Budgets, limit: int,
                        settings: Settings) -> Iterable[Tuple[str, List[FinVec]]]:
    """
    Searched families in a fixed order: singletons, maximal S_n families,
    uniform tail blocks, successive averages. Maximal families and averages
    try at most budget.family starting points.
    """
    for start in range(len(basis)):
        family = _admissible_prefix(basis.vectors[start:start + budget.family], n, budget.family)
        yield f"singletons@{start + 1}", family
        if len(family) == budget.family:
            break
    for start in range(min(budget.family, len(basis))):
        maximal = _maximal_family(basis, start, n, limit)
        if maximal is None:
            break
        if len(maximal) >= 2:
            yield f"maximal@{start + 1}", maximal
    for width in range(2, budget.block_width + 1):
        for start in range(len(basis)):
            family = _admissible_prefix(_tail_blocks(basis, start, width, budget.family), n, budget.family)
            if not family:
                break
            yield f"width{width}@{start + 1}", family
            if len(family) == budget.family:
                break
    for start in range(2, min(budget.family + 2, len(basis) + 1)):
        averages: List[FinVec] = []
        used = 0
        position = start
        try:
            while len(averages) < budget.family:
                average = l1_average(basis, 1, position, settings)
                if used + len(average) > limit:
                    break
                averages.append(average)
                used += len(average)
                position += len(average)
        except TsirelsonLabError:
            pass
        family = _admissible_prefix(averages, n, budget.family)
        if len(family) < 2:
            break
        yield f"averages@{start}", family


def delta_n_search(basis: BlockBasis, base: BaseNorm, n: int, budget: Optional[Budgets] = None,
                   settings: Settings = DEFAULT_SETTINGS) -> DeltaSearch:
    """
    Running minimum of |sum x_i| / sum |x_i| over the searched n-admissible
    families. Families whose union exceeds the smaller of budget.support and
    settings.support_bound points are not evaluated.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    budget = budget or Budgets.from_settings(settings)
    limit = min(budget.support, settings.support_bound)
    best: Optional[Fraction] = None
    witness: Tuple[FinVec, ...] = ()
    rows: List[Dict[str, object]] = []
    for label, family in _candidate_families(basis, n, budget, limit, settings):
        total = family[0]
        for block in family[1:]:
            total = total + block
        if len(total) > limit:
            continue
        norm_sum = sum((base.evaluate(b) for b in family), Fraction(0))
        sum_norm = base.evaluate(total)
        ratio = sum_norm / norm_sum
        if best is None or ratio < best:
            best, witness = ratio, tuple(family)
        rows.append({
            "family": label, "size": len(family), "sum_norm": str(sum_norm),
            "norm_sum": str(norm_sum), "ratio": str(ratio), "running_min": str(best),
        })
    if best is None:
        raise BudgetExceeded(f"no {n}-admissible family fits the budget")
    logger.info(f"delta_{n} search evaluated {len(rows)} families, minimum ratio {best}")
    return DeltaSearch(n, best, witness, rows)


def delta_n_estimate(basis: BlockBasis, base: BaseNorm, n: int, budget: Optional[Budgets] = None,
                     settings: Settings = DEFAULT_SETTINGS) -> Tuple[Fraction, Tuple[FinVec, ...]]:
    search = delta_n_search(basis, base, n, budget, settings)
    return search.value, search.witness


# ---------- Stabilization ----------

def _row(experiment: str, n: int, j: Optional[int], value: Fraction, d: Optional[Fraction],
         ratio: Optional[Fraction], digits: int) -> Dict[str, object]:
    return {
        "experiment": experiment,
        "n": n,
        "j": "" if j is None else j,
        "value_exact": str(value),
        "value_decimal": format_decimal(value, digits),
        "d": "" if d is None else str(d),
        "ratio": "" if ratio is None else str(ratio),
    }


@dataclass
class StabilityReport:
    n: int
    epsilon: Fraction
    values: Dict[int, Fraction]
    d: Fraction
    ratio: Fraction
    norm_of_z: Fraction
    relaxed: bool = False

    def to_frame(self, digits: int = DEFAULT_SETTINGS.decimal_digits) -> pd.DataFrame:
        rows = [_row("stabilize", self.n, j, v, self.d, self.ratio, digits) for j, v in sorted(self.values.items())]
        return pd.DataFrame(rows, columns=REPORT_COLUMNS)


def stabilization_experiment(n: int, epsilon: Fraction, basis: Optional[BlockBasis] = None, k: int = 3,
                             settings: Settings = DEFAULT_SETTINGS, relax: bool = False) -> StabilityReport:
    """Build the stabilized vector z and evaluate |z|_j^n for 0 <= j <= n."""
    if n > settings.max_experiment_order:
        raise BudgetExceeded(f"n={n} exceeds max_experiment_order={settings.max_experiment_order}")
    basis = basis or unit_basis(settings.basis_length)
    epsilon = Fraction(epsilon)
    stabilized = build_stabilized(basis, n, epsilon, k, settings, relax)
    z = stabilized.vector
    values = {j: engine.seminorm_jn(z, j, n, settings).value for j in range(n + 1)}
    d = min(values.values())
    if d <= 0:
        raise VerificationError(f"seminorm vanished on the stabilized vector: {values}")
    ratio = max(values.values()) / d
    norm = engine.tsirelson(z, settings).value
    if sum((values[j] for j in range(n)), Fraction(0)) < norm:
        raise VerificationError("sum of the seminorms over j < n is below the norm")
    logger.info(f"Stabilization n={n}: d={d}, ratio={ratio}, norm={norm}")
    return StabilityReport(n, epsilon, values, d, ratio, norm, stabilized.relaxed)


@dataclass
class StabilitySweep:
    reports: Dict[int, StabilityReport]
    skipped: Dict[int, str]

    def scaled_d(self) -> Dict[int, Fraction]:
        """d(n) * n per built order."""
        return {n: r.d * n for n, r in self.reports.items()}

    def to_frame(self, digits: int = DEFAULT_SETTINGS.decimal_digits) -> pd.DataFrame:
        frames = [r.to_frame(digits) for _, r in sorted(self.reports.items())]
        if not frames:
            return pd.DataFrame(columns=REPORT_COLUMNS)
        return pd.concat(frames, ignore_index=True)


def _stability_point(n: int, epsilon: Fraction, basis: Optional[BlockBasis], k: int, settings: Settings,
                     relax: bool) -> Tuple[int, Optional[StabilityReport], Optional[str]]:
    try:
        return n, stabilization_experiment(n, epsilon, basis, k, settings, relax), None
    except (EpsilonTooSmallForBudget, BudgetExceeded) as e:
        return n, None, str(e)


def sweep_stability(orders: Sequence[int], epsilon: Fraction, basis: Optional[BlockBasis] = None, k: int = 3,
                    settings: Settings = DEFAULT_SETTINGS, relax: bool = False) -> StabilitySweep:
    """Stabilization reports across orders; orders that do not fit the budget are skipped."""
    results = Parallel(n_jobs=settings.jobs)(
        delayed(_stability_point)(n, Fraction(epsilon), basis, k, settings, relax) for n in orders
    )
    reports, skipped = {}, {}
    for n, report, reason in results:
        if report is None:
            logger.warning(f"Skipping n={n}: {reason}")
            skipped[n] = reason
        else:
            reports[n] = report
    return StabilitySweep(reports, skipped)


# ---------- Distortion ----------

@dataclass
class DistortionReport:
    theta: Fraction
    n: int
    ratio_high: Fraction
    ratio_low: Fraction
    high_witness: FinVec
    low_witness: FinVec
    rows: List[Dict[str, object]] = field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=REPORT_COLUMNS)


def _interval_ratio(x: FinVec, definition: engine.NormDef, parts: int, settings: Settings) -> Fraction:
    table = engine.interval_values(x, definition, settings)
    upper, _ = engine.successive_interval_norm(x, definition, parts, settings, table)
    return upper / table[0][len(x) - 1]


def _largest_average(basis: BlockBasis, n: int, limit: int, settings: Settings) -> Optional[FinVec]:
    chosen = None
    for start in range(1, len(basis) + 1):
        try:
            candidate = l1_average(basis, n, start, settings)
        except TsirelsonLabError:
            break
        if len(candidate) > limit:
            break
        chosen = candidate
    return chosen


def _stacked_averages(basis: BlockBasis, n: int, count: int, limit: int, settings: Settings) -> Optional[FinVec]:
    """Sum of `count` successive averages, the first starting at basis position `count`."""
    total: Optional[FinVec] = None
    position = count
    for _ in range(count):
        try:
            average = l1_average(basis, n, position, settings)
        except TsirelsonLabError:
            return None
        total = average if total is None else total + average
        if len(total) > limit:
            return None
        position += len(average)
    return total


def theta_distortion_experiment(theta: Fraction, n: int, budget: Optional[Budgets] = None,
                                settings: Settings = DEFAULT_SETTINGS,
                                basis: Optional[BlockBasis] = None) -> DistortionReport:
    """
    In X = T(S_n, theta^n), compare |z| = sup over at most `budget.intervals`
    successive intervals of sum ||E_i z|| with ||z||: stacked averages push the
    ratio up, one long average keeps it near 1.
    """
    theta = Fraction(theta)
    if not 0 < theta < 1:
        raise ValueError(f"theta {theta} is outside (0, 1)")
    budget = budget or Budgets.from_settings(settings)
    basis = basis or unit_basis(settings.basis_length)
    definition = engine.implicit_def(n, theta ** n)
    limit = min(settings.support_bound, budget.support)

    low = _largest_average(basis, n, limit, settings)
    if low is None:
        raise BudgetExceeded(f"no order-{n} average fits in {limit} points")
    high = None
    for count in range(budget.averages, 0, -1):
        high = _stacked_averages(basis, n, count, limit, settings)
        if high is not None:
            break
    if high is None:
        raise BudgetExceeded(f"no stack of order-{n} averages fits in {limit} points")

    ratio_low = _interval_ratio(low, definition, budget.intervals, settings)
    ratio_high = _interval_ratio(high, definition, budget.intervals, settings)
    digits = settings.decimal_digits
    rows = [
        _row("distort_theta_high", n, None, ratio_high, None, ratio_high, digits),
        _row("distort_theta_low", n, None, ratio_low, None, ratio_low, digits),
    ]
    logger.info(f"theta={theta}, n={n}: ratio_high={ratio_high}, ratio_low={ratio_low}")
    return DistortionReport(theta, n, ratio_high, ratio_low, high, low, rows)


@dataclass
class MixedReport:
    labels: List[str]
    ratios: List[Fraction]
    rows: List[Dict[str, object]] = field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=REPORT_COLUMNS)


def mixed_test_vectors(basis: BlockBasis, limit: int, settings: Settings = DEFAULT_SETTINGS) -> List[Tuple[str, int, FinVec]]:
    """Single averages of order 1 and 2 and a stack of an order-1 and an order-2 average."""
    found: List[Tuple[str, int, FinVec]] = []
    for order, starts in ((1, (2, 8, 32)), (2, (2, 3, 4))):
        for start in starts:
            try:
                x = l1_average(basis, order, start, settings)
            except TsirelsonLabError:
                continue
            if len(x) <= limit:
                found.append((f"average(n={order}, start={start})", order, x))
    try:
        first = l1_average(basis, 1, 2, settings)
        second = l1_average(basis, 2, first.max_support + 1, settings)
        if len(first) + len(second) <= limit:
            found.append(("stack(n=1, n=2)", 2, first + second))
    except TsirelsonLabError:
        pass
    return found


def mixed_weight_experiment(coefficient: Callable[[int], Fraction], budget: Optional[Budgets] = None,
                            settings: Settings = DEFAULT_SETTINGS, theta: Fraction = engine.HALF,
                            basis: Optional[BlockBasis] = None) -> MixedReport:
    """mixed_norm(x) / tsirelson(x) on averages; raises if any ratio exceeds 1."""
    budget = budget or Budgets.from_settings(settings)
    basis = basis or unit_basis(settings.basis_length)
    limit = min(settings.support_bound, budget.support)
    vectors = mixed_test_vectors(basis, limit, settings)
    if not vectors:
        raise BudgetExceeded(f"no test vector fits in {limit} points")
    labels, ratios, rows = [], [], []
    for label, order, x in vectors:
        mixed = engine.mixed_norm(x, coefficient, theta, settings).value
        full = engine.evaluate(x, engine.tsirelson_def(theta), settings).value
        ratio = mixed / full
        if ratio > 1:
            raise VerificationError(f"{label}: mixed norm {mixed} exceeds {full}")
        labels.append(label)
        ratios.append(ratio)
        rows.append(_row("distort_mixed", order, None, mixed, None, ratio, settings.decimal_digits))
    return MixedReport(labels, ratios, rows)


# ---------- Configured runs ----------

def run_experiment(config: ExperimentConfig, settings: Settings = DEFAULT_SETTINGS) -> pd.DataFrame:
    """Run the experiment a configuration file describes and return its report rows."""
    budgets = config.budgets or Budgets.from_settings(settings)
    settings = dataclasses.replace(settings, support_bound=min(settings.support_bound, budgets.support))
    basis = unit_basis(config.basis.length)
    if config.experiment == "stabilize":
        return stabilization_experiment(config.n, config.epsilon_value, basis, config.k, settings,
                                        config.relax).to_frame(settings.decimal_digits)
    if config.experiment == "distort_theta":
        return theta_distortion_experiment(config.theta_value, config.n, budgets, settings, basis).to_frame()
    if config.experiment == "distort_mixed":
        rule = engine.COEFFICIENT_RULES[config.c_rule]
        return mixed_weight_experiment(rule, budgets, settings, basis=basis).to_frame()
    base = TSIRELSON_BASE if config.norm == "tsirelson" else BaseNorm.from_definition(engine.norm_n_def(config.n), settings)
    if config.experiment == "delta":
        spot_check_base(base, np.random.default_rng(config.seed))
        search = delta_n_search(basis, base, config.n, budgets, settings)
        row = _row("delta", config.n, None, search.value, search.value, None, settings.decimal_digits)
        return pd.DataFrame([row], columns=REPORT_COLUMNS)
    _, certificate = n_eps_average(basis, config.n, config.epsilon_value, config.k, settings, config.relax)
    rows = [_row("average", config.n, None, certificate.norm_lower, None, None, settings.decimal_digits),
            _row("average", config.n, None, certificate.norm_upper, None, None, settings.decimal_digits)]
    return pd.DataFrame(rows, columns=REPORT_COLUMNS)

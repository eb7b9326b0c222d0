"""
Vector constructions over block bases.

An (n, eps) average (k) of a block basis (y_l) is z = sum_{l in A} a_l y_l with
  - sum a_l = 2^n, a_l > 0, and (y_l)_{l in A} n-admissible,
  - every (n-1)-admissible (k) subfamily carrying coefficient mass < eps,
  - ||z|| >= 1.
Averages are built as repeated averages: a node of order n starts at a block
whose support begins at m, has m children of order n-1 and splits its mass
evenly among them. Order 0 nodes are single blocks. Every condition is
verified on the result; nothing is taken on trust.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import engine
from .config import DEFAULT_SETTINGS, Settings
from .exceptions import EpsilonTooSmallForBudget, Exhausted, InsufficientBasis, SupportTooLarge, VerificationError
from .schreier import FinSet, is_admissible, max_weight_subset, maximal_extension, set_repr
from .vectors import FinVec, combine, format_scalar

logger = logging.getLogger(__name__)

# Unit-basis size estimates stop here.
PLAN_SIZE_CAP = 10 ** 9


@dataclass(frozen=True)
class BlockBasis:
    vectors: Tuple[FinVec, ...]
    normalized: bool = False

    def __post_init__(self):
        vectors = tuple(self.vectors)
        object.__setattr__(self, "vectors", vectors)
        for i, y in enumerate(vectors):
            if not y:
                raise ValueError(f"basis vector {i + 1} is zero")
        for i, (a, b) in enumerate(zip(vectors, vectors[1:])):
            if a.max_support >= b.min_support:
                raise ValueError(f"basis vectors {i + 1} and {i + 2} are not successive")

    def __len__(self) -> int:
        return len(self.vectors)

    def __getitem__(self, index: int) -> FinVec:
        return self.vectors[index]

    @property
    def mins(self) -> Tuple[int, ...]:
        return tuple(y.min_support for y in self.vectors)

    def tail(self, start: int) -> "BlockBasis":
        """Basis vectors from 0-based index `start` on."""
        return BlockBasis(self.vectors[start:], self.normalized)

    def normalize(self, settings: Settings = DEFAULT_SETTINGS) -> "BlockBasis":
        """Scale every vector to Tsirelson norm 1."""
        scaled = []
        for y in self.vectors:
            norm = engine.tsirelson(y, settings).value
            scaled.append(y.scale(1 / norm))
        return BlockBasis(tuple(scaled), normalized=True)


def unit_basis(length: int, start: int = 1) -> BlockBasis:
    """e_start, ..., e_{start+length-1}."""
    if length < 1 or start < 1:
        raise ValueError("unit basis needs length >= 1 and start >= 1")
    return BlockBasis(tuple(FinVec.unit(p) for p in range(start, start + length)), normalized=True)


def thin(basis: BlockBasis, k: int, count: Optional[int] = None) -> BlockBasis:
    """
    Greedy subsequence with m_{i+1} > k * m_i, m_i the min supports, keeping
    the first vector. With `count`, Exhausted is raised when fewer survive.
    """
    if k < 1:
        raise ValueError("k must be a positive integer")
    if not len(basis):
        raise Exhausted("cannot thin an empty basis")
    kept = [basis[0]]
    for y in basis.vectors[1:]:
        if y.min_support > k * kept[-1].min_support:
            kept.append(y)
            if count is not None and len(kept) == count:
                break
    if count is not None and len(kept) < count:
        raise Exhausted(f"only {len(kept)} of {count} vectors survive thinning with k={k}")
    return BlockBasis(tuple(kept), basis.normalized)


# ---------- Repeated averages ----------

@dataclass
class _Plan:
    order: int
    indices: Tuple[int, ...]
    children: List["_Plan"] = field(default_factory=list)


def _plan(basis: BlockBasis, index: int, order: int, room: int) -> Optional[Tuple[_Plan, int, int]]:
    """
    Lay out a repeated average of `order` from basis index `index`.

    Returns (plan, next index, support used), or None when the support would
    exceed `room`.
    """
    if index >= len(basis):
        raise InsufficientBasis(f"basis of length {len(basis)} ends inside an average of order {order}")
    if order == 0:
        width = len(basis[index])
        if width > room:
            return None
        return _Plan(0, (index,)), index + 1, width
    children: List[_Plan] = []
    used = 0
    cursor = index
    for _ in range(basis[index].min_support):
        planned = _plan(basis, cursor, order - 1, room - used)
        if planned is None:
            return None
        child, cursor, width = planned
        children.append(child)
        used += width
    indices = tuple(i for child in children for i in child.indices)
    return _Plan(order, indices, children), cursor, used


def unit_plan_size(first: int, order: int) -> Optional[int]:
    """Points used by a repeated average of `order` on the unit basis from position `first`."""
    if order == 0:
        return 1
    if order == 1:
        return first
    if order == 2:
        # chunks start at first, 2 first, 4 first, ...
        if first > 64:
            return None
        return first * (2 ** first - 1)
    total, position = 0, first
    for _ in range(first):
        size = unit_plan_size(position, order - 1)
        if size is None or total + size > PLAN_SIZE_CAP:
            return None
        total += size
        position += size
    return total


def _coefficients(plan: _Plan, mass: Fraction, into: Dict[int, Fraction]) -> None:
    if plan.order == 0:
        into[plan.indices[0]] = mass
        return
    share = mass / len(plan.children)
    for child in plan.children:
        _coefficients(child, share, into)


def _tree(plan: _Plan, basis: BlockBasis, z: FinVec, level: int, leaf: engine.Leaf) -> engine.Node:
    if plan.order == 0:
        support = basis[plan.indices[0]].support
        return engine.Node(support, level, leaf_value=leaf.evaluate(z.restrict(support)))
    children = [_tree(child, basis, z, level + 1, leaf) for child in plan.children]
    return engine.Node(tuple(p for c in children for p in c.set), level, children)


def tree_leaf(basis: BlockBasis, settings: Settings = DEFAULT_SETTINGS) -> engine.Leaf:
    """Leaf for lower-bound trees: the sup norm on singleton blocks, else the Tsirelson norm."""
    if all(len(y) == 1 for y in basis.vectors):
        return engine.SUP_LEAF
    return engine.DefinitionLeaf(engine.tsirelson_def(), settings)


def lower_norm_certificate(z: FinVec, root: engine.Node, leaf: engine.Leaf) -> Tuple[Fraction, engine.Certificate]:
    """Check an admissible tree for z and return the lower bound it certifies for ||z||."""
    certificate = engine.Certificate(root)
    value = engine.check_certificate(z, engine.tree_def(leaf), certificate)
    return value, certificate


def repeated_average(basis: BlockBasis, n: int, start: int = 1,
                     settings: Settings = DEFAULT_SETTINGS) -> Tuple[Dict[int, Fraction], engine.Certificate]:
    """
    Repeated average of order n from the `start`-th basis vector (counted from 1).

    Returns the coefficients (0-based basis index -> a_l, summing to 2^n) and
    the admissible tree certifying ||z|| >= 2^-n sum a_l ||y_l||.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    planned = _plan(basis, start - 1, n, settings.support_bound)
    if planned is None:
        raise SupportTooLarge(unit_plan_size(basis[start - 1].min_support, n) or settings.support_bound + 1,
                              settings.support_bound)
    plan = planned[0]
    coefficients: Dict[int, Fraction] = {}
    _coefficients(plan, Fraction(2 ** n), coefficients)
    z = combine([coefficients[i] for i in plan.indices], [basis[i] for i in plan.indices])
    leaf = tree_leaf(basis, settings)
    _, certificate = lower_norm_certificate(z, _tree(plan, basis, z, 0, leaf), leaf)
    return coefficients, certificate


# ---------- (n, eps) averages ----------

@dataclass
class AverageCertificate:
    index_set: FinSet
    coeffs: Dict[int, Fraction]
    n: int
    k: int
    epsilon: Fraction
    norm_lower: Fraction
    norm_upper: Fraction
    max_mass: Fraction
    heaviest: FinSet
    relaxed: bool = False
    tree: Optional[engine.Certificate] = field(default=None, repr=False)
    plan: Optional[_Plan] = field(default=None, repr=False)

    def validate(self, basis: BlockBasis, settings: Settings = DEFAULT_SETTINGS) -> None:
        """Re-check every condition from scratch; raises VerificationError."""
        total = sum(self.coeffs.values(), Fraction(0))
        if total != 2 ** self.n:
            raise VerificationError(f"coefficients sum to {total}, not {2 ** self.n}")
        if any(a <= 0 for a in self.coeffs.values()):
            raise VerificationError("coefficients must be positive")
        blocks = [basis[i].support for i in self.index_set]
        if not is_admissible(blocks, self.n):
            raise VerificationError(f"chosen blocks are not {self.n}-admissible")
        weights = {basis[i].min_support: self.coeffs[i] for i in self.index_set}
        mass, _ = max_weight_subset(weights, self.n - 1, scale=self.k)
        if mass != self.max_mass:
            raise VerificationError(f"recorded admissible mass {self.max_mass} differs from {mass}")
        if not self.relaxed and not mass < self.epsilon:
            raise VerificationError(f"admissible mass {mass} is not below {self.epsilon}")
        z = self.vector(basis)
        lower = engine.check_certificate(z, engine.tree_def(tree_leaf(basis, settings)), self.tree)
        if lower < 1 or lower != self.norm_lower:
            raise VerificationError(f"tree certifies {lower}, recorded lower bound {self.norm_lower}")

    def vector(self, basis: BlockBasis) -> FinVec:
        return combine([self.coeffs[i] for i in self.index_set], [basis[i] for i in self.index_set])

    def summary(self) -> List[str]:
        lines = [
            f"n={self.n} k={self.k} eps={self.epsilon}" + (" (relaxed)" if self.relaxed else ""),
            f"blocks: {len(self.index_set)} from basis index {self.index_set[0] + 1}",
            f"sum of coefficients: {sum(self.coeffs.values(), Fraction(0))}",
            f"max {self.n - 1}-admissible ({self.k}) mass: {format_scalar(self.max_mass)} on {set_repr(self.heaviest)}",
            f"lower bound: {format_scalar(self.norm_lower)}",
            f"norm: {format_scalar(self.norm_upper)}",
        ]
        return lines


def _check_parameters(basis: BlockBasis, n: int, epsilon: Fraction, k: int) -> None:
    if n < 1 or k < 1:
        raise ValueError(f"need n >= 1 and k >= 1, got n={n}, k={k}")
    if not 0 < epsilon <= 1:
        raise ValueError(f"epsilon {epsilon} is outside (0, 1]")
    if not basis.normalized:
        raise ValueError("averages need a normalized basis")


def _admissible_mass(basis: BlockBasis, plan: _Plan, n: int, k: int) -> Tuple[Fraction, FinSet]:
    coeffs: Dict[int, Fraction] = {}
    _coefficients(plan, Fraction(2 ** n), coeffs)
    weights = {basis[i].min_support: coeffs[i] for i in plan.indices}
    return max_weight_subset(weights, n - 1, scale=k)


def _certify(basis: BlockBasis, plan: _Plan, n: int, k: int, epsilon: Fraction,
             settings: Settings, relaxed: bool = False) -> Tuple[FinVec, AverageCertificate]:
    coeffs: Dict[int, Fraction] = {}
    _coefficients(plan, Fraction(2 ** n), coeffs)
    z = combine([coeffs[i] for i in plan.indices], [basis[i] for i in plan.indices])
    mass, heaviest = _admissible_mass(basis, plan, n, k)
    leaf = tree_leaf(basis, settings)
    lower, tree = lower_norm_certificate(z, _tree(plan, basis, z, 0, leaf), leaf)
    certificate = AverageCertificate(
        index_set=plan.indices, coeffs=coeffs, n=n, k=k, epsilon=epsilon,
        norm_lower=lower, norm_upper=engine.tsirelson(z, settings).value,
        max_mass=mass, heaviest=heaviest, relaxed=relaxed, tree=tree, plan=plan,
    )
    certificate.validate(basis, settings)
    return z, certificate


def n_eps_average(basis: BlockBasis, n: int, epsilon: Fraction, k: int = 1,
                  settings: Settings = DEFAULT_SETTINGS, relax: bool = False,
                  room: Optional[int] = None) -> Tuple[FinVec, AverageCertificate]:
    """
    Build a verified (n, eps) average (k) of `basis`.

    The first block must start beyond 2^n / eps, so that every top-level part
    of the average carries less than eps. Starting points are tried in order
    until the admissible mass check passes. With `relax`, the average with the
    smallest admissible mass that fits the support budget is returned instead
    of raising EpsilonTooSmallForBudget.
    """
    epsilon = Fraction(epsilon)
    _check_parameters(basis, n, epsilon, k)
    room = settings.support_bound if room is None else room
    threshold = Fraction(2 ** n) / epsilon
    best: Optional[Tuple[Fraction, _Plan]] = None
    first_candidate: Optional[int] = None

    for index, m in enumerate(basis.mins):
        eligible = m > threshold
        if not eligible and not relax:
            continue
        if eligible and first_candidate is None:
            first_candidate = index
        planned = _plan(basis, index, n, room)
        if planned is None:
            break
        plan = planned[0]
        mass, _ = _admissible_mass(basis, plan, n, k)
        if eligible and mass < epsilon:
            logger.info(f"({n}, {epsilon}) average ({k}) built from basis index {index + 1} with {len(plan.indices)} blocks")
            return _certify(basis, plan, n, k, epsilon, settings)
        logger.info(f"Start {m}: admissible mass {mass} does not beat {epsilon}")
        if best is None or mass < best[0]:
            best = (mass, plan)

    if relax and best is not None:
        logger.warning(f"Relaxed ({n}, {epsilon}) average: realized admissible mass {best[0]}")
        return _certify(basis, best[1], n, k, epsilon, settings, relaxed=True)
    if first_candidate is None and not any(m > threshold for m in basis.mins):
        raise InsufficientBasis(f"no basis vector starts beyond 2^{n}/eps = {threshold}")
    anchor = basis.mins[first_candidate] if first_candidate is not None else int(threshold) + 1
    required = unit_plan_size(anchor, n)
    needs = f"{required} points" if required is not None else f"more than {PLAN_SIZE_CAP} points"
    raise EpsilonTooSmallForBudget(
        f"a ({n}, {epsilon}) average ({k}) needs at least {needs}; the support budget is {room}",
        required=required, bound=room,
    )


# ---------- Stabilized vectors ----------

@dataclass
class StabilizedVector:
    vector: FinVec
    parts: List[FinVec]
    certificates: List[AverageCertificate]
    norm_lower: Fraction
    tree: engine.Certificate = field(repr=False)

    @property
    def relaxed(self) -> bool:
        return any(c.relaxed for c in self.certificates)


def _fits(basis: BlockBasis, index: int, orders: Sequence[int], room: int) -> bool:
    """Whether averages of `orders` fit one after another from `index` within `room` points."""
    for order in orders:
        try:
            planned = _plan(basis, index, order, room)
        except InsufficientBasis:
            return False
        if planned is None:
            return False
        _, index, used = planned
        room -= used
    return True


def _strict_parts(basis: BlockBasis, n: int, epsilon: Fraction, k: int,
                  settings: Settings) -> List[Tuple[FinVec, AverageCertificate]]:
    tail_start = n - 1
    room = settings.support_bound
    built = []
    for i in range(1, n + 1):
        tail = basis.tail(tail_start)
        z_i, certificate = n_eps_average(tail, i, epsilon, k, settings, room=room)
        # indices in the certificate are relative to the tail
        certificate.index_set = tuple(j + tail_start for j in certificate.index_set)
        certificate.coeffs = {j + tail_start: a for j, a in certificate.coeffs.items()}
        _shift_plan(certificate.plan, tail_start)
        tail_start = certificate.index_set[-1] + 1
        room -= len(z_i)
        built.append((z_i, certificate))
    return built


def _relaxed_parts(basis: BlockBasis, n: int, epsilon: Fraction, k: int,
                   settings: Settings) -> List[Tuple[FinVec, AverageCertificate]]:
    """
    Place z_1, ..., z_n together inside the support budget.

    Each z_i starts at the first position where it is a true (i, eps) average
    and z_{i+1}, ..., z_n still fit behind it. When there is no such position,
    the fitting start with the smallest admissible mass is taken.
    """
    cursor = n - 1
    room = settings.support_bound
    built = []
    for i in range(1, n + 1):
        threshold = Fraction(2 ** i) / epsilon
        best: Optional[Tuple[Fraction, _Plan, int]] = None
        strict = False
        for index in range(cursor, len(basis)):
            try:
                planned = _plan(basis, index, i, room)
            except InsufficientBasis:
                break
            if planned is None:
                break
            plan, after, used = planned
            if not _fits(basis, after, range(i + 1, n + 1), room - used):
                continue
            mass, _ = _admissible_mass(basis, plan, i, k)
            if basis[index].min_support > threshold and mass < epsilon:
                best, strict = (mass, plan, used), True
                break
            if best is None or mass < best[0]:
                best = (mass, plan, used)
        if best is None:
            raise EpsilonTooSmallForBudget(
                f"averages of orders {i}..{n} do not fit in {room} points from basis index {cursor + 1}",
                required=None, bound=room,
            )
        mass, plan, used = best
        if not strict:
            logger.warning(f"Relaxed ({i}, {epsilon}) part: realized admissible mass {mass}")
        z_i, certificate = _certify(basis, plan, i, k, epsilon, settings, relaxed=not strict)
        cursor = plan.indices[-1] + 1
        room -= used
        built.append((z_i, certificate))
    return built


def build_stabilized(basis: BlockBasis, n: int, epsilon: Fraction, k: int = 3,
                     settings: Settings = DEFAULT_SETTINGS, relax: bool = False) -> StabilizedVector:
    """
    z = (1/n) sum_{i=1}^n z_i, z_i an (i, eps) average (k) of the basis from
    its n-th vector on, each built after the previous one. With `relax` the
    parts are laid out jointly so that all of them fit the support budget.
    """
    epsilon = Fraction(epsilon)
    _check_parameters(basis, n, epsilon, k)
    if len(basis) < n:
        raise InsufficientBasis(f"need at least {n} basis vectors")
    layout = _relaxed_parts if relax else _strict_parts
    built = layout(basis, n, epsilon, k, settings)
    parts = [z_i for z_i, _ in built]
    certificates = [certificate for _, certificate in built]

    blocks = [part.support for part in parts]
    if not is_admissible(blocks, 1):
        raise VerificationError(f"the {n} averages are not 1-admissible")
    z = combine([Fraction(1, n)] * n, parts)
    leaf = tree_leaf(basis, settings)
    children = [_tree(c.plan, basis, z, 1, leaf) for c in certificates]
    root = engine.Node(tuple(p for c in children for p in c.set), 0, children)
    lower, tree = lower_norm_certificate(z, root, leaf)
    if lower < Fraction(1, 2):
        raise VerificationError(f"stabilized vector certifies only {lower} < 1/2")
    logger.info(f"Stabilized vector for n={n}: support {len(z)}, certified norm >= {lower}")
    return StabilizedVector(z, parts, certificates, lower, tree)


def _shift_plan(plan: _Plan, offset: int) -> None:
    plan.indices = tuple(i + offset for i in plan.indices)
    for child in plan.children:
        _shift_plan(child, offset)


def stabilized_vector(basis: BlockBasis, n: int, epsilon: Fraction, k: int = 3,
                      settings: Settings = DEFAULT_SETTINGS, relax: bool = False) -> FinVec:
    return build_stabilized(basis, n, epsilon, k, settings, relax).vector


# ---------- Long l1 averages ----------

def l1_average(basis: BlockBasis, n: int, start: int, settings: Settings = DEFAULT_SETTINGS) -> FinVec:
    """
    Uniform (n, 1) average (1): coefficients 2^n/|F| on the maximal S_n family
    of basis vectors beginning with the `start`-th one (counted from 1).
    """
    if n < 1 or start < 1:
        raise ValueError("l1_average needs n >= 1 and start >= 1")
    if start > len(basis):
        raise InsufficientBasis(f"basis has only {len(basis)} vectors")
    index = start - 1
    window = basis.mins[index:index + settings.support_bound + 1]
    chosen = maximal_extension(window, n)
    if len(chosen) == len(window):
        if len(window) <= settings.support_bound:
            raise InsufficientBasis(f"basis ends before the S_{n} family from {window[0]} is maximal")
        raise SupportTooLarge(len(window), settings.support_bound)
    blocks = basis.vectors[index:index + len(chosen)]
    support = sum(len(y) for y in blocks)
    if support > settings.support_bound:
        raise SupportTooLarge(support, settings.support_bound)
    weight = Fraction(2 ** n, len(chosen))
    return combine([weight] * len(blocks), list(blocks))

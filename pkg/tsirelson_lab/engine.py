"""
Exact evaluation of Tsirelson-type norms with checkable certificates.

Two definition modes are supported:

ImplicitEq
    ||x|| = max(||x||_inf, sup_k w_k * sup sum ||E_i x||) over k-admissible
    sequences with at least two parts, for a finite or rule-generated set of
    weights w_k.
LevelTree
    sup over admissible trees of sum ratio^level(E) * leaf(E x) over the
    terminal sets E, with terminal levels restricted by a rule, an optional
    sup-norm floor at the root, and a pluggable leaf norm.

Both modes are evaluated by dynamic programming over intervals of the
support (see intervals.py). A certificate is an explicit tree of sets that
check_certificate re-validates from scratch.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Dict, Iterator, List, Optional, Tuple, Union

from .config import DEFAULT_SETTINGS, Settings
from .exceptions import BadTree, InvalidDef, SupportTooLarge
from .intervals import AdmissibleSums, SplitTable
from .schreier import FinSet, SetSequence, admissibility_cap, is_admissible, is_successive, max_weight_subset, set_repr
from .vectors import FinVec

logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)


# ---------- Leaves ----------

class Leaf:
    """A 1-unconditional norm used on the terminal sets of a tree."""

    name = "leaf"

    def evaluate(self, x: FinVec) -> Fraction:
        raise NotImplementedError

    def interval_table(self, x: FinVec) -> List[List[Optional[Fraction]]]:
        """Value of the leaf on the restriction of x to every support interval."""
        support = x.support
        size = len(support)
        table: List[List[Optional[Fraction]]] = [[None] * size for _ in range(size)]
        for a in range(size):
            for b in range(a, size):
                table[a][b] = self.evaluate(x.restrict(support[a:b + 1]))
        return table


class SupLeaf(Leaf):
    name = "sup"

    def evaluate(self, x: FinVec) -> Fraction:
        return x.sup_norm()

    def interval_table(self, x: FinVec) -> List[List[Optional[Fraction]]]:
        values = [abs(v) for v in x.values()]
        size = len(values)
        table: List[List[Optional[Fraction]]] = [[None] * size for _ in range(size)]
        for a in range(size):
            running = values[a]
            for b in range(a, size):
                running = max(running, values[b])
                table[a][b] = running
        return table

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SupLeaf)

    def __hash__(self) -> int:
        return hash(SupLeaf)


SUP_LEAF = SupLeaf()


class DefinitionLeaf(Leaf):
    """Leaf given by another norm definition; its table comes from one DP run."""

    def __init__(self, definition: "NormDef", settings: Settings = DEFAULT_SETTINGS):
        self.definition = definition
        self.settings = settings
        self.name = describe(definition)

    def evaluate(self, x: FinVec) -> Fraction:
        return evaluate(x, self.definition, self.settings).value

    def interval_table(self, x: FinVec) -> List[List[Optional[Fraction]]]:
        return interval_values(x, self.definition, self.settings)


# ---------- Definitions ----------

class Floor(Enum):
    SUP_NORM = "sup"
    NONE = "none"


@dataclass(frozen=True)
class AllLevels:
    def allows(self, level: int) -> bool:
        return True


@dataclass(frozen=True)
class Residue:
    """Terminal levels j, j+n, j+2n, ..."""

    j: int
    n: int

    def allows(self, level: int) -> bool:
        return level >= self.j and (level - self.j) % self.n == 0


TerminalRule = Union[AllLevels, Residue]


class AdmissibilityRules:
    """Weights w_k attached to k-admissible decompositions, k >= 1."""

    max_order: Optional[int] = None

    def weight(self, k: int) -> Fraction:
        raise NotImplementedError

    def candidates(self, cap: int) -> List[Tuple[int, int, Fraction]]:
        """
        (effective order, declared order, weight) triples that matter on an
        interval whose admissibility cap is `cap`. Orders at or above the cap
        share the same admissible sums, so only the best weight among them is
        kept.
        """
        raise NotImplementedError


@dataclass(frozen=True)
class FiniteRules(AdmissibilityRules):
    weights: Tuple[Tuple[int, Fraction], ...]

    def __post_init__(self):
        if not self.weights:
            raise InvalidDef("at least one admissibility rule is required")
        for k, w in self.weights:
            if k < 1:
                raise InvalidDef(f"admissibility order must be >= 1, got {k}")
            if not 0 < w <= 1:
                raise InvalidDef(f"weight {w} for order {k} is outside (0, 1]")

    @property
    def max_order(self) -> int:  # type: ignore[override]
        return max(k for k, _ in self.weights)

    def weight(self, k: int) -> Fraction:
        return max((w for order, w in self.weights if order == k), default=Fraction(0))

    def candidates(self, cap: int) -> List[Tuple[int, int, Fraction]]:
        if cap < 1:
            return []
        best: Dict[int, Tuple[int, Fraction]] = {}
        for k, w in sorted(self.weights):
            effective = min(k, cap)
            if effective not in best or w > best[effective][1]:
                best[effective] = (k, w)
        return [(eff, k, w) for eff, (k, w) in sorted(best.items())]


@dataclass(frozen=True)
class GeometricRules(AdmissibilityRules):
    """w_k = c_k * theta^k for every k >= 1, with 0 < c_k <= 1 and 0 < theta < 1."""

    coefficient: Callable[[int], Fraction]
    theta: Fraction = HALF

    def __post_init__(self):
        if not 0 < self.theta < 1:
            raise InvalidDef(f"theta {self.theta} is outside (0, 1)")

    def weight(self, k: int) -> Fraction:
        c = Fraction(self.coefficient(k))
        if not 0 < c <= 1:
            raise InvalidDef(f"c_{k} = {c} is outside (0, 1]")
        return c * self.theta ** k

    def best_from(self, start: int) -> Tuple[int, Fraction]:
        """max over k >= start of w_k; stops once theta^k cannot beat it."""
        order, top = start, self.weight(start)
        k = start + 1
        while self.theta ** k > top:
            w = self.weight(k)
            if w > top:
                order, top = k, w
            k += 1
        return order, top

    def candidates(self, cap: int) -> List[Tuple[int, int, Fraction]]:
        if cap < 1:
            return []
        found = [(k, k, self.weight(k)) for k in range(1, cap)]
        order, top = self.best_from(cap)
        found.append((cap, order, top))
        return found


@dataclass(frozen=True)
class ImplicitEq:
    rules: AdmissibilityRules
    floor: Floor = Floor.SUP_NORM
    scale: int = 1


@dataclass(frozen=True)
class LevelTree:
    ratio: Fraction = HALF
    terminal: TerminalRule = AllLevels()
    floor: Floor = Floor.SUP_NORM
    leaf: Leaf = SUP_LEAF
    scale: int = 1


NormDef = Union[ImplicitEq, LevelTree]


def validate(definition: NormDef) -> None:
    if definition.scale < 1:
        raise InvalidDef(f"scale must be a positive integer, got {definition.scale}")
    if isinstance(definition, ImplicitEq):
        if definition.floor is not Floor.SUP_NORM:
            raise InvalidDef("implicit equations need the sup-norm floor")
        if not isinstance(definition.rules, AdmissibilityRules):
            raise InvalidDef("rules must be an AdmissibilityRules instance")
    elif isinstance(definition, LevelTree):
        if not 0 < definition.ratio <= 1:
            raise InvalidDef(f"level ratio {definition.ratio} is outside (0, 1]")
        rule = definition.terminal
        if isinstance(rule, Residue) and (rule.j < 0 or rule.n < 1):
            raise InvalidDef(f"residue rule needs j >= 0 and n >= 1, got j={rule.j}, n={rule.n}")
    else:
        raise InvalidDef(f"unknown definition {definition!r}")


def describe(definition: NormDef) -> str:
    if isinstance(definition, ImplicitEq):
        rules = definition.rules
        if isinstance(rules, FiniteRules):
            body = ", ".join(f"(S_{k}, {w})" for k, w in rules.weights)
            return f"T({body})"
        return f"mixed(theta={rules.theta})"
    rule = definition.terminal
    terminal = "all levels" if isinstance(rule, AllLevels) else f"levels {rule.j}+{rule.n}k"
    floor = "floor" if definition.floor is Floor.SUP_NORM else "no floor"
    return f"tree({terminal}, {floor}, leaf={definition.leaf.name})"


def tsirelson_def(theta: Fraction = HALF) -> ImplicitEq:
    return ImplicitEq(FiniteRules(((1, Fraction(theta)),)))


def implicit_def(order: int, weight: Fraction) -> ImplicitEq:
    """T(S_order, weight)."""
    return ImplicitEq(FiniteRules(((order, Fraction(weight)),)))


def norm_n_def(n: int) -> ImplicitEq:
    if n < 1:
        raise InvalidDef(f"n must be >= 1, got {n}")
    return implicit_def(n, HALF ** n)


def norm_jn_def(j: int, n: int) -> LevelTree:
    return LevelTree(terminal=Residue(j, n), floor=Floor.SUP_NORM)


def seminorm_jn_def(j: int, n: int) -> LevelTree:
    return LevelTree(terminal=Residue(j, n), floor=Floor.NONE)


def tree_def(leaf: Leaf = SUP_LEAF, ratio: Fraction = HALF) -> LevelTree:
    return LevelTree(ratio=ratio, terminal=AllLevels(), leaf=leaf)


def mixed_def(coefficient: Callable[[int], Fraction], theta: Fraction = HALF) -> ImplicitEq:
    return ImplicitEq(GeometricRules(coefficient, Fraction(theta)))


def unit_coefficient(k: int) -> Fraction:
    return Fraction(1)


def geometric_coefficient(k: int) -> Fraction:
    """c_k = 1 - 2^-k."""
    return 1 - Fraction(1, 2 ** k)


COEFFICIENT_RULES: Dict[str, Callable[[int], Fraction]] = {
    "one": unit_coefficient,
    "geometric": geometric_coefficient,
}


# ---------- Certificates ----------

@dataclass
class Node:
    set: FinSet
    level: int
    children: List["Node"] = field(default_factory=list)
    leaf_value: Optional[Fraction] = None
    order: Optional[int] = None
    factor: Optional[Fraction] = None

    @property
    def is_terminal(self) -> bool:
        return not self.children

    def walk(self) -> Iterator["Node"]:
        yield self
        for child in self.children:
            yield from child.walk()


@dataclass
class Certificate:
    root: Node
    floor: bool = False

    def size(self) -> int:
        return sum(1 for _ in self.root.walk())

    def render(self) -> str:
        lines: List[str] = []

        def emit(node: Node, depth: int) -> None:
            text = f"{'  ' * depth}{set_repr(node.set)}@{node.level}"
            if node.is_terminal:
                text += f" leaf={node.leaf_value}"
                if self.floor and node is self.root:
                    text += " (sup-norm floor)"
            elif node.factor is not None:
                text += f" x{node.factor} (S_{node.order})"
            lines.append(text)
            for child in node.children:
                emit(child, depth + 1)

        emit(self.root, 0)
        return "\n".join(lines)


@dataclass
class NormResult:
    value: Fraction
    certificate: Certificate


# ---------- Solvers ----------

class _LevelTreeSolver:
    """
    Normalized values W_d(I): the best tree on I whose root sits d levels
    before the next allowed terminal level, divided by ratio^level.
    """

    def __init__(self, x: FinVec, definition: LevelTree):
        self.x = x
        self.definition = definition
        self.points = x.support
        self.size = len(self.points)
        self.ratio = definition.ratio
        rule = definition.terminal
        self.offset, self.period = (0, 1) if isinstance(rule, AllLevels) else (rule.j, rule.n)
        self.states = max(self.offset, self.period - 1) + 1
        caps = [definition.scale * p for p in self.points]
        self.tables = [SplitTable(caps) for _ in range(self.states)]
        self.leaf = definition.leaf.interval_table(x)
        self.sup = self.leaf if isinstance(definition.leaf, SupLeaf) else SUP_LEAF.interval_table(x)

    def next_state(self, d: int) -> int:
        return d - 1 if d > 0 else self.period - 1

    def _chain(self, d: int, a: int, b: int) -> Iterator[Tuple[int, int, Optional[Fraction], Optional[Fraction]]]:
        """(steps, state, terminal candidate, split candidate) along the chain from d."""
        s, factor = d, Fraction(1)
        for steps in range(d + self.period):
            nxt = self.next_state(s)
            terminal = factor * self.leaf[a][b] if s == 0 else None
            strict = self.tables[nxt].strict[a][b]
            split = factor * self.ratio * strict if strict is not None else None
            yield steps, s, terminal, split
            s, factor = nxt, factor * self.ratio

    def _chain_value(self, d: int, a: int, b: int) -> Fraction:
        top = None
        for _, _, terminal, split in self._chain(d, a, b):
            for candidate in (terminal, split):
                if candidate is not None and (top is None or candidate > top):
                    top = candidate
        return top

    def solve(self) -> None:
        for length in range(1, self.size + 1):
            for a in range(self.size - length + 1):
                b = a + length - 1
                for table in self.tables:
                    table.open(a, b)
                values = [self._chain_value(d, a, b) for d in range(self.states)]
                for table, value in zip(self.tables, values):
                    table.close(a, b, value)
        logger.debug(f"Level-tree tables filled for {self.size} points, {self.states} states")

    def tree_value(self, a: int, b: int) -> Fraction:
        return self.tables[self.offset].part[a][b]

    def root_value(self, a: int, b: int) -> Fraction:
        value = self.tree_value(a, b)
        if self.definition.floor is Floor.SUP_NORM:
            value = max(value, self.sup[a][b])
        return value

    def build(self, d: int, a: int, b: int, level: int) -> Node:
        target = self.tables[d].part[a][b]
        for steps, s, terminal, split in self._chain(d, a, b):
            here = level + steps
            if terminal is not None and terminal == target:
                node = Node(self.points[a:b + 1], here, leaf_value=self.leaf[a][b])
                return self._wrap(node, level, steps)
            if split is not None and split == target:
                nxt = self.next_state(s)
                children = [self.build(nxt, s0, e0, here + 1) for s0, e0 in self.tables[nxt].strict_parts(a, b)]
                node = Node(tuple(p for c in children for p in c.set), here, children)
                return self._wrap(node, level, steps)
        raise AssertionError(f"no level-tree witness for ({a}, {b}) in state {d}")

    @staticmethod
    def _wrap(node: Node, level: int, steps: int) -> Node:
        for depth in range(steps - 1, -1, -1):
            node = Node(node.set, level + depth, [node])
        return node

    def result(self) -> NormResult:
        last = self.size - 1
        tree = self.tree_value(0, last)
        if self.definition.floor is Floor.SUP_NORM:
            sup = self.sup[0][last]
            # On a tie the floor is one node, unless the tree root is already terminal.
            if sup > tree or (sup == tree and self.offset != 0):
                root = Node(self.points, 0, leaf_value=sup)
                return NormResult(sup, Certificate(root, floor=True))
        return NormResult(tree, Certificate(self.build(self.offset, 0, last, 0)))


class _ImplicitSolver:
    """N(I) = max(||I x||_inf, max_k w_k * B_k(I; at least two parts))."""

    def __init__(self, x: FinVec, definition: ImplicitEq):
        self.x = x
        self.definition = definition
        self.points = x.support
        self.size = len(self.points)
        self.rules = definition.rules
        scale = definition.scale
        full_cap = admissibility_cap(self.points, scale)
        depth = full_cap if self.rules.max_order is None else min(full_cap, self.rules.max_order)
        self.sums = AdmissibleSums([scale * p for p in self.points], depth)
        self.leaf = SUP_LEAF.interval_table(x)
        self.caps = [[0] * self.size for _ in range(self.size)]
        self._candidates: Dict[int, List[Tuple[int, int, Fraction]]] = {}
        self.norm = [[None] * self.size for _ in range(self.size)]
        self.depth = depth

    def candidates(self, cap: int) -> List[Tuple[int, int, Fraction]]:
        if cap not in self._candidates:
            self._candidates[cap] = [c for c in self.rules.candidates(cap) if c[0] <= self.depth]
        return self._candidates[cap]

    def solve(self) -> None:
        scale = self.definition.scale
        for length in range(1, self.size + 1):
            for a in range(self.size - length + 1):
                b = a + length - 1
                self.sums.open(a, b)
                cap = admissibility_cap(self.points[a:b + 1], scale) if length > 1 else 0
                self.caps[a][b] = cap
                value = self.leaf[a][b]
                for effective, _, weight in self.candidates(cap):
                    two = self.sums.two[effective][a][b]
                    if two is not None and weight * two > value:
                        value = weight * two
                self.norm[a][b] = value
                self.sums.close(a, b, value)
        logger.debug(f"Implicit-equation tables filled for {self.size} points, depth {self.depth}")

    def build(self, a: int, b: int, level: int) -> Node:
        target = self.norm[a][b]
        if self.leaf[a][b] == target:
            return Node(self.points[a:b + 1], level, leaf_value=target)
        for effective, order, weight in self.candidates(self.caps[a][b]):
            two = self.sums.two[effective][a][b]
            if two is not None and weight * two == target:
                children = [self.build(s, e, level + order) for s, e in self.sums.two_parts(effective, a, b)]
                node_set = tuple(p for c in children for p in c.set)
                return Node(node_set, level, children, order=order, factor=weight)
        raise AssertionError(f"no implicit-equation witness for ({a}, {b})")

    def result(self) -> NormResult:
        last = self.size - 1
        return NormResult(self.norm[0][last], Certificate(self.build(0, last, 0)))


def _check_support(x: FinVec, settings: Settings) -> None:
    if len(x) > settings.support_bound:
        raise SupportTooLarge(len(x), settings.support_bound)


def _zero_result() -> NormResult:
    return NormResult(Fraction(0), Certificate(Node((), 0, leaf_value=Fraction(0))))


def evaluate(x: FinVec, definition: NormDef, settings: Settings = DEFAULT_SETTINGS) -> NormResult:
    """Exact norm of x under `definition` together with an optimal certificate."""
    validate(definition)
    _check_support(x, settings)
    if not x:
        return _zero_result()
    if isinstance(definition, ImplicitEq):
        solver = _ImplicitSolver(x, definition)
    else:
        solver = _LevelTreeSolver(x, definition)
    solver.solve()
    return solver.result()


# `eval` in the public vocabulary; the builtin is left alone.
eval_norm = evaluate


def interval_values(x: FinVec, definition: NormDef, settings: Settings = DEFAULT_SETTINGS) -> List[List[Optional[Fraction]]]:
    """table[a][b] = norm of x restricted to support indices a..b."""
    validate(definition)
    _check_support(x, settings)
    size = len(x)
    if isinstance(definition, ImplicitEq):
        solver = _ImplicitSolver(x, definition)
        solver.solve()
        return solver.norm
    solver = _LevelTreeSolver(x, definition)
    solver.solve()
    return [[solver.root_value(a, b) if b >= a else None for b in range(size)] for a in range(size)]


def tsirelson(x: FinVec, settings: Settings = DEFAULT_SETTINGS) -> NormResult:
    return evaluate(x, tsirelson_def(), settings)


def norm_n(x: FinVec, n: int, settings: Settings = DEFAULT_SETTINGS) -> NormResult:
    return evaluate(x, norm_n_def(n), settings)


def norm_jn(x: FinVec, j: int, n: int, settings: Settings = DEFAULT_SETTINGS) -> NormResult:
    return evaluate(x, norm_jn_def(j, n), settings)


def seminorm_jn(x: FinVec, j: int, n: int, settings: Settings = DEFAULT_SETTINGS) -> NormResult:
    return evaluate(x, seminorm_jn_def(j, n), settings)


def mixed_norm(x: FinVec, coefficient: Callable[[int], Fraction], theta: Fraction = HALF,
               settings: Settings = DEFAULT_SETTINGS) -> NormResult:
    return evaluate(x, mixed_def(coefficient, theta), settings)


def best_admissible_sum(x: FinVec, k: int, leaf: Leaf, scale: int = 1,
                        settings: Settings = DEFAULT_SETTINGS) -> Tuple[Fraction, SetSequence]:
    """
    Max of sum leaf(E_l x) over k-admissible (scale) successive sequences of
    subsets of supp x, with a witness sequence.
    """
    if k < 0 or scale < 1:
        raise InvalidDef(f"need k >= 0 and scale >= 1, got k={k}, scale={scale}")
    _check_support(x, settings)
    if not x:
        return Fraction(0), ()
    points = x.support
    size = len(points)
    table = leaf.interval_table(x)
    sums = AdmissibleSums([scale * p for p in points], k)
    for length in range(1, size + 1):
        for a in range(size - length + 1):
            b = a + length - 1
            sums.open(a, b)
            sums.close(a, b, table[a][b])
    value = sums.full(k, 0, size - 1)
    witness = tuple(points[s:e + 1] for s, e in sums.full_parts(k, 0, size - 1))
    return value, witness


def successive_interval_norm(x: FinVec, definition: NormDef, max_parts: int,
                             settings: Settings = DEFAULT_SETTINGS,
                             table: Optional[List[List[Optional[Fraction]]]] = None) -> Tuple[Fraction, SetSequence]:
    """
    sup over E_1 < ... < E_k, k <= max_parts, of sum ||E_i x|| for the given
    norm. `table` may pass in interval_values(x, definition) when known.
    """
    if max_parts < 1:
        raise InvalidDef("max_parts must be >= 1")
    if not x:
        return Fraction(0), ()
    if table is None:
        table = interval_values(x, definition, settings)
    points = x.support
    size = len(points)
    split = SplitTable([max_parts] * size)
    for length in range(1, size + 1):
        for a in range(size - length + 1):
            b = a + length - 1
            split.open(a, b)
            split.close(a, b, table[a][b])
    witness = tuple(points[s:e + 1] for s, e in split.best_parts(0, size - 1))
    return split.best[0][size - 1], witness


def schreier_norm(x: FinVec, m: int) -> Fraction:
    """|x|_m = sup over E in S_m of |sum_{i in E} x(i)|."""
    positive, _ = max_weight_subset(x.positive_part(), m)
    negative, _ = max_weight_subset(x.negative_part(), m)
    return max(positive, negative)


# ---------- Certificate checking ----------

def _check_children(node: Node, order: int, scale: int) -> None:
    sets = [child.set for child in node.children]
    if not is_successive(sets):
        raise BadTree(BadTree.NON_SUCCESSIVE, f"children of {set_repr(node.set)}@{node.level}")
    union = tuple(p for s in sets for p in s)
    if union != tuple(node.set):
        raise BadTree(BadTree.NOT_PARTITION, f"children of {set_repr(node.set)} cover {set_repr(union)}")
    if not is_admissible(sets, order, scale):
        raise BadTree(BadTree.ADMISSIBILITY, f"minima of {[set_repr(s) for s in sets]} not in S_{order} (scale {scale})")


def _check_level_tree(x: FinVec, definition: LevelTree, node: Node, level: int) -> Fraction:
    if node.level != level:
        raise BadTree(BadTree.LEVEL, f"{set_repr(node.set)} has level {node.level}, expected {level}")
    if node.children:
        _check_children(node, 1, definition.scale)
        return sum((_check_level_tree(x, definition, child, level + 1) for child in node.children), Fraction(0))
    if not definition.terminal.allows(level):
        raise BadTree(BadTree.TERMINAL_LEVEL, f"terminal {set_repr(node.set)} at level {level}")
    actual = definition.leaf.evaluate(x.restrict(node.set))
    if node.leaf_value != actual:
        raise BadTree(BadTree.LEAF_MISMATCH, f"{set_repr(node.set)} claims {node.leaf_value}, leaf gives {actual}")
    return definition.ratio ** level * actual


def _check_implicit(x: FinVec, definition: ImplicitEq, node: Node, level: int) -> Fraction:
    if node.level != level:
        raise BadTree(BadTree.LEVEL, f"{set_repr(node.set)} has level {node.level}, expected {level}")
    if not node.children:
        actual = x.restrict(node.set).sup_norm()
        if node.leaf_value != actual:
            raise BadTree(BadTree.LEAF_MISMATCH, f"{set_repr(node.set)} claims {node.leaf_value}, sup norm is {actual}")
        return actual
    if node.order is None or node.factor is None:
        raise BadTree(BadTree.WEIGHT, f"{set_repr(node.set)} has children but no rule")
    if len(node.children) < 2:
        raise BadTree(BadTree.ADMISSIBILITY, f"{set_repr(node.set)} decomposes into fewer than two parts")
    if node.factor <= 0 or node.factor != definition.rules.weight(node.order):
        raise BadTree(BadTree.WEIGHT, f"factor {node.factor} is not the weight of order {node.order}")
    _check_children(node, node.order, definition.scale)
    inner = sum((_check_implicit(x, definition, child, level + node.order) for child in node.children), Fraction(0))
    return node.factor * inner


def check_certificate(x: FinVec, definition: NormDef, certificate: Certificate) -> Fraction:
    """Re-validate a certificate from scratch and return the value it certifies."""
    validate(definition)
    root = certificate.root
    if root.level != 0:
        raise BadTree(BadTree.LEVEL, f"root level is {root.level}")
    if not root.set:
        if root.children or root.leaf_value != 0:
            raise BadTree(BadTree.LEAF_MISMATCH, "empty root must be a zero leaf")
        return Fraction(0)
    if certificate.floor:
        if definition.floor is not Floor.SUP_NORM:
            raise BadTree(BadTree.FLOOR, "definition has no sup-norm floor")
        if root.children:
            raise BadTree(BadTree.FLOOR, "a floor certificate is a single terminal root")
        actual = x.restrict(root.set).sup_norm()
        if root.leaf_value != actual:
            raise BadTree(BadTree.LEAF_MISMATCH, f"floor claims {root.leaf_value}, sup norm is {actual}")
        return actual
    if isinstance(definition, ImplicitEq):
        return _check_implicit(x, definition, root, 0)
    return _check_level_tree(x, definition, root, 0)

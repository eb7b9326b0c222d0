"""
Exact split tables over intervals of support indices.

Support points are indexed 0..N-1. An interval (a, b) stands for the points
with indices a..b. Every table is filled in order of increasing interval
length. A table is told about an interval twice. `open` comes before the
interval's own part value is known; it computes the values of splitting the
interval into smaller parts. `close` then records the part value and derives
the bounded partition values that longer intervals will need.

Witnesses are recovered by recomputing the candidates of an entry and
keeping the first one that equals the stored optimum, so no parent pointers
are stored.
"""
import logging
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

logger = logging.getLogger(__name__)

Interval = Tuple[int, int]
Grid = List[List[Optional[Fraction]]]


def _grid(size: int) -> Grid:
    return [[None] * size for _ in range(size)]


def _larger(current: Optional[Fraction], candidate: Optional[Fraction]) -> Optional[Fraction]:
    if candidate is None:
        return current
    if current is None or candidate > current:
        return candidate
    return current


class SplitTable:
    """
    Best partitions of intervals into consecutive parts.

    `caps[t]` bounds the number of parts of a partition whose first part
    starts at index t (scale times the position of t for 1-admissibility).

    Per interval (a, b) the table keeps:
      part[a][b]       value of (a, b) used as a single part
      unbounded[a][b]  best partition starting exactly at a, any number of parts
      bounded[a,b,c]   best partition starting exactly at a with at most c parts
      best[a][b]       best admissible partition starting at any s >= a
      strict[a][b]     as best, but (a, b) as one single part is excluded
      multi[a][b]      best admissible partition with at least two parts
    """

    def __init__(self, caps: Sequence[int]):
        self.caps = list(caps)
        self.size = len(self.caps)
        self.part = _grid(self.size)
        self.unbounded = _grid(self.size)
        self.best = _grid(self.size)
        self.strict = _grid(self.size)
        self.multi = _grid(self.size)
        self.bounded: Dict[Tuple[int, int, int], Fraction] = {}

    def within(self, t: int, b: int, c: int) -> Fraction:
        """Best partition of (t, b), first part starting at t, at most c parts."""
        if c >= b - t + 1:
            return self.unbounded[t][b]
        if c == 1:
            return self.part[t][b]
        return self.bounded[(t, b, c)]

    def _split_from(self, a: int, b: int, c: int) -> Optional[Fraction]:
        """At least two and at most c parts, first part starting at a."""
        if c < 2 or b <= a:
            return None
        top = None
        for e in range(a, b):
            top = _larger(top, self.part[a][e] + self.within(e + 1, b, c - 1))
        return top

    def open(self, a: int, b: int) -> None:
        if b == a:
            return
        here = self._split_from(a, b, self.caps[a])
        self.multi[a][b] = _larger(self.multi[a + 1][b], here)
        self.strict[a][b] = _larger(self.best[a + 1][b], here)

    def close(self, a: int, b: int, value: Fraction) -> None:
        self.part[a][b] = value
        length = b - a + 1
        if length == 1:
            self.unbounded[a][b] = value
            self.best[a][b] = value
            return
        tail = None
        for e in range(a, b):
            tail = _larger(tail, self.part[a][e] + self.unbounded[e + 1][b])
        self.unbounded[a][b] = _larger(value, tail)
        for c in range(2, min(length - 1, self.caps[a]) + 1):
            self.bounded[(a, b, c)] = _larger(value, self._split_from(a, b, c))
        self.best[a][b] = _larger(self.best[a + 1][b], self.within(a, b, self.caps[a]))

    # ---------- witnesses ----------

    def _parts_within(self, t: int, b: int, c: int) -> List[Interval]:
        parts: List[Interval] = []
        while True:
            target = self.within(t, b, c)
            if self.part[t][b] == target:
                parts.append((t, b))
                return parts
            for e in range(t, b):
                if self.part[t][e] + self.within(e + 1, b, c - 1) == target:
                    parts.append((t, e))
                    t, c = e + 1, c - 1
                    break
            else:
                raise AssertionError(f"no witness for interval ({t}, {b}) with {c} parts")

    def _parts_split_from(self, a: int, b: int, target: Fraction) -> Optional[List[Interval]]:
        c = self.caps[a]
        if c < 2 or b <= a:
            return None
        for e in range(a, b):
            if self.part[a][e] + self.within(e + 1, b, c - 1) == target:
                return [(a, e)] + self._parts_within(e + 1, b, c - 1)
        return None

    def best_parts(self, a: int, b: int) -> List[Interval]:
        target = self.best[a][b]
        for s in range(a, b + 1):
            if self.within(s, b, self.caps[s]) == target:
                return self._parts_within(s, b, self.caps[s])
        raise AssertionError(f"no witness for best({a}, {b})")

    def strict_parts(self, a: int, b: int) -> List[Interval]:
        target = self.strict[a][b]
        parts = self._parts_split_from(a, b, target)
        if parts is not None:
            return parts
        return self.best_parts(a + 1, b)

    def multi_parts(self, a: int, b: int) -> List[Interval]:
        target = self.multi[a][b]
        for s in range(a, b):
            parts = self._parts_split_from(s, b, target)
            if parts is not None:
                return parts
        raise AssertionError(f"no witness for multi({a}, {b})")


class AdmissibleSums:
    """
    Best k-admissible sums over intervals for k = 0..depth.

    Uses S_k = S_1[S_{k-1}]: a k-admissible sequence is a 1-admissible
    sequence of groups, each group (k-1)-admissible. Level k is a SplitTable
    whose part values are the full level k-1 values, with base values at k = 0.
    """

    def __init__(self, caps: Sequence[int], depth: int):
        self.size = len(caps)
        self.depth = depth
        self.base = _grid(self.size)
        self.levels = [SplitTable(caps) for _ in range(depth)]
        # two[k][a][b]: best k-admissible sum with at least two parts
        self.two: List[Grid] = [_grid(self.size) for _ in range(depth + 1)]

    def open(self, a: int, b: int) -> None:
        for k in range(1, self.depth + 1):
            table = self.levels[k - 1]
            table.open(a, b)
            self.two[k][a][b] = _larger(self.two[k - 1][a][b], table.multi[a][b])

    def close(self, a: int, b: int, base_value: Fraction) -> None:
        self.base[a][b] = base_value
        value = base_value
        for table in self.levels:
            table.close(a, b, value)
            value = table.best[a][b]

    def full(self, k: int, a: int, b: int) -> Fraction:
        if k == 0:
            return self.base[a][b]
        return self.levels[k - 1].best[a][b]

    def full_parts(self, k: int, a: int, b: int) -> List[Interval]:
        if k == 0:
            return [(a, b)]
        parts: List[Interval] = []
        for s, e in self.levels[k - 1].best_parts(a, b):
            parts.extend(self.full_parts(k - 1, s, e))
        return parts

    def two_parts(self, k: int, a: int, b: int) -> List[Interval]:
        target = self.two[k][a][b]
        while k > 0:
            table = self.levels[k - 1]
            if table.multi[a][b] == target:
                parts: List[Interval] = []
                for s, e in table.multi_parts(a, b):
                    parts.extend(self.full_parts(k - 1, s, e))
                return parts
            k -= 1
        raise AssertionError(f"no witness with two parts for ({a}, {b})")

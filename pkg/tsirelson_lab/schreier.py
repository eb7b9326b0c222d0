"""
Schreier families S_n and admissibility.

S_0 holds the empty set and the singletons. S_{n+1} holds the unions
E_1 < ... < E_l of sets E_p in S_n with l <= min E_1. Membership is decided by
a greedy automaton that keeps, for every nesting level, how many more chunks
the current set at that level may still take; a new point is placed in the
innermost chunk that has room. Greedy placement is optimal because the
families are hereditary and spreading.
"""
import logging
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from .config import DEFAULT_SETTINGS, Settings
from .exceptions import BoundExceeded, NotMember

logger = logging.getLogger(__name__)

FinSet = Tuple[int, ...]
SetSequence = Tuple[FinSet, ...]
Caps = Tuple[int, ...]


def fin_set(elements: Iterable[int]) -> FinSet:
    """Validate and sort positions into a FinSet."""
    items = sorted(elements)
    for e in items:
        if isinstance(e, bool) or not isinstance(e, int) or e < 1:
            raise ValueError(f"set elements must be positive integers, got {e!r}")
    for a, b in zip(items, items[1:]):
        if a == b:
            raise ValueError(f"duplicate element {a}")
    return tuple(items)


def set_sequence(sets: Iterable[Iterable[int]]) -> SetSequence:
    return tuple(fin_set(s) for s in sets)


def is_successive(seq: Sequence[FinSet]) -> bool:
    if any(len(s) == 0 for s in seq):
        return False
    return all(a[-1] < b[0] for a, b in zip(seq, seq[1:]))


# ---------- Greedy automaton ----------

def _open(point: int, n: int) -> Caps:
    return (point - 1,) * n


def _advance(caps: Caps, point: int) -> Tuple[Optional[Caps], int]:
    """
    Place `point` after the points already consumed.

    Returns the new capacities and the level (1-based) whose chunk count was
    spent, or (None, 0) when the point does not fit.
    """
    for index, room in enumerate(caps):
        if room > 0:
            new = list(caps)
            new[index] = room - 1
            for lower in range(index):
                new[lower] = point - 1
            return tuple(new), index + 1
    return None, 0


def _accepts(points: Sequence[int], n: int) -> bool:
    if not points:
        return True
    caps = _open(points[0], n)
    for p in points[1:]:
        caps, _ = _advance(caps, p)
        if caps is None:
            return False
    return True


def is_member(F: Iterable[int], n: int) -> bool:
    """True iff F belongs to S_n."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return _accepts(fin_set(F), n)


def decompose(F: Iterable[int], n: int) -> List[FinSet]:
    """
    Greedy witness of F in S_n (n >= 1): the top-level chunks E_1 < ... < E_l,
    each in S_{n-1}, with l <= min F.
    """
    points = fin_set(F)
    if n < 1:
        raise ValueError("decompose needs n >= 1")
    if not points:
        return []
    chunks: List[List[int]] = [[points[0]]]
    caps = _open(points[0], n)
    for p in points[1:]:
        caps, level = _advance(caps, p)
        if caps is None:
            raise NotMember(f"{set_repr(points)} is not in S_{n}")
        if level == n:
            chunks.append([p])
        else:
            chunks[-1].append(p)
    return [tuple(c) for c in chunks]


def is_maximal(F: Iterable[int], n: int) -> bool:
    """True iff F is in S_n and no F u {p}, p > max F, is."""
    points = fin_set(F)
    if not _accepts(points, n):
        raise NotMember(f"{set_repr(points)} is not in S_{n}")
    if not points:
        return False
    # Acceptance of one more point never depends on its value.
    return not _accepts(points + (points[-1] + 1,), n)


def is_admissible(seq: Sequence[Iterable[int]], k: int, scale: int = 1) -> bool:
    """True iff seq is successive and {scale * min E_i} is in S_k."""
    if scale < 1:
        raise ValueError("scale must be a positive integer")
    try:
        sets = [fin_set(s) for s in seq]
    except ValueError:
        return False
    if not is_successive(sets):
        return False
    return _accepts([scale * s[0] for s in sets], k)


def maximal_extension(points: Sequence[int], n: int, scale: int = 1) -> FinSet:
    """Longest prefix of the increasing sequence `points` whose scaled copy is in S_n."""
    points = fin_set(points)
    if not points:
        return ()
    caps = _open(scale * points[0], n)
    taken = 1
    for p in points[1:]:
        caps, _ = _advance(caps, scale * p)
        if caps is None:
            break
        taken += 1
    return points[:taken]


def rank(F: Iterable[int], scale: int = 1) -> Optional[int]:
    """Least n with scale*F in S_n, or None when no such n exists."""
    points = [scale * p for p in fin_set(F)]
    if len(points) >= 2 and points[0] == 1:
        return None
    # A set whose minimum is at least 2 lies in S_{|F|-1}.
    for n in range(max(len(points), 1)):
        if _accepts(points, n):
            return n
    return max(len(points) - 1, 0)


def admissibility_cap(points: Sequence[int], scale: int = 1) -> int:
    """
    Least k such that every successive sequence of parts taken inside
    `points` is k-admissible. A leading point scaling to 1 can only head a
    one-part sequence, so it is ignored.
    """
    points = list(points)
    if points and scale * points[0] == 1:
        points = points[1:]
    return rank(points, scale) or 0


# ---------- Optimization ----------

def max_weight_subset(weights: Mapping[int, Fraction], n: int, scale: int = 1) -> Tuple[Fraction, FinSet]:
    """
    Heaviest F in S_n (scaled by `scale`) for nonnegative weights.

    Returns the maximum and the lexicographically least set attaining it.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    for p, w in weights.items():
        if w < 0:
            raise ValueError(f"weight at {p} is negative")
    points = [p for p in sorted(weights) if weights[p] > 0]
    if not points:
        return Fraction(0), ()
    w = [Fraction(weights[p]) for p in points]
    size = len(points)

    def clamp(caps: Caps, index: int) -> Caps:
        left = size - index - 1
        return tuple(min(c, left) for c in caps)

    def step(caps: Optional[Caps], index: int) -> Optional[Caps]:
        scaled = scale * points[index]
        if caps is None:
            return clamp(_open(scaled, n), index)
        new, _ = _advance(caps, scaled)
        return None if new is None else clamp(new, index)

    @lru_cache(maxsize=None)
    def best(index: int, caps: Optional[Caps]) -> Fraction:
        if index == size:
            return Fraction(0)
        value = best(index + 1, caps)
        after = step(caps, index)
        if after is not None:
            value = max(value, w[index] + best(index + 1, after))
        return value

    # Warm the table from the right so the recursion stays shallow.
    for index in range(size, -1, -1):
        best(index, None)
    total = best(0, None)

    chosen: List[int] = []
    caps: Optional[Caps] = None
    remaining = total
    for index in range(size):
        after = step(caps, index)
        if after is not None and w[index] + best(index + 1, after) == remaining:
            chosen.append(points[index])
            remaining -= w[index]
            caps = after
    best.cache_clear()
    return total, tuple(chosen)


def enumerate_family(n: int, max_pos: int, settings: Settings = DEFAULT_SETTINGS) -> Iterator[FinSet]:
    """Yield every member of S_n with elements <= max_pos, in lexicographic order."""
    if max_pos > settings.enumeration_bound or n > settings.enumeration_max_order:
        raise BoundExceeded(
            f"enumeration of S_{n} up to {max_pos} exceeds the guard "
            f"(max_pos <= {settings.enumeration_bound}, n <= {settings.enumeration_max_order})"
        )
    if n < 0 or max_pos < 0:
        raise ValueError("n and max_pos must be nonnegative")

    def extend(prefix: List[int], caps: Caps) -> Iterator[FinSet]:
        for p in range(prefix[-1] + 1, max_pos + 1):
            new, _ = _advance(caps, p)
            if new is None:
                break  # fit does not depend on p
            prefix.append(p)
            yield tuple(prefix)
            yield from extend(prefix, new)
            prefix.pop()

    yield ()
    for first in range(1, max_pos + 1):
        yield (first,)
        yield from extend([first], _open(first, n))


def set_repr(F: Iterable[int]) -> str:
    return "{" + ",".join(str(p) for p in F) + "}"

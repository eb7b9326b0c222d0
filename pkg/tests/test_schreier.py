import itertools as it
from fractions import Fraction

import numpy as np
import pytest

from tsirelson_lab.exceptions import BoundExceeded, NotMember
from tsirelson_lab.oracle import brute_member
from tsirelson_lab.schreier import (
    admissibility_cap,
    decompose,
    enumerate_family,
    is_admissible,
    is_maximal,
    is_member,
    max_weight_subset,
    maximal_extension,
    rank,
)


def _power_set(limit):
    points = range(1, limit + 1)
    for r in range(limit + 1):
        yield from it.combinations(points, r)


# ---------- examples ----------

@pytest.mark.parametrize("F, n, expected", [
    ((), 5, True),
    ((2, 3, 4), 1, False),
    ((2, 3, 4, 5, 6, 7), 2, True),
    ((7,), 0, True),
    ((2, 3), 0, False),
    ((1, 2), 3, False),
    ((3, 4, 5), 1, True),
])
def test_membership_examples(F, n, expected):
    assert is_member(F, n) is expected


def test_decompose_gives_greedy_witness():
    assert decompose((2, 3, 4, 5, 6, 7), 2) == [(2, 3), (4, 5, 6, 7)]
    with pytest.raises(NotMember):
        decompose((2, 3, 4), 1)


@pytest.mark.parametrize("F, n, expected", [
    ((1,), 1, True),
    ((3, 4), 1, False),
    ((3, 4, 5), 1, True),
    ((2, 3, 4, 5, 6, 7), 2, True),
])
def test_maximality_examples(F, n, expected):
    assert is_maximal(F, n) is expected


def test_maximality_requires_membership():
    with pytest.raises(NotMember):
        is_maximal((2, 3, 4), 1)


@pytest.mark.parametrize("seq, k, scale, expected", [
    ([(3,), (4,), (5,)], 1, 1, True),
    ([(1,), (2,)], 1, 1, False),
    ([(2,), (3,)], 1, 3, True),
    ([(1,), (5,)], 1, 2, True),
    ([(3, 5), (4,)], 1, 1, False),
    ([(3,), ()], 1, 1, False),
    ([(2, 3, 4)], 0, 1, True),
])
def test_admissibility_examples(seq, k, scale, expected):
    assert is_admissible(seq, k, scale) is expected


@pytest.mark.parametrize("weights, n, expected", [
    ({1: 5, 2: 3, 3: 2}, 1, (Fraction(5), (1,))),
    ({}, 3, (Fraction(0), ())),
    ({p: Fraction(2, 9) for p in range(9, 18)}, 0, (Fraction(2, 9), (9,))),
    ({p: Fraction(2, 9) for p in range(9, 18)}, 1, (Fraction(2), tuple(range(9, 18)))),
])
def test_max_weight_subset_examples(weights, n, expected):
    assert max_weight_subset(weights, n) == expected


def test_negative_weights_are_rejected():
    with pytest.raises(ValueError):
        max_weight_subset({2: Fraction(-1)}, 1)


def test_enumerate_small_families():
    assert list(enumerate_family(0, 3)) == [(), (1,), (2,), (3,)]
    assert list(enumerate_family(1, 3)) == [(), (1,), (2,), (2, 3), (3,)]


def test_enumerate_is_guarded():
    with pytest.raises(BoundExceeded):
        list(enumerate_family(1, 21))
    with pytest.raises(BoundExceeded):
        list(enumerate_family(5, 5))


def test_maximal_extension_and_rank():
    assert maximal_extension(range(3, 20), 1) == (3, 4, 5)
    assert maximal_extension([2, 3], 1, scale=3) == (2, 3)
    assert rank((2, 3)) == 1
    assert rank((1, 2)) is None
    assert rank(()) == 0
    assert admissibility_cap((1, 2, 3)) == 1


# ---------- properties ----------

@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_enumerate_matches_power_set_filter(n):
    expected = {F for F in _power_set(8) if is_member(F, n)}
    listed = list(enumerate_family(n, 8))
    assert len(listed) == len(set(listed))
    assert set(listed) == expected


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_greedy_membership_matches_decomposition_search(n):
    for F in _power_set(9):
        assert is_member(F, n) == brute_member(F, n), F


@pytest.mark.slow
@pytest.mark.parametrize("n", [1, 2, 3])
def test_greedy_membership_matches_decomposition_search_to_twelve(n):
    for F in _power_set(12):
        assert is_member(F, n) == brute_member(F, n), F


def test_hereditary(rng):
    for _ in range(200):
        n = int(rng.integers(0, 4))
        size = int(rng.integers(1, 10))
        F = tuple(sorted(int(p) for p in rng.choice(np.arange(1, 19), size=size, replace=False)))
        if not is_member(F, n):
            continue
        keep = rng.random(len(F)) < 0.5
        G = tuple(p for p, k in zip(F, keep) if k)
        assert is_member(G, n)


def test_spreading(rng):
    for _ in range(200):
        n = int(rng.integers(1, 4))
        F = tuple(sorted(int(p) for p in rng.choice(np.arange(1, 13), size=int(rng.integers(1, 8)), replace=False)))
        if not is_member(F, n):
            continue
        shifts = rng.integers(0, 4, size=len(F))
        G, last = [], 0
        for p, s in zip(F, shifts):
            last = max(p + int(s), last + 1)
            G.append(last)
        assert is_member(G, n)


def test_nesting():
    for n in range(3):
        for F in enumerate_family(n, 10):
            assert is_member(F, n + 1)


def _composes(F, n, k):
    """F is a k-admissible union of successive S_n sets."""
    size = len(F)
    if size == 0:
        return True
    for count in range(size):
        for cuts in it.combinations(range(1, size), count):
            bounds = (0,) + cuts + (size,)
            pieces = [F[bounds[i]:bounds[i + 1]] for i in range(len(bounds) - 1)]
            if all(is_member(p, n) for p in pieces) and is_admissible(pieces, k):
                return True
    return False


@pytest.mark.parametrize("n, k", [(0, 1), (1, 1), (1, 2), (2, 1), (2, 2), (1, 3), (3, 1)])
def test_composition(rng, n, k):
    for _ in range(60):
        size = int(rng.integers(1, 9))
        F = tuple(sorted(int(p) for p in rng.choice(np.arange(1, 19), size=size, replace=False)))
        assert is_member(F, n + k) == _composes(F, n, k), F


@pytest.mark.slow
@pytest.mark.parametrize("n, k", [(0, 1), (1, 1), (1, 2), (2, 1), (2, 2), (1, 3), (3, 1)])
def test_composition_on_every_subset_to_twelve(n, k):
    for F in _power_set(12):
        assert is_member(F, n + k) == _composes(F, n, k), F


@pytest.mark.parametrize("n", [0, 1, 2])
@pytest.mark.parametrize("scale", [1, 2])
def test_max_weight_subset_matches_enumeration(rng, n, scale):
    for _ in range(15):
        positions = sorted(int(p) for p in rng.choice(np.arange(1, 13), size=int(rng.integers(1, 9)), replace=False))
        weights = {p: Fraction(int(rng.integers(1, 10)), int(rng.integers(1, 4))) for p in positions}
        value, chosen = max_weight_subset(weights, n, scale)
        expected = max(
            sum((weights.get(p, Fraction(0)) for p in F), Fraction(0))
            for F in _power_set(12)
            if set(F) <= set(positions) and is_member([scale * p for p in F], n)
        )
        assert value == expected
        assert is_member([scale * p for p in chosen], n)
        assert sum(weights[p] for p in chosen) == value

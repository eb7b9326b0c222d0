from fractions import Fraction

import numpy as np
import pytest

from tsirelson_lab import engine, oracle
from tsirelson_lab.exceptions import BoundExceeded, InvalidDef, SupportTooLarge


def test_brute_member_examples():
    assert oracle.brute_member((2, 3, 4, 5, 6, 7), 2)
    assert not oracle.brute_member((2, 3, 4), 1)
    assert oracle.brute_member((), 0)


def test_brute_member_is_guarded():
    with pytest.raises(BoundExceeded):
        oracle.brute_member(range(2, 15), 2)
    with pytest.raises(BoundExceeded):
        oracle.brute_member((3, 4), 4)


@pytest.mark.parametrize("positions, definition, expected", [
    ((2, 3, 4, 5), engine.tsirelson_def(), Fraction(3, 2)),
    ((1, 2, 3), engine.tsirelson_def(), Fraction(1)),
    ((3, 4, 5), engine.seminorm_jn_def(1, 2), Fraction(3, 2)),
    ((3, 4, 5), engine.implicit_def(2, Fraction(1, 4)), Fraction(1)),
])
def test_brute_norm_examples(vec, positions, definition, expected):
    assert oracle.brute_norm(vec(*positions), definition) == expected


def test_brute_norm_is_guarded(vec):
    with pytest.raises(SupportTooLarge):
        oracle.brute_norm(vec(*range(1, 12)), engine.tsirelson_def())


def test_brute_admissible_sum(vec):
    value, witness = oracle.brute_admissible_sum(vec(3, 4, 5), 1, lambda y: y.sup_norm())
    assert value == 3
    assert witness == ((3,), (4,), (5,))
    with pytest.raises(InvalidDef):
        oracle.brute_admissible_sum(vec(3), -1, lambda y: y.sup_norm())


def test_random_vector_shape():
    rng = np.random.default_rng(5)
    for _ in range(50):
        x = oracle.random_vector(rng, 6)
        assert 1 <= len(x) <= 6
        assert all(0 < abs(v) <= 4 for v in x.values())
        assert all(v.denominator <= 4 for v in x.values())


def test_equivalence_sweep_matches():
    report = oracle.equivalence_sweep(5, 8, seed=3)
    assert report.ok
    assert report.summary() == "8/8 exact matches"
    assert report.mismatch_frame().empty


def test_equivalence_sweep_is_reproducible():
    first = oracle.equivalence_sweep(4, 5, seed=11)
    second = oracle.equivalence_sweep(4, 5, seed=11)
    assert [o.vector for o in first.outcomes] == [o.vector for o in second.outcomes]


def test_equivalence_sweep_rejects_large_supports():
    with pytest.raises(SupportTooLarge):
        oracle.equivalence_sweep(11, 1, seed=0)


def test_mismatches_are_reported(monkeypatch, vec):
    monkeypatch.setattr(oracle, "brute_norm", lambda x, definition, settings=None: Fraction(-1))
    outcome = oracle.run_trial(vec(3, 4))
    assert not outcome.matched
    assert len(outcome.mismatches) == len(oracle.SWEEP_DEFINITIONS)
    report = oracle.SweepReport(2, 0, [outcome])
    assert report.summary() == "0/1 exact matches"
    assert list(report.mismatch_frame().columns) == ["trial", "vector", "detail"]
    assert len(report.mismatch_frame()) == len(oracle.SWEEP_DEFINITIONS)


@pytest.mark.slow
def test_large_equivalence_sweep():
    report = oracle.equivalence_sweep(8, 500, seed=7)
    assert report.ok, report.mismatch_frame().to_string()

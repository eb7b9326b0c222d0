from fractions import Fraction

import pytest

from tsirelson_lab import construct, engine
from tsirelson_lab.config import Settings
from tsirelson_lab.construct import (
    BlockBasis,
    build_stabilized,
    l1_average,
    n_eps_average,
    repeated_average,
    stabilized_vector,
    thin,
    unit_basis,
    unit_plan_size,
)
from tsirelson_lab.exceptions import (
    EpsilonTooSmallForBudget,
    Exhausted,
    InsufficientBasis,
    SupportTooLarge,
    VerificationError,
)
from tsirelson_lab.vectors import FinVec

UNIT = unit_basis(1024)


# ---------- bases ----------

def test_unit_basis():
    basis = unit_basis(4, start=3)
    assert basis.mins == (3, 4, 5, 6)
    assert basis.normalized
    assert basis.tail(2).mins == (5, 6)


def test_block_basis_validation(vec):
    with pytest.raises(ValueError):
        BlockBasis((vec(3, 4), vec(4, 5)))
    with pytest.raises(ValueError):
        BlockBasis((FinVec(),))


def test_normalize(vec):
    basis = BlockBasis((vec(2, 3), vec({5: 2}), vec(6, 7, 8))).normalize()
    assert basis.normalized
    assert basis[0] == vec(2, 3)
    assert basis[1] == vec(5)
    assert all(engine.tsirelson(y).value == 1 for y in basis.vectors)


def test_thin():
    assert thin(unit_basis(20), 2).mins == (1, 3, 7, 15)
    assert thin(unit_basis(20), 1).mins == tuple(range(1, 21))
    assert thin(unit_basis(100, start=4), 3, count=3).mins == (4, 13, 40)


def test_thin_exhausted():
    with pytest.raises(Exhausted):
        thin(unit_basis(20), 2, count=5)
    with pytest.raises(Exhausted):
        thin(BlockBasis(()), 2)


# ---------- repeated averages ----------

@pytest.mark.parametrize("first, order, expected", [
    (3, 0, 1),
    (3, 1, 3),
    (5, 2, 155),
    (9, 2, 4599),
    (2, 3, 2046),
    (65, 2, None),
])
def test_unit_plan_size(first, order, expected):
    assert unit_plan_size(first, order) == expected


def test_repeated_average_of_order_one():
    coefficients, certificate = repeated_average(unit_basis(50), 1, start=3)
    assert coefficients == {2: Fraction(2, 3), 3: Fraction(2, 3), 4: Fraction(2, 3)}
    z = FinVec({p: Fraction(2, 3) for p in (3, 4, 5)})
    assert engine.check_certificate(z, engine.tree_def(), certificate) == 1


def test_repeated_average_of_order_two():
    coefficients, _ = repeated_average(unit_basis(50), 2, start=2)
    assert sum(coefficients.values()) == 4
    assert coefficients[1] == 1
    assert coefficients[3] == Fraction(1, 2)


def test_repeated_average_too_large():
    with pytest.raises(SupportTooLarge):
        repeated_average(UNIT, 2, start=9)


# ---------- (n, eps) averages ----------

def test_order_one_average():
    z, certificate = n_eps_average(UNIT, 1, Fraction(1, 4))
    assert z == FinVec({p: Fraction(2, 9) for p in range(9, 18)})
    assert certificate.index_set == tuple(range(8, 17))
    assert certificate.max_mass == Fraction(2, 9)
    assert certificate.heaviest == (9,)
    assert certificate.norm_lower == 1
    assert certificate.norm_upper == 1
    assert not certificate.relaxed
    certificate.validate(UNIT)
    assert "lower bound: 1 (1)" in certificate.summary()


@pytest.mark.slow
def test_order_two_average():
    z, certificate = n_eps_average(UNIT, 2, Fraction(9, 10))
    assert z.support == tuple(range(5, 160))
    assert sum(certificate.coeffs.values()) == 4
    assert certificate.max_mass == Fraction(4, 5)
    assert certificate.norm_lower == 1
    assert 1 <= certificate.norm_upper <= 2
    assert "norm: " in certificate.summary()[-1]


def test_scaled_admissibility_average():
    z, certificate = n_eps_average(UNIT, 1, Fraction(1, 8), k=3)
    assert z == FinVec({p: Fraction(2, 17) for p in range(17, 34)})
    assert certificate.max_mass == Fraction(2, 17)
    certificate.validate(UNIT)


@pytest.mark.slow
def test_relaxed_average():
    z, certificate = n_eps_average(UNIT, 2, Fraction(1, 2), relax=True)
    assert certificate.relaxed
    assert certificate.max_mass == Fraction(4, 5)
    assert sum(certificate.coeffs.values()) == 4
    assert z.min_support == 5
    certificate.validate(UNIT)


def test_strict_average_is_refused():
    with pytest.raises(EpsilonTooSmallForBudget) as info:
        n_eps_average(UNIT, 2, Fraction(1, 2))
    assert info.value.required == 9 * (2 ** 9 - 1)
    assert info.value.bound == 256


def test_refusal_reports_the_closed_form_size():
    with pytest.raises(EpsilonTooSmallForBudget) as info:
        n_eps_average(UNIT, 2, Fraction(1, 8))
    assert info.value.required == 33 * (2 ** 33 - 1)


@pytest.mark.parametrize("n, required", [(2, 33 * (2 ** 33 - 1)), (3, None)])
def test_scaled_averages_out_of_budget_are_refused(n, required):
    with pytest.raises(EpsilonTooSmallForBudget) as info:
        n_eps_average(UNIT, n, Fraction(1, 8), k=3)
    assert info.value.required == required
    assert info.value.bound == 256
    if required is None:
        assert "more than" in str(info.value)


def test_average_is_validated_before_it_is_returned(monkeypatch):
    real = construct.lower_norm_certificate

    def overstated(z, root, leaf):
        value, certificate = real(z, root, leaf)
        return value + 1, certificate

    monkeypatch.setattr(construct, "lower_norm_certificate", overstated)
    with pytest.raises(VerificationError):
        n_eps_average(UNIT, 1, Fraction(1, 4))


def test_average_needs_a_long_enough_basis():
    with pytest.raises(InsufficientBasis):
        n_eps_average(unit_basis(8), 1, Fraction(1, 4))


@pytest.mark.parametrize("kwargs", [
    {"n": 0, "epsilon": Fraction(1, 2)},
    {"n": 1, "epsilon": Fraction(0)},
    {"n": 1, "epsilon": Fraction(3, 2)},
    {"n": 1, "epsilon": Fraction(1, 2), "k": 0},
])
def test_average_parameters(kwargs):
    with pytest.raises(ValueError):
        n_eps_average(UNIT, **kwargs)


def test_average_needs_a_normalized_basis(vec):
    basis = BlockBasis(tuple(vec(p) * 2 for p in range(1, 40)))
    with pytest.raises(ValueError):
        n_eps_average(basis, 1, Fraction(1, 2))


def test_tampered_certificate_fails_validation():
    _, certificate = n_eps_average(UNIT, 1, Fraction(1, 4))
    certificate.max_mass = Fraction(1, 9)
    with pytest.raises(VerificationError):
        certificate.validate(UNIT)
    _, certificate = n_eps_average(UNIT, 1, Fraction(1, 4))
    certificate.coeffs[8] += 1
    with pytest.raises(VerificationError):
        certificate.validate(UNIT)


def test_average_of_a_block_basis(vec, settings):
    blocks = tuple(vec(2 * p, 2 * p + 1) for p in range(1, 40))
    basis = BlockBasis(blocks).normalize(settings)
    z, certificate = n_eps_average(basis, 1, Fraction(1, 2), settings=settings)
    assert certificate.norm_lower >= 1
    assert certificate.max_mass < Fraction(1, 2)
    certificate.validate(basis, settings)
    assert engine.tsirelson(z).value >= 1


# ---------- stabilized vectors ----------

def test_stabilized_vector_of_order_one():
    stabilized = build_stabilized(UNIT, 1, Fraction(1, 8))
    assert stabilized.vector == FinVec({p: Fraction(2, 17) for p in range(17, 34)})
    assert stabilized.norm_lower == Fraction(1, 2)
    assert not stabilized.relaxed
    assert stabilized_vector(UNIT, 1, Fraction(1, 8)) == stabilized.vector


def test_stabilized_vector_of_order_two_is_refused():
    with pytest.raises(EpsilonTooSmallForBudget):
        build_stabilized(UNIT, 2, Fraction(1, 8))


@pytest.mark.slow
def test_relaxed_stabilized_vector_of_order_two_fits_the_budget():
    settings = Settings(support_bound=64)
    stabilized = build_stabilized(UNIT, 2, Fraction(1, 8), settings=settings, relax=True)
    first, second = stabilized.parts
    assert first == FinVec({2: 1, 3: 1})
    assert second.support == tuple(range(4, 64))
    assert [c.n for c in stabilized.certificates] == [1, 2]
    assert all(c.relaxed for c in stabilized.certificates)
    assert len(stabilized.vector) <= 64
    assert stabilized.norm_lower == Fraction(1, 2)


def test_relaxed_layout_of_order_three_is_refused():
    with pytest.raises(EpsilonTooSmallForBudget):
        build_stabilized(UNIT, 3, Fraction(1, 8), settings=Settings(support_bound=64), relax=True)


def test_stabilized_vector_needs_enough_vectors():
    with pytest.raises(InsufficientBasis):
        build_stabilized(unit_basis(1), 2, Fraction(1, 8))


# ---------- l1 averages ----------

def test_l1_averages():
    assert l1_average(UNIT, 1, 4) == FinVec({p: Fraction(1, 2) for p in range(4, 8)})
    assert l1_average(UNIT, 2, 2) == FinVec({p: Fraction(2, 3) for p in range(2, 8)})


def test_l1_average_limits():
    with pytest.raises(InsufficientBasis):
        l1_average(unit_basis(5), 1, 4)
    with pytest.raises(InsufficientBasis):
        l1_average(unit_basis(5), 1, 6)
    with pytest.raises(SupportTooLarge):
        l1_average(UNIT, 3, 5, Settings(support_bound=100))

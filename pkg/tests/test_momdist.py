from fractions import Fraction

import pytest

from momloc.errors import InvalidArgumentError, ModelError
from momloc.momdist import (ExactComplex, FieldModel, MomentumDistribution, OnShellDelta, Propagator,
                            SlotKind, Term, build_free_two_point, build_structure_function,
                            build_weighted_structure_function, check_spectral_support, minkowski_dot,
                            multiply_polynomial, validate_multiplier)
from momloc.symkernel import Polynomial


@pytest.mark.parametrize("n,N", [(3, 1), (4, 1), (3, 2), (4, 2), (5, 2)])
def test_structure_term_count(n, N):
    model = FieldModel(tuple(range(1, N + 1)))
    assert len(build_structure_function(model, n).terms) == n * N ** n


def test_structure_term_shape():
    G = build_structure_function(FieldModel((1,)), 4)
    shapes = sorted("".join(s.value for s in t.slots) for t in G.terms)
    assert shapes == sorted(["P+++", "-P++", "--P+", "---P"])


def test_structure_needs_three_points():
    with pytest.raises(InvalidArgumentError):
        build_structure_function(FieldModel((1,)), 2)


def test_spectral_support():
    model = FieldModel((1, 2))
    assert check_spectral_support(build_structure_function(model, 4))
    bad = MomentumDistribution(3, model, (Term(1, (0, 0, 0), "+-+"),))
    assert not check_spectral_support(bad)


def test_model_validation():
    with pytest.raises(ModelError):
        FieldModel((0,), d=2)
    FieldModel((0,), d=4)
    with pytest.raises(ModelError):
        FieldModel((1, 2), sigma=((1, -1), (1, 1)))
    with pytest.raises(ModelError):
        FieldModel((1,), sigma=((2,),))


def test_free_two_point():
    D = build_free_two_point(FieldModel((1,)))
    (t,) = D.terms
    assert t.atoms() == [OnShellDelta(-1, 0, 1)]
    assert t.conservation


def test_atoms_roundtrip():
    t = Term.from_atoms(3, [OnShellDelta(-1, 1, 1), Propagator(0, 2), OnShellDelta(1, 0, 3)])
    assert t.slots == (SlotKind.MINUS, SlotKind.PROP, SlotKind.PLUS)
    assert t.species == (1, 0, 0)
    with pytest.raises(InvalidArgumentError):
        Term.from_atoms(2, [Propagator(0, 1), OnShellDelta(1, 0, 1)], species=(0, 0))


def test_json_roundtrip():
    model = FieldModel((1, Fraction(5, 2)))
    M = minkowski_dot(1, 2, 4) ** 2
    D = multiply_polynomial(build_structure_function(model, 3), M).scale(ExactComplex(1, 2))
    assert MomentumDistribution.from_json(D.to_json()) == D


def test_merging_drops_zeros():
    model = FieldModel((1,))
    t = Term(1, (0, 0, 0), "-P+")
    D = MomentumDistribution(3, model, (t, t.with_coefficient(-1)))
    assert D.is_empty()


def test_weighted_coefficients():
    D = build_weighted_structure_function(3, [(1, (1, 1)), (2, 3)])
    assert D.model.masses == (1, 2)
    c = {t.species: t.coefficient for t in D.terms if t.slots[0] is SlotKind.PROP}
    assert c[(0, 0, 1)] == ExactComplex(1, 1) * ExactComplex(1, 1) * 3
    with pytest.raises(ModelError):
        build_weighted_structure_function(3, [(0, 1)])


def test_validate_multiplier():
    n, d = 3, 4
    sym = minkowski_dot(1, 2, d) + minkowski_dot(1, 3, d) + minkowski_dot(2, 3, d)
    assert validate_multiplier(sym, n, d) == {"symmetric": True, "lorentz_invariant": True}
    assert validate_multiplier(minkowski_dot(1, 2, d), n, d)["symmetric"] is False
    k10 = Polynomial.var("k1_0") + Polynomial.var("k2_0") + Polynomial.var("k3_0")
    assert validate_multiplier(k10, n, d)["lorentz_invariant"] is False

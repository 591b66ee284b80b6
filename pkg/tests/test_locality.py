from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from momloc import locality
from momloc.commutator import commutator_at
from momloc.energy_reduce import (apply_support_constraints, reduce_double_integral,
                                  reduce_free_two_point)
from momloc.errors import SingularPointError
from momloc.locality import (LocalityConfig, NonPolynomial, PolynomialOfDegree, QMinusParametrization,
                             Undecided, Zero, evaluate_reduced, verdict_from_dict)
from momloc.momdist import FieldModel, MomentumDistribution, Term, build_structure_function
from momloc.symkernel import parse_expr

ONE = FieldModel((1,))


@st.composite
def poly_along(draw):
    """A random polynomial of exact degree p in a 2d argument."""
    p = draw(st.integers(0, 6))
    coeffs = [draw(st.integers(-3, 3)) for _ in range(p)] + [draw(st.sampled_from([-2, -1, 1, 2]))]
    a, b = draw(st.integers(1, 3)), draw(st.integers(-3, -1))
    return p, coeffs, (a, b)


@given(poly_along())
def test_finite_difference_degree_detection(data):
    p, coeffs, (a, b) = data

    def f(pts):
        s = a * pts[:, 0] + b * pts[:, 1] + 0.5
        return sum(c * s ** k for k, c in enumerate(coeffs))

    assert locality.test_polynomiality_numeric(f, 2) == PolynomialOfDegree(p)


def test_cubic_example():
    v = locality.test_polynomiality_numeric(lambda q: q[:, 0] * q[:, 1] * q[:, 2], 3)
    assert v == PolynomialOfDegree(3)


def test_rational_bump_is_not_polynomial():
    v = locality.test_polynomiality_numeric(lambda q: 1 / (1 + (q ** 2).sum(1)), 3)
    assert isinstance(v, NonPolynomial)
    w = v.witness
    assert {"ray", "base_point", "step", "max_order_tested"} <= set(w)
    # brute-force check of the witness: the order-9 differences along the ray are not small
    t = np.arange(w["max_order_tested"] + 1) * w["step"]
    pts = np.asarray(w["base_point"])[None, :] + t[:, None] * np.asarray(w["ray"])[None, :]
    vals = 1 / (1 + (pts ** 2).sum(1))
    assert abs(np.diff(vals, w["max_order_tested"])[0]) > 1e-6


def test_zero_evaluator():
    assert locality.test_polynomiality_numeric(lambda q: np.zeros(len(q)), 3) == Zero()


def test_degree_stable_under_refinement():
    f = lambda q: (q[:, 0] - 2 * q[:, 1]) ** 4 + q[:, 2]
    base = locality.test_polynomiality_numeric(f, 3, LocalityConfig())
    finer = locality.test_polynomiality_numeric(f, 3, LocalityConfig(step=0.25, rays=32))
    assert base == finer == PolynomialOfDegree(4)


def test_all_singular_is_undecided():
    def f(q):
        raise SingularPointError("always", None)

    v = locality.test_polynomiality_numeric(f, 2, LocalityConfig(max_retries=5))
    assert isinstance(v, Undecided)


def test_verdict_roundtrip():
    for v in (Zero(), PolynomialOfDegree(2), NonPolynomial({"ray": [1.0]}), Undecided("x")):
        assert verdict_from_dict(v.to_dict()) == v


def test_q_minus_parametrization():
    p = QMinusParametrization.from_momenta([1.0, 2.0, 3.0], [3.0, 0.0, -1.0])
    assert np.allclose(p.k_j, [1, 2, 3]) and np.allclose(p.k_j1, [3, 0, -1])
    assert np.allclose(p.q_plus, [2, 1, 1]) and np.allclose(p.q_minus, [-1, 1, 2])


def test_symbolic_path():
    r = reduce_double_integral(commutator_at(build_structure_function(ONE, 3), 1), 1)
    assert locality.test_locality_symbolic(r) == Zero()
    z = apply_support_constraints(reduce_free_two_point(ONE), [("w1_0", "w2_0")])
    assert locality.test_locality_symbolic(z) == Zero()


def test_single_bracket_term_falls_to_numeric():
    D = MomentumDistribution(3, ONE, (Term(1, (0, 0, 0), "-P+"),))
    r = reduce_double_integral(D, 1)
    v = locality.test_locality_symbolic(r)
    assert isinstance(v, NonPolynomial)
    assert "context" in v.witness


def test_residual_groups_undecided():
    r = reduce_double_integral(build_structure_function(ONE, 3), 1)
    assert isinstance(locality.test_locality_symbolic(r), Undecided)


def _single_term_reduced():
    D = MomentumDistribution(3, ONE, (Term(1, (0, 0, 0), "-P+"),))
    return reduce_double_integral(D, 1)


def test_evaluate_single_term_value():
    # 1/(2 w1 ((w1 - a)^2 - w2^2)) at w1 = 2, w2 = 3, a = 1 gives -1/20;
    # the x <-> y mirrored pattern at (x, y, a) = (2, 3, 1) is 1/(2*3*(16 - 4)) = 1/72
    (g,) = _single_term_reduced().terms
    assert g.re.evaluate({"w1_0": 2, "w2_0": 3, "a": 1}) == Fraction(1, 2 * 2 * (1 - 9))
    assert parse_expr("1/(2*y*((y + a)**2 - x**2))").evaluate({"x": 2, "y": 3, "a": 1}) == Fraction(1, 72)


def test_evaluate_reduced_matches_exact():
    r = _single_term_reduced()
    (g,) = r.terms
    spect = np.array([0.3, -0.2, 0.5])
    qm = np.array([0.1, 0.4, -0.3])
    qp = -spect / 2
    k1, k2 = qp + qm, qp - qm
    w1, w2 = np.sqrt(k1 @ k1 + 1), np.sqrt(k2 @ k2 + 1)
    a = np.sqrt(spect @ spect + 1)  # spectator delta^+ energy
    expected = 1 / (2 * w1 * ((w1 - a) ** 2 - w2 ** 2))
    got = evaluate_reduced(r, {"q_minus": qm, "spectators": {3: spect}})
    assert got == pytest.approx(expected, rel=1e-12)


def test_evaluate_singular_point():
    r = _single_term_reduced()
    # q_+ = q_- = 0 gives w1 = w2 = 1; |k_3|^2 = 3 gives a = 2, so (w1 - a)^2 - w2^2 = 0
    bind = {"q_minus": np.zeros(3), "q_plus": np.zeros(3), "spectators": {3: [np.sqrt(3.0), 0, 0]}}
    with pytest.raises(SingularPointError):
        evaluate_reduced(r, bind)


@pytest.mark.parametrize("j", [1, 2])
def test_zero_soundness_random_bindings(j):
    # Zero is sound: summing the per-term reductions of the bracket numerically gives 0
    model = FieldModel((1, 2))
    C = commutator_at(build_structure_function(model, 3), j)
    assert reduce_double_integral(C, j).is_zero()
    parts = [reduce_double_integral(MomentumDistribution(3, model, (t,)), j) for t in C.terms]
    rng = np.random.default_rng(7)
    for _ in range(25):
        spect = {l: rng.uniform(-1, 1, 3) for l in (1, 2, 3) if l not in (j, j + 1)}
        bind = {"q_minus": rng.uniform(-1, 1, (4, 3)), "spectators": spect,
                "energies": {l: rng.uniform(2, 3) for l in spect}}
        totals = {}
        for part in parts:
            for g, v in evaluate_reduced(part, bind, groups=True):
                totals[g.key] = totals.get(g.key, 0) + v
        for v in totals.values():
            assert np.abs(v).max() <= 1e-9

"""One test per acceptance criterion; each records a pass/fail line for the summary."""
import itertools
import json
import time
from fractions import Fraction

from scipy.special import j0

import conftest
import test_commutator
import test_energy_reduce
import test_locality
import test_symkernel
from momloc.commutator import commutator_at, structure_commutator_closed_form
from momloc.energy_reduce import apply_support_constraints, reduce_double_integral, reduce_free_two_point
from momloc.jld import beyond_jld_demo, gaussian_spectral_fn, search_multiplier, smooth_phi1, sum_rule
from momloc.locality import Zero, test_locality_symbolic
from momloc.momdist import FieldModel, build_structure_function, build_weighted_structure_function
from momloc.numoracle import pauli_jordan_d2, time_zero_converges, time_zero_sequence
from momloc.symkernel import is_zero, parse_expr, substitute


def record(n, ok, detail):
    conftest.ACCEPTANCE[n] = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"
    print(conftest.ACCEPTANCE[n])
    assert ok, conftest.ACCEPTANCE[n]


def test_criterion_01_propagator_identity():
    t0 = time.perf_counter()
    half = parse_expr("1/(2*y*((y + a)**2 - x**2)) + 1/(2*x*((x - a)**2 - y**2))")
    expr = half - substitute(half, {"x": "y", "y": "x"})
    pt = {"x": 2, "y": 4, "a": 1}
    parts = [parse_expr(s).evaluate(pt) for s in ("1/(2*y*((y + a)**2 - x**2))", "1/(2*x*((x - a)**2 - y**2))",
                                                  "-1/(2*x*((x + a)**2 - y**2))", "-1/(2*y*((y - a)**2 - x**2))")]
    dt = time.perf_counter() - t0
    ok = (is_zero(expr) and parts == [Fraction(1, 168), Fraction(-1, 60), Fraction(1, 28), Fraction(-1, 40)]
          and sum(parts) == 0 and expr.evaluate(pt) == 0 and dt < 1)
    record(1, ok, f"is_zero={is_zero(expr)} terms={[str(p) for p in parts]} sum={sum(parts)} ({dt:.3f}s)")


def test_criterion_02_free_field():
    t0 = time.perf_counter()
    r = reduce_free_two_point(FieldModel((1,)))
    v = test_locality_symbolic(apply_support_constraints(r, [("w1_0", "w2_0")]))
    dt = time.perf_counter() - t0
    record(2, v == Zero() and dt < 1, f"before constraint {r.terms[0].re}; verdict {v.kind} ({dt:.3f}s)")


def test_criterion_03_structure_functions_are_local():
    t0 = time.perf_counter()
    bad = []
    for n, N in itertools.product((3, 4, 5), (1, 2)):
        model = FieldModel(tuple(range(1, N + 1)))
        G = build_structure_function(model, n)
        for j in range(1, n):
            r = reduce_double_integral(commutator_at(G, j), j)
            if r.terms or test_locality_symbolic(r) != Zero():
                bad.append((n, N, j))
    dt = time.perf_counter() - t0
    record(3, not bad and dt < 60, f"18 cases, failing {bad} ({dt:.1f}s)")


def test_criterion_04_closed_form():
    bad = []
    for n, N in itertools.product((3, 4), (1, 2)):
        model = FieldModel(tuple(range(1, N + 1)))
        G = build_structure_function(model, n)
        for j in range(1, n):
            if structure_commutator_closed_form(model, n, j) != commutator_at(G, j):
                bad.append((n, N, j))
    record(4, not bad, f"closed form equals commutator, mismatches {bad}")


def test_criterion_05_weighted():
    D = build_weighted_structure_function(3, [(1, (1, 2)), (2, (Fraction(-1, 2), 1)), (3, (3, 0))])
    verdicts = {j: test_locality_symbolic(reduce_double_integral(commutator_at(D, j), j)).kind for j in (1, 2)}
    record(5, all(v == "Zero" for v in verdicts.values()), f"masses 1,2,3 with complex weights: {verdicts}")


def test_criterion_06_beyond_jld(tmp_path):
    out = beyond_jld_demo()
    w = out["multiplier_witness"]
    path = tmp_path / "witness.json"
    path.write_text(json.dumps(w, sort_keys=True))
    again = json.loads(path.read_text())
    ok = (out["triple_derivative_degree3"] and w is not None and w["verdict"]["kind"] != "Zero"
          and w["validation"] == {"symmetric": True, "lorentz_invariant": True}
          and w["max_degree_in_one_momentum"] >= 4 and again == search_multiplier())
    record(6, ok, f"(a) {out['triple_derivative']} (b) pairs={w and w['multiplier_pairs']} "
                  f"verdict={w and w['verdict']}")


def test_criterion_07_jld_sum_rule():
    t0 = time.perf_counter()
    s = gaussian_spectral_fn(32, 32, phi1=smooth_phi1)
    res = sum_rule(s)
    dt = time.perf_counter() - t0
    ok = res["relative_error"] <= 1e-6 and res["relative_spread"] <= 1e-6 and dt < 30
    record(7, ok, f"analytic={res['analytic']:.15g} rel_err={res['relative_error']:.2e} "
                  f"spread={res['relative_spread']:.2e} ({dt:.1f}s)")


def test_criterion_08_pauli_jordan():
    pts = [(0, 2), (0.5, 1.5), (1, 2), (-1, 2), (0.2, 0.9), (0, 0.8), (3, 4), (-2, 3), (0.3, -1.2), (1.5, -2.5)]
    assert all(x * x - t * t >= 0.5 for t, x in pts)
    worst = max(abs(pauli_jordan_d2(1, p).value) for p in pts)
    v = pauli_jordan_d2(1, (2, 0))
    r = pauli_jordan_d2(1, (-2, 0))
    antisym = abs(v.value + r.value) <= v.error + r.error + 1e-12
    ok = worst <= 1e-6 and abs(v.value + j0(2) / 2) <= 1e-4 and antisym
    record(8, ok, f"max spacelike |D|={worst:.1e}; D(2,0)={v.value:.12f} vs {-j0(2) / 2:.12f}; "
                  f"antisymmetric={antisym}")


def test_criterion_09_time_zero():
    res = time_zero_sequence(1.0, (0.4, 0.2, 0.1, 0.05))
    ok = time_zero_converges(res)
    record(9, ok, "|C_eps|=" + ",".join(f"{abs(r.commutator):.1e}" for r in res)
           + " dist_to_limit=" + ",".join(f"{r.distance_to_limit:.2e}" for r in res))


def test_criterion_10_property_suites():
    suites = [test_symkernel.test_ring_axioms, test_symkernel.test_swap_is_involution,
              test_commutator.test_commutator_antisymmetry, test_commutator.test_exchange_is_involution,
              test_energy_reduce.test_reduction_linearity, test_locality.test_finite_difference_degree_detection]
    failed = []
    for fn in suites:
        try:
            fn()
        except Exception as exc:  # noqa: BLE001
            failed.append(f"{fn.__name__}: {type(exc).__name__}")
    record(10, not failed, f"{len(suites)} property suites, failures {failed}")

"""Exact momentum-space locality checks for Wightman-type distributions.

Pipeline: build a distribution (:mod:`momdist`), take the commutator at a slot
pair (:mod:`commutator`), integrate out the two energies (:mod:`energy_reduce`)
and decide polynomiality in ``q_-`` (:mod:`locality`).  :mod:`numoracle` and
:mod:`jld` hold independent numerical cross-checks.
"""

from .commutator import commutator_at, exchange, structure_commutator_closed_form
from .energy_reduce import (ReducedExpr, ReducedTerm, apply_support_constraints, reduce_double_integral,
                            reduce_free_two_point)
from .errors import MomlocError
from .locality import (LocalityConfig, NonPolynomial, PolynomialOfDegree, Undecided, Zero,
                       evaluate_reduced)
from .momdist import (FieldModel, MomentumDistribution, Term, build_free_two_point,
                      build_structure_function, build_weighted_structure_function, multiply_polynomial)
from .symkernel import Polynomial, RationalExpr, Symbol, is_zero, normalize, parse_expr, substitute, swap_pair

__all__ = [
    "commutator_at", "exchange", "structure_commutator_closed_form",
    "ReducedExpr", "ReducedTerm", "apply_support_constraints", "reduce_double_integral", "reduce_free_two_point",
    "MomlocError",
    "LocalityConfig", "NonPolynomial", "PolynomialOfDegree", "Undecided", "Zero", "evaluate_reduced",
    "FieldModel", "MomentumDistribution", "Term", "build_free_two_point", "build_structure_function",
    "build_weighted_structure_function", "multiply_polynomial",
    "Polynomial", "RationalExpr", "Symbol", "is_zero", "normalize", "parse_expr", "substitute", "swap_pair",
]

__version__ = "0.1.0"

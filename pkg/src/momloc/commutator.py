"""Commutator of a distribution at the slot pair ``(j, j+1)``.

``[ , ]_j D = D - sigma * (D with slots j and j+1 exchanged)``, where the
exchange moves momenta, species and singular factors together and ``sigma``
is looked up for the two species involved.  Equal terms cancel exactly.
"""

from __future__ import annotations

import itertools

from .errors import InvalidArgumentError
from .momdist import (FieldModel, MomentumDistribution, SlotKind, Term,
                      momentum_symbol)


def _check_j(n: int, j: int):
    if not 1 <= j <= n - 1:
        raise InvalidArgumentError(f"commutator slot j={j} outside 1..{n - 1}")


def swap_term(t: Term, j: int, d: int) -> Term:
    """Exchange slots ``j`` and ``j+1`` (1-based) of a single term."""
    i = j - 1
    slots = list(t.slots)
    species = list(t.species)
    slots[i], slots[i + 1] = slots[i + 1], slots[i]
    species[i], species[i + 1] = species[i + 1], species[i]
    poly = t.poly
    if poly.variables:
        mapping = {}
        for mu in range(d):
            a, b = momentum_symbol(j, mu).name, momentum_symbol(j + 1, mu).name
            mapping[a], mapping[b] = b, a
        poly = poly.rename(mapping)
    return Term(t.coefficient, tuple(species), tuple(slots), poly, t.conservation)


def exchange(dist: MomentumDistribution, j: int) -> MomentumDistribution:
    """The distribution with arguments ``j`` and ``j+1`` exchanged."""
    _check_j(dist.n, j)
    d = dist.model.d
    return MomentumDistribution(dist.n, dist.model, tuple(swap_term(t, j, d) for t in dist.terms))


def commutator_at(dist: MomentumDistribution, j: int) -> MomentumDistribution:
    _check_j(dist.n, j)
    sigma = dist.model.sigma
    d = dist.model.d
    out = list(dist.terms)
    for t in dist.terms:
        s = swap_term(t, j, d)
        sg = sigma[t.species[j - 1]][t.species[j]]
        out.append(s.with_coefficient(s.coefficient * (-sg)))
    return MomentumDistribution(dist.n, dist.model, tuple(out))


def structure_commutator_closed_form(model: FieldModel, n: int, j: int,
                                     reindexed: bool = False) -> MomentumDistribution:
    """The four-term bracket form of the structure-function commutator.

    Leading slots carry ``delta^-``, trailing slots ``delta^+``, both summed over
    species; slots ``j, j+1`` carry the bracket summed over ``(kappa_j,
    kappa_{j+1})``.  With ``reindexed=True`` the two subtracted terms use the
    relabelled species order obtained by swapping the summation indices.
    """
    if n < 3:
        raise InvalidArgumentError("structure functions are defined for n >= 3")
    _check_j(n, j)
    N = model.N
    M, Pl, P, = SlotKind.MINUS, SlotKind.PLUS, SlotKind.PROP
    terms = []
    lead = j - 1
    trail = n - j - 1
    for pre in itertools.product(range(N), repeat=lead):
        for post in itertools.product(range(N), repeat=trail):
            for kj, kj1 in itertools.product(range(N), repeat=2):
                sg = model.sigma[kj][kj1]

                def mk(c, s_j, sp_j, s_j1, sp_j1):
                    slots = (M,) * lead + (s_j, s_j1) + (Pl,) * trail
                    return Term(c, pre + (sp_j, sp_j1) + post, slots)

                # delta^-_{k_j}(k_j) / (k_{j+1}^2 - m_{k_{j+1}}^2)
                terms.append(mk(1, M, kj, P, kj1))
                # delta^+_{k_{j+1}}(k_{j+1}) / (k_j^2 - m_{k_j}^2)
                terms.append(mk(1, P, kj, Pl, kj1))
                if not reindexed:
                    # delta^-_{k_j}(k_{j+1}) / (k_j^2 - m_{k_{j+1}}^2)
                    terms.append(mk(-sg, P, kj1, M, kj))
                    # delta^+_{k_{j+1}}(k_j) / (k_{j+1}^2 - m_{k_j}^2)
                    terms.append(mk(-sg, Pl, kj1, P, kj))
                else:
                    terms.append(mk(-sg, P, kj, M, kj1))
                    terms.append(mk(-sg, Pl, kj, P, kj1))
    return MomentumDistribution(n, model, tuple(terms))

"""Exact resolution of the double energy integral over ``k_j^0`` and ``k_{j+1}^0``.

Per term the on-shell delta at slot ``j`` (or ``j+1``) fixes that energy to
``+-w`` with Jacobian ``1/(2w)``; the energy part of the conservation delta,
``delta(a + k_j^0 + k_{j+1}^0)`` with ``a`` the sum of the spectator energies,
then fixes the other one.  A propagator on the other slot becomes
``1/(E^2 - w'^2)`` after the rewrite ``|k|^2 -> w'^2 - m^2``; a second delta
is kept as a residual ``delta(a +- w +- w')`` with weight ``1/(4 w w')``.

``w{l}_{kappa}`` stands for ``sqrt(|k_l|^2 + m_kappa^2)`` but is an opaque
symbol here: the square-root relation is only used at numeric evaluation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .errors import (PoleError, SingularTermError, UnjustifiedConstraintError,
                     UnsupportedTermError)
from .momdist import (FieldModel, MomentumDistribution, SlotKind, Term,
                      build_free_two_point, momentum_symbol, omega_symbol)
from .commutator import commutator_at
from .symkernel import Polynomial, RationalExpr, Symbol, substitute

A = Symbol("a", "external-energy-sum")
_ZERO = RationalExpr.const(0)


@dataclass(frozen=True, order=True)
class ResidualDelta:
    """``delta(a + s1*w1 + s2*w2)`` stored as ``((s1, w1), (s2, w2))``."""

    parts: tuple

    def __str__(self):
        s = "a"
        for sign, name in self.parts:
            s += f" {'+' if sign > 0 else '-'} {name}"
        return f"delta({s})"


@dataclass(frozen=True, order=True)
class Prefactor:
    """Spectator factors left after the integration, plus spatial conservation."""

    spectators: tuple  # ((slot, kind, species), ...)
    spatial_conservation: bool = True

    def __str__(self):
        parts = []
        for slot, kind, sp in self.spectators:
            if kind == "+" or kind == "-":
                parts.append(f"delta{kind}[m{sp}](k{slot})")
            elif kind == "P":
                parts.append(f"PV[m{sp}](k{slot})")
        if self.spatial_conservation:
            parts.append("delta(sum vec k)")
        return " * ".join(parts) if parts else "1"


@dataclass
class ReducedTerm:
    prefactor: Prefactor
    residual: ResidualDelta | None
    re: RationalExpr
    im: RationalExpr
    singular: tuple = ()

    @property
    def key(self):
        return (self.prefactor, self.residual)

    def is_zero(self) -> bool:
        return self.re.is_zero() and self.im.is_zero()

    def to_dict(self):
        return {"prefactor": str(self.prefactor),
                "spectators": [list(s) for s in self.prefactor.spectators],
                "residual_energy_delta": None if self.residual is None else str(self.residual),
                "coefficient_re": str(self.re), "coefficient_im": str(self.im),
                "singular_set": [str(p) for p in self.singular]}


@dataclass
class ReducedExpr:
    n: int
    j: int
    model: FieldModel
    terms: list = field(default_factory=list)
    cancelled: list = field(default_factory=list)

    def groups(self) -> dict:
        return {t.key: t for t in self.terms}

    def is_zero(self) -> bool:
        return all(t.is_zero() for t in self.terms)

    def residual_groups(self) -> list:
        return [t for t in self.terms if t.residual is not None]

    def propagator_groups(self) -> list:
        return [t for t in self.terms if t.residual is None]

    def to_dict(self):
        return {"n": self.n, "j": self.j, "model": self.model.to_dict(),
                "groups": [t.to_dict() for t in self.terms],
                "cancelled_groups": [{"prefactor": str(p), "residual_energy_delta": None if r is None else str(r)}
                                     for p, r in self.cancelled]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    def __str__(self):
        if not self.terms:
            return "0"
        lines = []
        for t in self.terms:
            res = "" if t.residual is None else f" * {t.residual}"
            c = str(t.re) if t.im.is_zero() else f"({t.re}) + i*({t.im})"
            lines.append(f"[{t.prefactor}]{res} * {c}")
        return "\n".join(lines)


def _propagator_factor(slot: int, species: int, energy: RationalExpr, model: FieldModel) -> RationalExpr:
    k0 = momentum_symbol(slot, 0)
    k2 = Symbol(f"K2_{slot}", "formal")
    m = model.mass_symbol(species)
    w = omega_symbol(slot, species)
    prop = RationalExpr.const(1) / (RationalExpr.symbol(k0) ** 2 - RationalExpr.symbol(k2)
                                    - RationalExpr.symbol(m) ** 2)
    rewrite = RationalExpr.symbol(w) ** 2 - RationalExpr.symbol(m) ** 2
    try:
        return substitute(prop, {k0: energy, k2: rewrite})
    except PoleError as exc:
        raise SingularTermError(
            f"on-shell substitution makes the propagator at slot {slot} vanish identically",
            exc.denominator) from None


def reduce_term(t: Term, j: int, model: FieldModel):
    """Reduce one term; returns ``(prefactor, residual, expr, singular_denominators)``."""
    i = j - 1
    kj, kj1 = t.slots[i], t.slots[i + 1]
    sj, sj1 = t.species[i], t.species[i + 1]
    deltas = (SlotKind.PLUS, SlotKind.MINUS)
    n = t.n
    spect = tuple((l, t.slots[l - 1].value, t.species[l - 1]) for l in range(1, n + 1) if l not in (j, j + 1))
    a = RationalExpr.symbol(A) if spect else _ZERO
    wj = RationalExpr.symbol(omega_symbol(j, sj))
    wj1 = RationalExpr.symbol(omega_symbol(j + 1, sj1))
    sign = {SlotKind.PLUS: 1, SlotKind.MINUS: -1}
    residual = None
    singular: list = []

    if kj in deltas and kj1 in deltas:
        ej, ej1 = wj * sign[kj], wj1 * sign[kj1]
        expr = RationalExpr.const(Fraction(1, 4)) / (wj * wj1)
        if t.conservation:
            residual = ResidualDelta(tuple(sorted(((sign[kj], omega_symbol(j, sj).name),
                                                   (sign[kj1], omega_symbol(j + 1, sj1).name)),
                                                  key=lambda p: p[1])))
    elif kj in deltas or kj1 in deltas:
        if not t.conservation:
            raise UnsupportedTermError("a single on-shell delta needs the conservation delta "
                                       "to resolve the second energy integral")
        if kj in deltas:
            ej = wj * sign[kj]
            ej1 = -a - ej
            expr = RationalExpr.const(Fraction(1, 2)) / wj
            other, other_slot, other_sp, other_e = kj1, j + 1, sj1, ej1
        else:
            ej1 = wj1 * sign[kj1]
            ej = -a - ej1
            expr = RationalExpr.const(Fraction(1, 2)) / wj1
            other, other_slot, other_sp, other_e = kj, j, sj, ej
        if other is SlotKind.PROP:
            pf = _propagator_factor(other_slot, other_sp, other_e, model)
            singular.append(pf.den)
            expr = expr * pf
    else:
        raise UnsupportedTermError(
            f"slots {j}, {j + 1} carry ({kj.value}, {kj1.value}): no on-shell delta to resolve "
            "the energy integrals")

    if t.poly.variables:
        e_sub = {momentum_symbol(j, 0): ej, momentum_symbol(j + 1, 0): ej1}
        expr = expr * substitute(RationalExpr.coerce(t.poly), e_sub)
    elif t.poly != Polynomial.const(1):
        expr = expr * t.poly.constant_value()
    pref = Prefactor(spect, t.conservation)
    return pref, residual, expr, tuple(singular)


def _finalize(n, j, model, acc: dict, singular: dict) -> ReducedExpr:
    terms = []
    cancelled = []
    for key in sorted(acc, key=lambda k: (str(k[0]), str(k[1]))):
        buckets = acc[key]
        re = _ZERO
        im = _ZERO
        # buckets with equal symbol content are summed first: the cancellations
        # happen inside them, so the cross-bucket sums stay small
        for sig in sorted(buckets, key=lambda s: sorted(s)):
            bre, bim = buckets[sig]
            re = re + bre
            im = im + bim
        rt = ReducedTerm(key[0], key[1], re, im, tuple(sorted(singular.get(key, ()), key=str)))
        if rt.is_zero():
            cancelled.append(key)
        else:
            terms.append(rt)
    return ReducedExpr(n, j, model, terms, cancelled)


def reduce_double_integral(dist: MomentumDistribution, j: int) -> ReducedExpr:
    """Integrate over ``k_j^0`` and ``k_{j+1}^0`` term by term and group exactly."""
    from .commutator import _check_j

    _check_j(dist.n, j)
    acc: dict = {}
    singular: dict = {}
    for t in dist.terms:
        pref, residual, expr, sing = reduce_term(t, j, dist.model)
        key = (pref, residual)
        sig = expr.variables
        buckets = acc.setdefault(key, {})
        bre, bim = buckets.get(sig, (_ZERO, _ZERO))
        c = t.coefficient
        if c.re:
            bre = bre + expr * c.re
        if c.im:
            bim = bim + expr * c.im
        buckets[sig] = (bre, bim)
        if sing:
            singular.setdefault(key, set()).update(sing)
    return _finalize(dist.n, j, dist.model, acc, singular)


def reduce_free_two_point(model: FieldModel, species: int = 0) -> ReducedExpr:
    return reduce_double_integral(commutator_at(build_free_two_point(model, species), 1), 1)


def apply_support_constraints(r: ReducedExpr, constraints: Iterable) -> ReducedExpr:
    """Identify energy symbols that coincide on the support of the prefactor.

    Only the two-point case is accepted: there ``delta(k1 + k2)`` forces
    ``|k1| = |k2|``, so ``w1_a = w2_b`` holds whenever the two masses agree.
    """
    constraints = list(constraints)
    if not constraints:
        return r
    bindings = {}
    for s1, s2 in constraints:
        n1, n2 = str(s1), str(s2)
        ok = r.n == 2 and all(t.prefactor.spatial_conservation for t in r.terms)
        try:
            (l1, k1), (l2, k2) = [tuple(int(x) for x in s[1:].split("_")) for s in (n1, n2)]
        except ValueError:
            ok = False
        else:
            ok = ok and n1.startswith("w") and n2.startswith("w") and {l1, l2} == {1, 2} \
                and r.model.masses[k1] == r.model.masses[k2]
        if not ok:
            raise UnjustifiedConstraintError(
                f"identification {n1} = {n2} is not forced by the prefactor deltas")
        bindings[n2] = RationalExpr.symbol(n1)
    acc: dict = {}
    singular: dict = {}
    for t in r.terms:
        re = substitute(t.re, bindings)
        im = substitute(t.im, bindings)
        key = (t.prefactor, t.residual)
        b = acc.setdefault(key, {})
        ore, oim = b.get(frozenset(), (_ZERO, _ZERO))
        b[frozenset()] = (ore + re, oim + im)
        singular.setdefault(key, set()).update(t.singular)
    out = _finalize(r.n, r.j, r.model, acc, singular)
    out.cancelled = list(r.cancelled) + out.cancelled
    return out

"""Momentum-space distributions built from mass-shell deltas and propagators.

A distribution is a finite sum of :class:`Term` objects.  Every slot ``l``
(1-based, ``1..n``) of a term carries at most one singular factor:

``"-"`` / ``"+"``
    the on-shell delta ``theta(+-k_l^0) delta(k_l^2 - m^2)``,
``"P"``
    the principal-value propagator ``1/(k_l^2 - m^2)``,
``"."``
    nothing.

The mass of slot ``l`` is ``model.masses[species[l-1]]``; species indices are
0-based positions in ``model.masses``.  A term may also carry one polynomial
factor in the momentum components ``k{l}_{mu}`` and the total
momentum-conservation delta.  Species sums are always expanded into explicit
terms so that cancellations are structural.
"""

from __future__ import annotations

import itertools
import json
import logging
import random
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import InvalidArgumentError, ModelError
from .symkernel import Polynomial, Symbol

log = logging.getLogger(__name__)


class SlotKind(str, Enum):
    MINUS = "-"
    PLUS = "+"
    PROP = "P"
    BARE = "."


def _frac(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)


@dataclass(frozen=True)
class ExactComplex:
    """Gaussian rational ``re + i*im``."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    @classmethod
    def coerce(cls, x) -> "ExactComplex":
        if isinstance(x, ExactComplex):
            return x
        if isinstance(x, complex):
            return cls(_frac(x.real), _frac(x.imag))
        if isinstance(x, (tuple, list)):
            re, im = x
            return cls(_frac(re), _frac(im))
        return cls(_frac(x), Fraction(0))

    def __add__(self, o):
        o = ExactComplex.coerce(o)
        return ExactComplex(self.re + o.re, self.im + o.im)

    def __neg__(self):
        return ExactComplex(-self.re, -self.im)

    def __sub__(self, o):
        return self + (-ExactComplex.coerce(o))

    def __mul__(self, o):
        o = ExactComplex.coerce(o)
        return ExactComplex(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def to_json(self):
        return [str(self.re), str(self.im)]


@dataclass(frozen=True)
class FieldModel:
    """Species masses, spacetime dimension and the statistics matrix ``sigma``."""

    masses: tuple
    d: int = 4
    sigma: tuple | None = None

    def __post_init__(self):
        masses = tuple(_frac(m) for m in self.masses)
        object.__setattr__(self, "masses", masses)
        N = len(masses)
        if N < 1:
            raise ModelError("a field model needs at least one species")
        if self.d < 2:
            raise ModelError("spacetime dimension must be >= 2")
        for m in masses:
            if m < 0:
                raise ModelError("masses must be non-negative")
            if self.d in (2, 3) and m == 0:
                raise ModelError("masses must be strictly positive for d = 2, 3")
        sigma = self.sigma
        if sigma is None:
            sigma = tuple(tuple(1 for _ in range(N)) for _ in range(N))
        sigma = tuple(tuple(int(s) for s in row) for row in sigma)
        if len(sigma) != N or any(len(row) != N for row in sigma):
            raise ModelError("sigma must be an N x N matrix")
        for a in range(N):
            for b in range(N):
                if sigma[a][b] not in (1, -1):
                    raise ModelError("sigma entries must be +1 or -1")
                if sigma[a][b] != sigma[b][a]:
                    raise ModelError("sigma must be symmetric")
        object.__setattr__(self, "sigma", sigma)

    @property
    def N(self) -> int:
        return len(self.masses)

    def mass_symbol(self, species: int) -> Symbol:
        return Symbol(f"m{species}", "mass")

    def to_dict(self):
        return {"masses": [str(m) for m in self.masses], "d": self.d,
                "sigma": [list(r) for r in self.sigma]}

    @classmethod
    def from_dict(cls, d):
        return cls(masses=tuple(Fraction(m) for m in d["masses"]), d=int(d.get("d", 4)),
                   sigma=d.get("sigma"))


# -- symbols shared with the reduction stage ---------------------------------

def momentum_symbol(slot: int, mu: int) -> Symbol:
    return Symbol(f"k{slot}_{mu}", "momentum-component")


def omega_symbol(slot: int, species: int) -> Symbol:
    return Symbol(f"w{slot}_{species}", "energy")


def minkowski_dot(l1: int, l2: int, d: int) -> Polynomial:
    """``k_l1 . k_l2`` with signature (+, -, ..., -) in component symbols."""
    out = Polynomial.var(momentum_symbol(l1, 0)) * Polynomial.var(momentum_symbol(l2, 0))
    for mu in range(1, d):
        out = out - Polynomial.var(momentum_symbol(l1, mu)) * Polynomial.var(momentum_symbol(l2, mu))
    return out


# -- atoms and terms ----------------------------------------------------------

@dataclass(frozen=True)
class OnShellDelta:
    sign: int
    species: int
    slot: int


@dataclass(frozen=True)
class Propagator:
    species: int
    slot: int


@dataclass(frozen=True)
class PolyFactor:
    poly: Polynomial


_ONE = Polynomial.const(1)


@dataclass(frozen=True)
class Term:
    coefficient: ExactComplex
    species: tuple
    slots: tuple
    poly: Polynomial = _ONE
    conservation: bool = True

    def __post_init__(self):
        object.__setattr__(self, "coefficient", ExactComplex.coerce(self.coefficient))
        object.__setattr__(self, "species", tuple(int(s) for s in self.species))
        object.__setattr__(self, "slots", tuple(SlotKind(s) for s in self.slots))
        if len(self.species) != len(self.slots):
            raise InvalidArgumentError("species and slot lists must have the same length")

    @property
    def n(self) -> int:
        return len(self.slots)

    @property
    def key(self):
        return (self.slots, self.species, self.poly, self.conservation)

    def sort_key(self):
        return (tuple(s.value for s in self.slots), self.species, str(self.poly), self.conservation)

    def atoms(self) -> list:
        out: list = []
        for l, (kind, sp) in enumerate(zip(self.slots, self.species), start=1):
            if kind is SlotKind.PROP:
                out.append(Propagator(sp, l))
            elif kind in (SlotKind.PLUS, SlotKind.MINUS):
                out.append(OnShellDelta(1 if kind is SlotKind.PLUS else -1, sp, l))
        if self.poly != _ONE:
            out.append(PolyFactor(self.poly))
        return out

    @classmethod
    def from_atoms(cls, n: int, atoms: Iterable, species: Sequence[int] | None = None,
                   coefficient=1, conservation: bool = True) -> "Term":
        slots = [SlotKind.BARE] * n
        sp = list(species) if species is not None else [None] * n
        poly = _ONE
        for a in atoms:
            if isinstance(a, PolyFactor):
                poly = poly * a.poly
                continue
            if not 1 <= a.slot <= n:
                raise InvalidArgumentError(f"slot {a.slot} outside 1..{n}")
            if slots[a.slot - 1] is not SlotKind.BARE:
                raise InvalidArgumentError(f"slot {a.slot} already carries a singular factor")
            if isinstance(a, Propagator):
                slots[a.slot - 1] = SlotKind.PROP
            else:
                slots[a.slot - 1] = SlotKind.PLUS if a.sign > 0 else SlotKind.MINUS
            if sp[a.slot - 1] is not None and sp[a.slot - 1] != a.species:
                raise InvalidArgumentError(f"conflicting species at slot {a.slot}")
            sp[a.slot - 1] = a.species
        if any(s is None for s in sp):
            raise InvalidArgumentError("species must be given for slots without atoms")
        return cls(ExactComplex.coerce(coefficient), tuple(sp), tuple(slots), poly, conservation)

    def with_coefficient(self, c) -> "Term":
        return Term(c, self.species, self.slots, self.poly, self.conservation)

    def to_dict(self):
        atoms = []
        for a in self.atoms():
            if isinstance(a, OnShellDelta):
                atoms.append({"type": "delta", "sign": "+" if a.sign > 0 else "-",
                              "species": a.species, "slot": a.slot})
            elif isinstance(a, Propagator):
                atoms.append({"type": "propagator", "species": a.species, "slot": a.slot})
        d = {"coefficient": self.coefficient.to_json(), "species": list(self.species),
             "atoms": atoms, "conservation": self.conservation}
        if self.poly != _ONE:
            d["poly"] = str(self.poly)
        return d

    @classmethod
    def from_dict(cls, n: int, d) -> "Term":
        from .symkernel import parse_expr

        atoms: list = []
        for a in d["atoms"]:
            if a["type"] == "delta":
                atoms.append(OnShellDelta(1 if a["sign"] == "+" else -1, int(a["species"]), int(a["slot"])))
            elif a["type"] == "propagator":
                atoms.append(Propagator(int(a["species"]), int(a["slot"])))
            else:
                raise InvalidArgumentError(f"unknown atom type {a['type']!r}")
        if "poly" in d:
            p = parse_expr(d["poly"])
            if not p.is_polynomial():
                raise InvalidArgumentError("polynomial factor must be a polynomial")
            atoms.append(PolyFactor(p.num.scale(1 / p.den.constant_value())))
        re, im = d.get("coefficient", ["1", "0"])
        return cls.from_atoms(n, atoms, species=d["species"], coefficient=(Fraction(re), Fraction(im)),
                              conservation=bool(d.get("conservation", True)))


def canonical_terms(terms: Iterable[Term]) -> tuple:
    merged: dict = {}
    for t in terms:
        k = t.key
        if k in merged:
            merged[k] = merged[k].with_coefficient(merged[k].coefficient + t.coefficient)
        else:
            merged[k] = t
    return tuple(sorted((t for t in merged.values() if t.coefficient), key=Term.sort_key))


@dataclass(frozen=True)
class MomentumDistribution:
    n: int
    model: FieldModel
    terms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        for t in self.terms:
            if t.n != self.n:
                raise InvalidArgumentError(f"term with {t.n} slots in a {self.n}-point distribution")
            if any(not 0 <= s < self.model.N for s in t.species):
                raise InvalidArgumentError("species index outside the field model")
        object.__setattr__(self, "terms", canonical_terms(self.terms))

    def __len__(self):
        return len(self.terms)

    def is_empty(self) -> bool:
        return not self.terms

    def __add__(self, other: "MomentumDistribution") -> "MomentumDistribution":
        if other.n != self.n or other.model != self.model:
            raise InvalidArgumentError("cannot add distributions over different models")
        return MomentumDistribution(self.n, self.model, self.terms + other.terms)

    def scale(self, c) -> "MomentumDistribution":
        c = ExactComplex.coerce(c)
        return MomentumDistribution(self.n, self.model, tuple(t.with_coefficient(t.coefficient * c)
                                                              for t in self.terms))

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def to_dict(self):
        return {"n": self.n, "model": self.model.to_dict(), "terms": [t.to_dict() for t in self.terms]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    @classmethod
    def from_dict(cls, d) -> "MomentumDistribution":
        n = int(d["n"])
        return cls(n, FieldModel.from_dict(d["model"]), tuple(Term.from_dict(n, t) for t in d["terms"]))

    @classmethod
    def from_json(cls, s: str) -> "MomentumDistribution":
        return cls.from_dict(json.loads(s))


# -- builders ------------------------------------------------------------------

def build_free_two_point(model: FieldModel, species: int = 0) -> MomentumDistribution:
    """``delta^-_m(k1) delta(k1 + k2)``."""
    if not 0 <= species < model.N:
        raise InvalidArgumentError(f"species {species} outside 0..{model.N - 1}")
    t = Term(1, (species, species), (SlotKind.MINUS, SlotKind.BARE))
    return MomentumDistribution(2, model, (t,))


def _structure_terms(n: int, N: int, coefficient=lambda kappa: 1):
    for kappa in itertools.product(range(N), repeat=n):
        c = coefficient(kappa)
        for j in range(1, n + 1):
            slots = [SlotKind.MINUS] * (j - 1) + [SlotKind.PROP] + [SlotKind.PLUS] * (n - j)
            yield Term(c, kappa, tuple(slots))


def build_structure_function(model: FieldModel, n: int) -> MomentumDistribution:
    """Sum over species vectors and propagator positions of the n-point structure function."""
    if n < 3:
        raise InvalidArgumentError("structure functions are defined for n >= 3")
    return MomentumDistribution(n, model, tuple(_structure_terms(n, model.N)))


def build_weighted_structure_function(n: int, weights, d: int = 4) -> MomentumDistribution:
    """Riemann-sum version: one species per mass grid point, weight per factor.

    ``weights`` is a list of ``(mass, weight)`` pairs; the same list is used for
    every slot, so a term with grid indices ``kappa`` gets the coefficient
    ``prod_l weight[kappa_l]``.
    """
    weights = list(weights)
    if not weights:
        raise InvalidArgumentError("empty weight list")
    if n < 3:
        raise InvalidArgumentError("structure functions are defined for n >= 3")
    masses = tuple(_frac(m) for m, _ in weights)
    if any(m <= 0 for m in masses):
        raise ModelError("weighted structure functions need positive masses")
    lam = [ExactComplex.coerce(w) for _, w in weights]
    model = FieldModel(masses, d)

    def coefficient(kappa):
        c = ExactComplex(Fraction(1))
        for k in kappa:
            c = c * lam[k]
        return c

    return MomentumDistribution(n, model, tuple(_structure_terms(n, model.N, coefficient)))


def multiply_polynomial(dist: MomentumDistribution, M: Polynomial) -> MomentumDistribution:
    if M == _ONE:
        return dist
    return MomentumDistribution(dist.n, dist.model, tuple(
        Term(t.coefficient, t.species, t.slots, t.poly * M, t.conservation) for t in dist.terms))


def check_spectral_support(dist: MomentumDistribution) -> bool:
    """Partial sums ``sum_{l>=r} k_l`` in the closed forward cone, ``r = 2..n``.

    A partial sum is certified if all its slots are ``delta^+`` (sum of forward
    vectors) or, with momentum conservation, all earlier slots are ``delta^-``.
    """
    for t in dist.terms:
        if not t.conservation:
            log.warning("term without momentum conservation: only forward-cone argument applies")
        for r in range(2, dist.n + 1):
            forward = all(s is SlotKind.PLUS for s in t.slots[r - 1:])
            backward = t.conservation and all(s is SlotKind.MINUS for s in t.slots[:r - 1])
            if not (forward or backward):
                return False
    return True


# -- multiplier validation -----------------------------------------------------

def _permute_blocks(values: dict, perm: Sequence[int], n: int, d: int) -> dict:
    out = dict(values)
    for l in range(1, n + 1):
        src = perm[l - 1]
        for mu in range(d):
            out[momentum_symbol(l, mu).name] = values[momentum_symbol(src, mu).name]
    return out


def _rational_transforms(d: int, rng: random.Random):
    """Rational boosts along each axis and rotations in each spatial plane."""
    mats = []
    for _ in range(2):
        for axis in range(1, d):
            t = Fraction(rng.randint(1, 5), rng.randint(7, 13))
            g = (1 + t * t) / (1 - t * t)
            gb = 2 * t / (1 - t * t)
            L = [[Fraction(int(i == j)) for j in range(d)] for i in range(d)]
            L[0][0], L[0][axis], L[axis][0], L[axis][axis] = g, gb, gb, g
            mats.append(L)
        for i in range(1, d):
            for j in range(i + 1, d):
                t = Fraction(rng.randint(1, 9), rng.randint(2, 11))
                c = (1 - t * t) / (1 + t * t)
                s = 2 * t / (1 + t * t)
                R = [[Fraction(int(a == b)) for b in range(d)] for a in range(d)]
                R[i][i], R[i][j], R[j][i], R[j][j] = c, -s, s, c
                mats.append(R)
    return mats


def validate_multiplier(M: Polynomial, n: int, d: int, trials: int = 3, seed: int = 0) -> dict:
    """Exact sampled check of block-permutation symmetry and Lorentz invariance."""
    rng = random.Random(seed)
    symmetric = True
    lorentz = True
    for _ in range(trials):
        vals = {momentum_symbol(l, mu).name: Fraction(rng.randint(-9, 9), rng.randint(1, 5))
                for l in range(1, n + 1) for mu in range(d)}
        ref = M.evaluate(vals)
        for l in range(1, n):
            perm = list(range(1, n + 1))
            perm[l - 1], perm[l] = perm[l], perm[l - 1]
            if M.evaluate(_permute_blocks(vals, perm, n, d)) != ref:
                symmetric = False
        for L in _rational_transforms(d, rng):
            moved = {}
            for l in range(1, n + 1):
                k = [vals[momentum_symbol(l, mu).name] for mu in range(d)]
                for mu in range(d):
                    moved[momentum_symbol(l, mu).name] = sum(L[mu][nu] * k[nu] for nu in range(d))
            if M.evaluate(moved) != ref:
                lorentz = False
    return {"symmetric": symmetric, "lorentz_invariant": lorentz}

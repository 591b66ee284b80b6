"""Exact multivariate polynomials and rational functions over Q.

Monomials are stored sparsely as name-sorted tuples of ``(symbol, exponent)``
pairs, coefficients as :class:`fractions.Fraction`.  A :class:`RationalExpr`
is always kept in canonical form: numerator and denominator coprime, the
denominator monic with respect to the lexicographic order on symbol names.
Two canonical expressions are mathematically equal iff they are structurally
equal, which is what the locality pipeline relies on for exact cancellation.

No floating point is used on the exact paths.  ``evaluate_array`` is the one
numeric entry point and exists for the sampling layer in :mod:`momloc.locality`.
"""

from __future__ import annotations

import ast
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd as igcd
from typing import Iterable, Mapping, Union

import numpy as np

from .errors import InvalidArgumentError, MalformedExpressionError, PoleError

__all__ = [
    "Symbol",
    "Polynomial",
    "RationalExpr",
    "poly_gcd",
    "normalize",
    "substitute",
    "swap_pair",
    "is_zero",
    "degree_in",
    "parse_expr",
]

SYMBOL_KINDS = ("energy", "external-energy-sum", "mass", "momentum-component", "formal")


@dataclass(frozen=True, order=True)
class Symbol:
    name: str
    kind: str = "formal"

    def __post_init__(self):
        if not self.name.isidentifier():
            raise InvalidArgumentError(f"symbol name {self.name!r} is not an identifier")
        if self.kind not in SYMBOL_KINDS:
            raise InvalidArgumentError(f"unknown symbol kind {self.kind!r}")

    def __str__(self):
        return self.name


def _name(v) -> str:
    return v.name if isinstance(v, Symbol) else v


Monomial = tuple  # tuple[tuple[str, int], ...]
ONE_MONO: Monomial = ()


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for v, e in b:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items()))


def _mono_div(a: Monomial, b: Monomial):
    """a / b as a monomial, or None if b does not divide a."""
    d = dict(a)
    for v, e in b:
        r = d.get(v, 0) - e
        if r < 0:
            return None
        if r:
            d[v] = r
        else:
            del d[v]
    return tuple(sorted(d.items()))


def _lex_key(vars_: tuple):
    def key(m):
        d = dict(m)
        return tuple(d.get(v, 0) for v in vars_)

    return key


def _fmt_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    if isinstance(c, float):
        raise MalformedExpressionError("floating point coefficients are not allowed in exact expressions")
    return Fraction(c)


class Polynomial:
    """Sparse multivariate polynomial with exact rational coefficients."""

    __slots__ = ("_terms", "_hash", "_vars")

    def __init__(self, terms: Mapping | None = None):
        clean = {}
        if terms:
            for m, c in terms.items():
                c = _as_fraction(c)
                if c:
                    m = tuple(sorted((v, e) for v, e in m if e))
                    clean[m] = clean.get(m, 0) + c
            clean = {m: c for m, c in clean.items() if c}
        self._terms = clean
        self._hash = None
        self._vars = None

    @classmethod
    def _raw(cls, terms: dict) -> "Polynomial":
        p = cls.__new__(cls)
        p._terms = terms
        p._hash = None
        p._vars = None
        return p

    @classmethod
    def const(cls, c) -> "Polynomial":
        c = _as_fraction(c)
        return cls._raw({ONE_MONO: c} if c else {})

    @classmethod
    def var(cls, v, power: int = 1) -> "Polynomial":
        if power < 0:
            raise InvalidArgumentError("negative power")
        if power == 0:
            return cls.const(1)
        return cls._raw({((_name(v), power),): Fraction(1)})

    # -- inspection -------------------------------------------------------
    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and ONE_MONO in self._terms)

    def constant_value(self) -> Fraction:
        return self._terms.get(ONE_MONO, Fraction(0))

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    @property
    def variables(self) -> frozenset:
        if self._vars is None:
            self._vars = frozenset(v for m in self._terms for v, _ in m)
        return self._vars

    def degree(self, v) -> int:
        v = _name(v)
        if not self._terms:
            return -1
        return max(dict(m).get(v, 0) for m in self._terms)

    def total_degree(self, vars_: Iterable | None = None) -> int:
        if not self._terms:
            return -1
        if vars_ is None:
            return max(sum(e for _, e in m) for m in self._terms)
        names = {_name(v) for v in vars_}
        return max(sum(e for v, e in m if v in names) for m in self._terms)

    def leading_monomial(self) -> Monomial:
        if not self._terms:
            raise MalformedExpressionError("zero polynomial has no leading term")
        return max(self._terms, key=_lex_key(tuple(sorted(self.variables))))

    def leading_coefficient(self) -> Fraction:
        return self._terms[self.leading_monomial()]

    def monic(self) -> "Polynomial":
        if not self._terms:
            return self
        lc = self.leading_coefficient()
        return self if lc == 1 else self.scale(1 / lc)

    def coeffs_in(self, v) -> dict:
        """Coefficients with respect to ``v``, as polynomials in the other symbols."""
        v = _name(v)
        out: dict[int, dict] = {}
        for m, c in self._terms.items():
            e = 0
            rest = m
            for i, (w, k) in enumerate(m):
                if w == v:
                    e = k
                    rest = m[:i] + m[i + 1:]
                    break
            out.setdefault(e, {})[rest] = c
        return {e: Polynomial._raw(t) for e, t in out.items()}

    @classmethod
    def from_coeffs_in(cls, v, coeffs: Mapping) -> "Polynomial":
        v = _name(v)
        terms = {}
        for e, p in coeffs.items():
            for m, c in p._terms.items():
                mm = tuple(sorted(m + ((v, e),))) if e else m
                terms[mm] = c
        return cls._raw(terms)

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Polynomial):
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if not other._terms:
            return self
        if not self._terms:
            return other
        t = dict(self._terms)
        for m, c in other._terms.items():
            s = t.get(m, 0) + c
            if s:
                t[m] = s
            else:
                t.pop(m, None)
        return Polynomial._raw(t)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def scale(self, c) -> "Polynomial":
        c = _as_fraction(c)
        if not c:
            return Polynomial._raw({})
        return Polynomial._raw({m: v * c for m, v in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        if not self._terms or not other._terms:
            return Polynomial._raw({})
        if len(other._terms) < len(self._terms):
            a, b = other._terms, self._terms
        else:
            a, b = self._terms, other._terms
        t: dict = {}
        for m1, c1 in a.items():
            for m2, c2 in b.items():
                m = _mono_mul(m1, m2)
                t[m] = t.get(m, 0) + c1 * c2
        return Polynomial._raw({m: c for m, c in t.items() if c})

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise InvalidArgumentError("polynomial powers must be non-negative integers")
        result = Polynomial.const(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def exact_div(self, other: "Polynomial") -> "Polynomial":
        """Quotient of an exact division; raises if ``other`` does not divide."""
        if other.is_zero():
            raise PoleError("division by the zero polynomial", other)
        if not self._terms:
            return self
        if other.is_constant():
            return self.scale(1 / other.constant_value())
        if other.is_monomial():
            (mo, co), = other._terms.items()
            t = {}
            for m, c in self._terms.items():
                q = _mono_div(m, mo)
                if q is None:
                    raise MalformedExpressionError("inexact polynomial division")
                t[q] = c / co
            return Polynomial._raw(t)
        v = min(other.variables)
        G = other.coeffs_in(v)
        dg = max(G)
        lg = G[dg]
        F = self.coeffs_in(v)
        Q = {}
        while F:
            df = max(F)
            if df < dg:
                raise MalformedExpressionError("inexact polynomial division")
            qc = F.pop(df).exact_div(lg)
            Q[df - dg] = qc
            for i, gi in G.items():
                if i == dg:
                    continue
                k = i + df - dg
                r = F.get(k, _ZERO) - qc * gi
                if r.is_zero():
                    F.pop(k, None)
                else:
                    F[k] = r
        return Polynomial.from_coeffs_in(v, Q)

    # -- structure --------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.const(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def rename(self, mapping: Mapping) -> "Polynomial":
        mp = {_name(k): _name(v) for k, v in mapping.items()}
        t = {}
        for m, c in self._terms.items():
            mm = tuple(sorted((mp.get(v, v), e) for v, e in m))
            t[mm] = t.get(mm, 0) + c
        return Polynomial(t)

    def substitute(self, bindings: Mapping) -> "Polynomial":
        """Simultaneous substitution of polynomials for symbols."""
        b = {_name(k): (v if isinstance(v, Polynomial) else Polynomial.const(v)) for k, v in bindings.items()}
        powers: dict = {}

        def pw(v, e):
            key = (v, e)
            if key not in powers:
                powers[key] = b[v] ** e
            return powers[key]

        out = Polynomial._raw({})
        acc: dict = {}
        for m, c in self._terms.items():
            kept = tuple((v, e) for v, e in m if v not in b)
            subs = [(v, e) for v, e in m if v in b]
            if not subs:
                acc[kept] = acc.get(kept, 0) + c
                continue
            term = Polynomial._raw({kept: c})
            for v, e in subs:
                term = term * pw(v, e)
            out = out + term
        return out + Polynomial(acc)

    def evaluate(self, bindings: Mapping):
        """Exact evaluation; every symbol must be bound."""
        vals = {_name(k): v for k, v in bindings.items()}
        total = Fraction(0)
        for m, c in self._terms.items():
            t = c
            for v, e in m:
                try:
                    t = t * vals[v] ** e
                except KeyError:
                    raise InvalidArgumentError(f"unbound symbol {v!r}") from None
            total = total + t
        return total

    def evaluate_array(self, values: Mapping):
        """Floating evaluation over broadcastable numpy arrays."""
        vals = {_name(k): np.asarray(v) for k, v in values.items()}
        cache: dict = {}
        total = 0.0
        for m, c in self._terms.items():
            t = float(c)
            for v, e in m:
                key = (v, e)
                if key not in cache:
                    try:
                        cache[key] = vals[v] ** e
                    except KeyError:
                        raise InvalidArgumentError(f"unbound symbol {v!r}") from None
                t = t * cache[key]
            total = total + t
        return total

    def abs_evaluate_array(self, values: Mapping):
        """Sum of absolute term values; the natural scale for cancellation checks."""
        vals = {_name(k): np.abs(np.asarray(v)) for k, v in values.items()}
        total = 0.0
        for m, c in self._terms.items():
            t = abs(float(c))
            for v, e in m:
                t = t * vals[v] ** e
            total = total + t
        return total

    def _sorted_terms(self):
        key = _lex_key(tuple(sorted(self.variables)))
        return sorted(self._terms.items(), key=lambda kv: key(kv[0]), reverse=True)

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for m, c in self._sorted_terms():
            mono = "*".join(v if e == 1 else f"{v}**{e}" for v, e in m)
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if not mono:
                body = _fmt_coeff(a)
            elif a == 1:
                body = mono
            else:
                body = f"{_fmt_coeff(a)}*{mono}"
            parts.append((sign, body))
        first_sign, first = parts[0]
        s = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            s += f" {sign} {body}"
        return s

    def __repr__(self):
        return f"Polynomial({str(self)!r})"


_ZERO = Polynomial._raw({})
_ONE = Polynomial.const(1)


# -- gcd ----------------------------------------------------------------------

def _int_primitive(p: Polynomial) -> Polynomial:
    """Scale ``p`` to integer coefficients with gcd 1 and positive leading coefficient."""
    if p.is_zero():
        return p
    den = 1
    for c in p._terms.values():
        den = den * c.denominator // igcd(den, c.denominator)
    g = 0
    for c in p._terms.values():
        g = igcd(g, int(c * den))
    s = Fraction(den, g)
    if p.leading_coefficient() < 0:
        s = -s
    return p if s == 1 else p.scale(s)


def _gcd_many(polys) -> Polynomial:
    g = None
    for p in polys:
        if p.is_zero():
            continue
        if p.is_constant():
            return _ONE
        g = p if g is None else _gcd(g, p)
        if g.is_constant():
            return _ONE
    return _ONE if g is None else g


def _content(coeffs: Mapping) -> Polynomial:
    return _gcd_many(sorted(coeffs.values(), key=len))


# -- modular degree bounds ---------------------------------------------------
#
# For an integer point ``a`` with lc_x(f)(a), lc_x(g)(a) nonzero mod p, the
# image of gcd(f, g) divides gcd(f(x, a), g(x, a)) mod p, so the degree of the
# image gcd bounds deg_x gcd(f, g) from above.  A zero bound is a certificate.

_P = (1 << 61) - 1
_BOUND_RNG = random.Random(0x5EED)


def _mod_image(p: Polynomial, v: str, point: dict):
    coeffs: dict = {}
    for m, c in p._terms.items():
        if c.denominator % _P == 0:
            return None
        t = c.numerator * pow(c.denominator, -1, _P) % _P
        e = 0
        for w, k in m:
            if w == v:
                e = k
            else:
                t = t * pow(point[w], k, _P) % _P
        coeffs[e] = (coeffs.get(e, 0) + t) % _P
    top = max(coeffs)
    if coeffs[top] == 0:
        return None
    return [coeffs.get(i, 0) for i in range(top + 1)]


def _uni_gcd_degree(a: list, b: list) -> int:
    def trim(u):
        while u and u[-1] == 0:
            u.pop()
        return u

    a, b = trim(list(a)), trim(list(b))
    while b:
        inv = pow(b[-1], -1, _P)
        while len(a) >= len(b):
            q = a[-1] * inv % _P
            shift = len(a) - len(b)
            for i, c in enumerate(b):
                a[shift + i] = (a[shift + i] - q * c) % _P
            trim(a)
            if not a:
                break
        a, b = b, a
    return len(a) - 1


def _degree_bound(f: Polynomial, g: Polynomial, v: str, common) -> int | None:
    for _ in range(3):
        point = {w: _BOUND_RNG.randrange(1, _P) for w in common | f.variables | g.variables if w != v}
        fa = _mod_image(f, v, point)
        ga = _mod_image(g, v, point)
        if fa is not None and ga is not None:
            return _uni_gcd_degree(fa, ga)
    return None


def _gcd(f: Polynomial, g: Polynomial) -> Polynomial:
    """gcd of two nonzero polynomials, up to a rational unit."""
    if f.is_constant() or g.is_constant():
        return _ONE
    if f == g:
        return f
    fv, gv = f.variables, g.variables
    common = fv & gv
    if not common:
        return _ONE
    bounds = {w: _degree_bound(f, g, w, common) for w in sorted(common)}
    if all(b == 0 for b in bounds.values()):
        return _ONE
    only_f = fv - common
    if only_f:
        v = min(only_f)
        return _gcd(_content(f.coeffs_in(v)), g)
    only_g = gv - common
    if only_g:
        v = min(only_g)
        return _gcd(f, _content(g.coeffs_in(v)))
    free = [w for w, b in bounds.items() if b == 0]
    if free:
        # the gcd does not involve ``free[0]``: it divides every coefficient in it
        v = free[0]
        return _gcd(_content(f.coeffs_in(v)), _content(g.coeffs_in(v)))
    # main variable: smallest degree keeps the remainder sequence short
    v = min(common, key=lambda w: (max(f.degree(w), g.degree(w)), w))
    F = f.coeffs_in(v)
    G = g.coeffs_in(v)
    cf = _content(F)
    cg = _content(G)
    c = _gcd(cf, cg)
    if not cf.is_constant():
        F = {e: p.exact_div(cf) for e, p in F.items()}
    if not cg.is_constant():
        G = {e: p.exact_div(cg) for e, p in G.items()}
    h = _prs(F, G)
    return c * Polynomial.from_coeffs_in(v, h)


def _prs(A: dict, B: dict) -> dict:
    """Primitive remainder sequence for polynomials primitive in the main variable."""
    if max(A) < max(B):
        A, B = B, A
    while True:
        R = _sprem(A, B)
        if not R:
            return B
        if max(R) == 0:
            return {0: _ONE}
        cont = _content(R)
        if not cont.is_constant():
            R = {e: p.exact_div(cont) for e, p in R.items()}
        # a common rational rescale keeps coefficients small
        R = _rescale_uni(R)
        A, B = B, R


def _rescale_uni(R: dict) -> dict:
    den = 1
    for p in R.values():
        for c in p._terms.values():
            den = den * c.denominator // igcd(den, c.denominator)
    g = 0
    for p in R.values():
        for c in p._terms.values():
            g = igcd(g, int(c * den))
    s = Fraction(den, g)
    if s == 1:
        return R
    return {e: p.scale(s) for e, p in R.items()}


def _sprem(A: dict, B: dict) -> dict:
    """Sparse pseudo-remainder of A by B (no trailing lc power, fine for gcds)."""
    R = dict(A)
    n = max(B)
    lb = B[n]
    while R:
        dr = max(R)
        if dr < n:
            break
        lr = R[dr]
        shift = dr - n
        out = {}
        for e, p in R.items():
            if e == dr:
                continue
            out[e] = lb * p
        for e, p in B.items():
            if e == n:
                continue
            k = e + shift
            out[k] = out.get(k, _ZERO) - lr * p
        R = {e: p for e, p in out.items() if not p.is_zero()}
    return R


def poly_gcd(f: Polynomial, g: Polynomial) -> Polynomial:
    """Monic greatest common divisor over Q (zero only if both are zero)."""
    if f.is_zero():
        return g.monic()
    if g.is_zero():
        return f.monic()
    return _gcd(f, g).monic()


# -- rational expressions ----------------------------------------------------

class RationalExpr:
    """Canonical quotient of two coprime polynomials with a monic denominator."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num=0, den=1):
        num = num if isinstance(num, Polynomial) else Polynomial.const(num)
        den = den if isinstance(den, Polynomial) else Polynomial.const(den)
        if den.is_zero():
            raise MalformedExpressionError("rational expression with zero denominator")
        if num.is_zero():
            self.num, self.den = _ZERO, _ONE
        else:
            g = poly_gcd(num, den)
            if not g.is_constant():
                num = num.exact_div(g)
                den = den.exact_div(g)
            lc = den.leading_coefficient()
            if lc != 1:
                num = num.scale(1 / lc)
                den = den.scale(1 / lc)
            self.num, self.den = num, den
        self._hash = None

    @classmethod
    def _coprime(cls, num: Polynomial, den: Polynomial) -> "RationalExpr":
        """Build from a coprime pair; only the leading coefficient is fixed up."""
        r = cls.__new__(cls)
        if num.is_zero():
            r.num, r.den = _ZERO, _ONE
        else:
            lc = den.leading_coefficient()
            if lc != 1:
                num = num.scale(1 / lc)
                den = den.scale(1 / lc)
            r.num, r.den = num, den
        r._hash = None
        return r

    @classmethod
    def symbol(cls, v) -> "RationalExpr":
        return cls._coprime(Polynomial.var(v), _ONE)

    @classmethod
    def const(cls, c) -> "RationalExpr":
        return cls._coprime(Polynomial.const(c), _ONE)

    @classmethod
    def coerce(cls, x) -> "RationalExpr":
        if isinstance(x, RationalExpr):
            return x
        if isinstance(x, Polynomial):
            return cls._coprime(x, _ONE)
        if isinstance(x, Symbol):
            return cls.symbol(x)
        if isinstance(x, (int, Fraction)):
            return cls.const(x)
        if isinstance(x, str):
            return parse_expr(x)
        raise MalformedExpressionError(f"cannot interpret {x!r} as a rational expression")

    # -- inspection -------------------------------------------------------
    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    @property
    def variables(self) -> frozenset:
        return self.num.variables | self.den.variables

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        try:
            other = RationalExpr.coerce(other)
        except MalformedExpressionError:
            return NotImplemented
        return _add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return RationalExpr._coprime(-self.num, self.den)

    def __sub__(self, other):
        try:
            other = RationalExpr.coerce(other)
        except MalformedExpressionError:
            return NotImplemented
        return _add(self, -other)

    def __rsub__(self, other):
        return RationalExpr.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return RationalExpr.const(0)
            return RationalExpr._coprime(self.num.scale(other), self.den)
        try:
            other = RationalExpr.coerce(other)
        except MalformedExpressionError:
            return NotImplemented
        return _mul(self, other)

    __rmul__ = __mul__

    def inverse(self) -> "RationalExpr":
        if self.is_zero():
            raise PoleError("inverse of zero", self.num)
        return RationalExpr._coprime(self.den, self.num)

    def __truediv__(self, other):
        other = RationalExpr.coerce(other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return RationalExpr.coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        return RationalExpr._coprime(self.num ** k, self.den ** k)

    # -- structure --------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, (int, Fraction, Polynomial)):
            other = RationalExpr.coerce(other)
        if not isinstance(other, RationalExpr):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def rename(self, mapping: Mapping) -> "RationalExpr":
        # renaming is a ring automorphism: coprimality survives, the lex order may not
        return RationalExpr._coprime(self.num.rename(mapping), self.den.rename(mapping))

    def evaluate(self, bindings: Mapping) -> Fraction:
        d = self.den.evaluate(bindings)
        if d == 0:
            raise PoleError(f"denominator {self.den} vanishes at the evaluation point", self.den)
        return self.num.evaluate(bindings) / d

    def evaluate_array(self, values: Mapping):
        return self.num.evaluate_array(values) / self.den.evaluate_array(values)

    def __str__(self):
        if self.den == _ONE:
            return str(self.num)
        n = str(self.num)
        if len(self.num) > 1 or not self.num.is_monomial() or any(
                c.denominator != 1 or c < 0 for c in self.num._terms.values()):
            n = f"({n})"
        return f"{n}/({self.den})"

    def __repr__(self):
        return f"RationalExpr({str(self)!r})"


@lru_cache(maxsize=65536)
def _add(x: RationalExpr, y: RationalExpr) -> RationalExpr:
    if x.is_zero():
        return y
    if y.is_zero():
        return x
    a, b, c, d = x.num, x.den, y.num, y.den
    if b == d:
        num = a + c
        if num.is_zero():
            return RationalExpr.const(0)
        if b.is_constant():
            return RationalExpr._coprime(num, b)
        h = poly_gcd(num, b)
        if h.is_constant():
            return RationalExpr._coprime(num, b)
        return RationalExpr._coprime(num.exact_div(h), b.exact_div(h))
    g = poly_gcd(b, d)
    if g.is_constant():
        return RationalExpr._coprime(a * d + c * b, b * d)
    b1 = b.exact_div(g)
    d1 = d.exact_div(g)
    num = a * d1 + c * b1
    if num.is_zero():
        return RationalExpr.const(0)
    h = poly_gcd(num, g)
    if not h.is_constant():
        num = num.exact_div(h)
        g = g.exact_div(h)
    return RationalExpr._coprime(num, b1 * d1 * g)


@lru_cache(maxsize=65536)
def _mul(x: RationalExpr, y: RationalExpr) -> RationalExpr:
    if x.is_zero() or y.is_zero():
        return RationalExpr.const(0)
    a, b, c, d = x.num, x.den, y.num, y.den
    g1 = poly_gcd(a, d)
    g2 = poly_gcd(c, b)
    if not g1.is_constant():
        a, d = a.exact_div(g1), d.exact_div(g1)
    if not g2.is_constant():
        c, b = c.exact_div(g2), b.exact_div(g2)
    return RationalExpr._coprime(a * c, b * d)


# -- operations ---------------------------------------------------------------

ExprLike = Union[RationalExpr, Polynomial, Symbol, int, Fraction, str]


def normalize(e) -> RationalExpr:
    """Canonical form of ``e``; idempotent."""
    if isinstance(e, RationalExpr):
        return RationalExpr(e.num, e.den)
    return RationalExpr.coerce(e)


def _homogenize(p: Polynomial, bindings: dict, cache: dict):
    """p(bindings) * prod q_v**deg_v(p), returned with the exponents used."""
    degs = {v: p.degree(v) for v in bindings if v in p.variables}
    out = Polynomial._raw({})
    rest: dict = {}

    def pw(kind, v, e):
        key = (kind, v, e)
        if key not in cache:
            r = bindings[v]
            cache[key] = (r.num if kind == "n" else r.den) ** e
        return cache[key]

    for m, c in p.items():
        kept = tuple((v, e) for v, e in m if v not in bindings)
        sub = {v: e for v, e in m if v in bindings}
        if not degs:
            rest[kept] = c
            continue
        term = Polynomial._raw({kept: c})
        for v, D in degs.items():
            e = sub.get(v, 0)
            if e:
                term = term * pw("n", v, e)
            if D - e:
                term = term * pw("d", v, D - e)
        out = out + term
    if rest:
        out = out + Polynomial._raw(rest)
    return out, degs


def substitute(e, bindings: Mapping) -> RationalExpr:
    """Simultaneous substitution ``symbol -> expression``, then normalization."""
    e = RationalExpr.coerce(e)
    b = {_name(k): RationalExpr.coerce(v) for k, v in bindings.items()}
    b = {k: v for k, v in b.items() if k in e.variables}
    if not b:
        return e
    cache: dict = {}
    hn, dn = _homogenize(e.num, b, cache)
    hd, dd = _homogenize(e.den, b, cache)
    if hd.is_zero():
        raise PoleError(f"substitution makes the denominator {e.den} vanish identically", e.den)
    num, den = hn, hd
    for v in set(dn) | set(dd):
        k = dd.get(v, 0) - dn.get(v, 0)
        q = b[v].den
        if q.is_constant() and q.constant_value() == 1:
            continue
        if k > 0:
            num = num * q ** k
        elif k < 0:
            den = den * q ** (-k)
    return RationalExpr(num, den)


def swap_pair(e, pairs) -> RationalExpr:
    """Exchange each symbol pair simultaneously; an involution and ring map."""
    seen: set = set()
    mapping = {}
    for x, y in pairs:
        x, y = _name(x), _name(y)
        if x == y or x in seen or y in seen:
            raise InvalidArgumentError(f"overlapping swap pairs at ({x}, {y})")
        seen.update((x, y))
        mapping[x] = y
        mapping[y] = x
    return RationalExpr.coerce(e).rename(mapping)


def is_zero(e) -> bool:
    return RationalExpr.coerce(e).is_zero()


def degree_in(e, vars_) -> int | None:
    """Total degree in ``vars_`` if ``e`` is polynomial in them, else ``None``.

    The zero expression reports degree 0; use :func:`is_zero` to tell it apart.
    """
    e = RationalExpr.coerce(e)
    names = {_name(v) for v in vars_}
    if e.den.variables & names:
        return None
    if e.is_zero():
        return 0
    return e.num.total_degree(names)


# -- parsing -----------------------------------------------------------------

def parse_expr(text: str) -> RationalExpr:
    """Parse infix text (``+ - * / **``, integers, identifiers) exactly."""
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise MalformedExpressionError(f"cannot parse {text!r}: {exc.msg}") from None
    return _walk(tree.body)


def _walk(node) -> RationalExpr:
    if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
        return RationalExpr.const(node.value)
    if isinstance(node, ast.Name):
        return RationalExpr.symbol(node.id)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _walk(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp):
        if isinstance(node.op, ast.Pow):
            exp = node.right
            sign = 1
            if isinstance(exp, ast.UnaryOp) and isinstance(exp.op, ast.USub):
                sign, exp = -1, exp.operand
            if not (isinstance(exp, ast.Constant) and isinstance(exp.value, int)):
                raise MalformedExpressionError("exponents must be integer literals")
            return _walk(node.left) ** (sign * exp.value)
        left, right = _walk(node.left), _walk(node.right)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left - right
        if isinstance(node.op, ast.Mult):
            return left * right
        if isinstance(node.op, ast.Div):
            if right.is_zero():
                raise MalformedExpressionError("division by zero in expression")
            return left / right
    raise MalformedExpressionError(f"unsupported syntax: {ast.dump(node)}")

"""Gridded JLD representation of a causal commutator and its sum rule.

    f(q) = Int d^3u dkappa^2 eps(q^0) delta((q^0)^2 - |q - u|^2 - kappa^2)
                 (Phi_1(u, kappa^2) + q^0 Phi_2(u, kappa^2))

Pointwise the delta is resolved in ``kappa^2 = (q^0)^2 - |q - u|^2`` (unit
Jacobian) with ``Phi`` linearly interpolated between ``kappa^2`` nodes; the
``u`` integral is the composite trapezoid rule on the grid nodes.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InvalidArgumentError
from . import locality
from .commutator import commutator_at
from .energy_reduce import reduce_double_integral
from .locality import LocalityConfig, PolynomialOfDegree, Zero
from .momdist import (FieldModel, build_structure_function, minkowski_dot, momentum_symbol,
                      multiply_polynomial, validate_multiplier)
from .symkernel import Polynomial


def _gl(order):
    return np.polynomial.legendre.leggauss(order)


def _trap_weights(lo, hi, n):
    h = (hi - lo) / (n - 1)
    w = np.full(n, h)
    w[0] = w[-1] = h / 2
    return w


@dataclass
class SpectralFn:
    """``Phi_1, Phi_2`` sampled on a box in ``u`` times ``[k2_lo, k2_hi]`` in ``kappa^2``.

    Arrays have shape ``(nu, nu, nu, nk)``; grid nodes include both ends.
    """

    u_lo: float
    u_hi: float
    k2_lo: float
    k2_hi: float
    phi1: np.ndarray
    phi2: np.ndarray

    def __post_init__(self):
        self.phi1 = np.asarray(self.phi1, float)
        self.phi2 = np.asarray(self.phi2, float)
        if self.phi1.shape != self.phi2.shape or self.phi1.ndim != 4:
            raise InvalidArgumentError("phi1, phi2 must share a 4-d shape (nu, nu, nu, nk)")
        nu = self.phi1.shape[0]
        if self.phi1.shape[1:3] != (nu, nu) or nu < 2 or self.phi1.shape[3] < 2:
            raise InvalidArgumentError("u grid must be cubic with at least 2 nodes per axis")
        if self.k2_lo < 0 or not self.k2_hi > self.k2_lo or not self.u_hi > self.u_lo:
            raise InvalidArgumentError("need 0 <= k2_lo < k2_hi and u_lo < u_hi")
        if not (np.all(np.isfinite(self.phi1)) and np.all(np.isfinite(self.phi2))):
            raise InvalidArgumentError("spectral values must be finite")

    @property
    def nu(self):
        return self.phi1.shape[0]

    @property
    def nk(self):
        return self.phi1.shape[3]

    @property
    def u_axis(self):
        return np.linspace(self.u_lo, self.u_hi, self.nu)

    @property
    def k2_axis(self):
        return np.linspace(self.k2_lo, self.k2_hi, self.nk)

    def u_nodes(self):
        ax = self.u_axis
        U = np.stack(np.meshgrid(ax, ax, ax, indexing="ij"), axis=-1).reshape(-1, 3)
        w1 = _trap_weights(self.u_lo, self.u_hi, self.nu)
        W = (w1[:, None, None] * w1[None, :, None] * w1[None, None, :]).reshape(-1)
        return U, W

    def total_variation_bound(self) -> float:
        return float(sum(np.abs(np.diff(p, axis=a)).sum() for p in (self.phi1, self.phi2) for a in range(4)))

    def scaled(self, lam1=1.0, lam2=1.0) -> "SpectralFn":
        return SpectralFn(self.u_lo, self.u_hi, self.k2_lo, self.k2_hi, lam1 * self.phi1, lam2 * self.phi2)

    def __add__(self, other: "SpectralFn") -> "SpectralFn":
        return SpectralFn(self.u_lo, self.u_hi, self.k2_lo, self.k2_hi,
                          self.phi1 + other.phi1, self.phi2 + other.phi2)

    # -- text format: one JSON header line, then the two arrays row-major
    def dumps(self) -> str:
        head = {"format": "spectral-fn", "version": 1, "u_box": [self.u_lo, self.u_hi],
                "k2_range": [self.k2_lo, self.k2_hi], "resolution": list(self.phi1.shape)}
        lines = [json.dumps(head, sort_keys=True)]
        for name, arr in (("phi1", self.phi1), ("phi2", self.phi2)):
            lines.append(name)
            lines.extend(" ".join(f"{v:.17g}" for v in row) for row in arr.reshape(-1, self.nk))
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "SpectralFn":
        lines = text.splitlines()
        head = json.loads(lines[0])
        if head.get("format") != "spectral-fn":
            raise InvalidArgumentError("not a spectral-fn file")
        shape = tuple(head["resolution"])
        rows = int(np.prod(shape[:3]))
        arrays = {}
        pos = 1
        for name in ("phi1", "phi2"):
            if lines[pos].strip() != name:
                raise InvalidArgumentError(f"expected section {name!r} at line {pos + 1}")
            block = lines[pos + 1:pos + 1 + rows]
            arrays[name] = np.array([[float(v) for v in r.split()] for r in block]).reshape(shape)
            pos += 1 + rows
        return cls(*head["u_box"], *head["k2_range"], arrays["phi1"], arrays["phi2"])

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.dumps())

    @classmethod
    def load(cls, path) -> "SpectralFn":
        with open(path) as fh:
            return cls.loads(fh.read())


def gaussian_spectral_fn(n_u: int = 32, n_k: int = 32, sigma: float = 0.5, k2_center: float | None = None,
                         phi1=None, normalize: bool = True) -> SpectralFn:
    """Gaussian ``Phi_2`` on a ``+-6 sigma`` box; ``Phi_1`` from ``phi1(u, k2)`` if given.

    With ``normalize`` the grid quadrature of ``Phi_2`` is exactly one, so the
    sum-rule target is 1 independently of the truncated tails.
    """
    k2c = 6 * sigma if k2_center is None else k2_center
    if k2c < 6 * sigma:
        raise InvalidArgumentError("kappa^2 centre must sit at least 6 sigma above 0")
    half = 6 * sigma
    ax = np.linspace(-half, half, n_u)
    U = np.stack(np.meshgrid(ax, ax, ax, indexing="ij"), axis=-1)
    K2 = np.linspace(k2c - half, k2c + half, n_k)
    r2 = (U ** 2).sum(-1)[..., None] + (K2 - k2c)[None, None, None, :] ** 2
    phi2 = np.exp(-r2 / (2 * sigma ** 2))
    s = SpectralFn(-half, half, k2c - half, k2c + half, np.zeros_like(phi2), phi2)
    if normalize:
        phi2 = phi2 / integrate_phi2(s)
    p1 = np.zeros_like(phi2) if phi1 is None else np.asarray(phi1(U[..., None, :], K2[None, None, None, :]), float) \
        * np.ones_like(phi2)
    return SpectralFn(s.u_lo, s.u_hi, s.k2_lo, s.k2_hi, p1, phi2)


def smooth_phi1(u, k2):
    """An arbitrary smooth ``Phi_1``; the sum rule must not see it."""
    return np.sin(u[..., 0] - 0.5 * u[..., 2]) * np.exp(-0.1 * k2) + 0.3 * np.cos(u[..., 1])


def integrate_phi2(s: SpectralFn) -> float:
    """``Int Int Phi_2 du dkappa^2`` by grid summation (trapezoid in every axis)."""
    _, W = s.u_nodes()
    wk = _trap_weights(s.k2_lo, s.k2_hi, s.nk)
    return float(W @ (s.phi2.reshape(-1, s.nk) @ wk))


def _interp_k2(s: SpectralFn, vals: np.ndarray, k2: np.ndarray) -> np.ndarray:
    """Linear interpolation of per-node rows ``vals[i, :]`` at ``k2[i, ...]``; zero outside."""
    ax_step = (s.k2_hi - s.k2_lo) / (s.nk - 1)
    pos = (k2 - s.k2_lo) / ax_step
    inside = (pos >= 0) & (pos <= s.nk - 1)
    i0 = np.clip(np.floor(pos).astype(int), 0, s.nk - 2)
    frac = pos - i0
    rows = np.arange(vals.shape[0]).reshape((-1,) + (1,) * (k2.ndim - 1))
    out = vals[rows, i0] * (1 - frac) + vals[rows, i0 + 1] * frac
    return np.where(inside, out, 0.0)


def evaluate_jld(s: SpectralFn, q) -> float:
    """``f(q)`` for a 4-vector ``q = (q0, q1, q2, q3)``."""
    q = np.asarray(q, float)
    if q.shape != (4,):
        raise InvalidArgumentError("q must be a 4-vector")
    q0, qv = q[0], q[1:]
    if q0 == 0:
        return 0.0
    U, W = s.u_nodes()
    r2 = ((qv[None, :] - U) ** 2).sum(1)
    k2 = (q0 * q0 - r2)[:, None]
    p1 = _interp_k2(s, s.phi1.reshape(-1, s.nk), k2)[:, 0]
    p2 = _interp_k2(s, s.phi2.reshape(-1, s.nk), k2)[:, 0]
    return float(np.sign(q0) * (W @ (p1 + q0 * p2)))


def _q0_integral(s: SpectralFn, qv, order: int = 4):
    """``Int f((q0, qv)) dq0`` exchanged with the ``u`` sum.

    For each ``u`` node the integrand in ``q0`` is piecewise polynomial with
    breakpoints at ``q0 = +-sqrt(r^2 + kappa_i^2)``, so Gauss-Legendre per
    piece is exact up to rounding.
    """
    U, W = s.u_nodes()
    r2 = ((np.asarray(qv, float)[None, :] - U) ** 2).sum(1)
    bps = np.sqrt(r2[:, None] + s.k2_axis[None, :])  # (nodes, nk), increasing
    x, w = _gl(order)
    lo, hi = bps[:, :-1, None], bps[:, 1:, None]
    half = (hi - lo) / 2
    q0 = (lo + hi) / 2 + half * x  # positive branch
    k2 = q0 * q0 - r2[:, None, None]
    nodes = s.phi1.shape[0] ** 3
    # clip rounding at the breakpoints back into the grid range
    k2 = np.clip(k2, s.k2_lo, s.k2_hi)
    p1 = _interp_k2(s, s.phi1.reshape(nodes, s.nk), k2)
    p2 = _interp_k2(s, s.phi2.reshape(nodes, s.nk), k2)
    # eps(q0) makes the q0 < 0 branch the mirror: Phi_1 cancels, q0 Phi_2 doubles
    pos1 = ((p1 * half) * w).sum((1, 2))
    pos2 = ((q0 * p2 * half) * w).sum((1, 2))
    neg1 = -pos1
    return float(W @ (pos1 + neg1)), float(W @ (2 * pos2))


def sum_rule(s: SpectralFn, q_vectors=None) -> dict:
    """Numeric ``Int f dq0`` at several ``q_vec`` next to ``Int Int Phi_2``."""
    if q_vectors is None:
        q_vectors = [(0.0, 0.0, 0.0), (0.7, -0.4, 1.1), (-1.3, 0.5, 0.2)]
    numeric = []
    for qv in q_vectors:
        odd, even = _q0_integral(s, qv)
        numeric.append(odd + even)
    analytic = integrate_phi2(s)
    spread = (max(numeric) - min(numeric)) / max(abs(analytic), 1e-300)
    return {"numeric": numeric, "q_vectors": [list(map(float, q)) for q in q_vectors],
            "analytic": analytic, "relative_spread": spread,
            "relative_error": max(abs(v - analytic) for v in numeric) / max(abs(analytic), 1e-300)}


# -- comparison exhibits ------------------------------------------------------

def triple_derivative_evaluator(pts):
    """Fourier transform of ``delta' delta' delta'`` up to a constant: ``q1 q2 q3``."""
    pts = np.asarray(pts, float)
    return pts[:, 0] * pts[:, 1] * pts[:, 2]


def multiplier_candidates(n: int, d: int, max_power: int = 2):
    """Symmetrized products of ``(k_l . k_l')`` powers, lowest total degree first.

    Each candidate is the sum over all slot permutations of a monomial in the
    pair products, which is symmetric and Lorentz invariant by construction.
    """
    pairs = [(a, b) for a in range(1, n + 1) for b in range(a, n + 1)]
    seen = set()
    for total in range(1, max_power + 1):
        for combo in itertools.combinations_with_replacement(pairs, total):
            # orbit representative under slot permutations
            key = min(tuple(sorted(tuple(sorted((p[a - 1], p[b - 1]))) for a, b in combo))
                      for p in itertools.permutations(range(1, n + 1)))
            if key in seen:
                continue
            seen.add(key)
            yield key


def symmetrized_pair_product(key, n, d):
    """Average over slot permutations of ``prod (k_a . k_b)`` for ``(a, b)`` in ``key``."""
    dots = {}
    total = Polynomial.const(0)
    perms = list(itertools.permutations(range(1, n + 1)))
    for p in perms:
        term = Polynomial.const(1)
        for a, b in key:
            pa, pb = sorted((p[a - 1], p[b - 1]))
            if (pa, pb) not in dots:
                dots[(pa, pb)] = minkowski_dot(pa, pb, d)
            term = term * dots[(pa, pb)]
        total = total + term
    return total.scale(Fraction(1, len(perms)))


def _max_single_degree(M: Polynomial, n: int, d: int) -> int:
    return max(M.total_degree([momentum_symbol(l, mu) for mu in range(d)]) for l in range(1, n + 1))


def multiplier_verdict(M: Polynomial, n: int, d: int, masses=(1,), j: int = 1, config: LocalityConfig | None = None):
    model = FieldModel(tuple(masses), d=d)
    dist = multiply_polynomial(build_structure_function(model, n), M)
    red = reduce_double_integral(commutator_at(dist, j), j)
    return red, locality.test_locality_symbolic(red, config)


def search_multiplier(n: int = 4, d: int = 4, masses=(1,), j: int = 1, min_degree: int = 4,
                      max_power: int = 3, config: LocalityConfig | None = None):
    """First candidate, in a fixed order, whose pipeline verdict is not ``Zero``."""
    for key in multiplier_candidates(n, d, max_power):
        M = symmetrized_pair_product(key, n, d)
        if _max_single_degree(M, n, d) < min_degree:
            continue
        red, verdict = multiplier_verdict(M, n, d, masses, j, config)
        if not isinstance(verdict, Zero):
            return {"multiplier_pairs": [list(p) for p in key], "multiplier": str(M), "n": n, "d": d,
                    "masses": [str(m) for m in masses], "j": j,
                    "max_degree_in_one_momentum": _max_single_degree(M, n, d),
                    "validation": validate_multiplier(M, n, d),
                    "verdict": verdict.to_dict(), "surviving_groups": len(red.terms)}
    return None


def beyond_jld_demo(n: int = 4, d: int = 4, config: LocalityConfig | None = None) -> dict:
    """The polynomial ``q1 q2 q3`` example and a non-local symmetric multiplier."""
    a = locality.test_polynomiality_numeric(triple_derivative_evaluator, 3, config)
    control = multiplier_verdict(Polynomial.const(1), n, d, config=config)[1]
    b = search_multiplier(n, d, config=config)
    return {"triple_derivative": a.to_dict(), "triple_derivative_degree3": a == PolynomialOfDegree(3),
            "control_M1": control.to_dict(), "multiplier_witness": b}

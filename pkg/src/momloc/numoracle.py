"""Numerical free-field oracles in two spacetime dimensions.

``pauli_jordan_d2`` integrates

    Delta(x) = -(1/2pi) Int dk sin(w t - k x) / w,   w = sqrt(k^2 + m^2)

by splitting into the two half lines.  On each, the phase is ``c k + delta(k)``
with ``c = t -+ x`` and ``delta = m^2 t / (w + k)`` slowly varying, so
``[0, K]`` is done with panel Gauss-Legendre and the tail by two integrations
by parts with an explicit remainder bound.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import AccuracyError, InvalidArgumentError


@dataclass(frozen=True)
class SpacetimePoint:
    t: float
    x: tuple

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(v) for v in np.atleast_1d(self.x)))

    @property
    def interval(self) -> float:
        """``x^2 = t^2 - |x|^2``."""
        return self.t ** 2 - sum(v * v for v in self.x)

    def time_reflected(self) -> "SpacetimePoint":
        return SpacetimePoint(-self.t, self.x)


@dataclass(frozen=True)
class OracleValue:
    value: float
    error: float
    cutoff: float = math.nan


def _gl(order):
    return np.polynomial.legendre.leggauss(order)


def _panel_integral(f, a, b, n_panels, order):
    x, w = _gl(order)
    edges = np.linspace(a, b, n_panels + 1)
    lo, hi = edges[:-1, None], edges[1:, None]
    half = (hi - lo) / 2
    pts = (lo + hi) / 2 + half * x[None, :]
    return np.sum(f(pts) * w[None, :] * half)


def _half_line(m, t, c, tol, order):
    """``Int_0^inf exp(i c k) g(k) dk`` with ``g = exp(i m^2 t/(w+k)) / w``."""
    m2 = m * m

    def g(k):
        w = np.sqrt(k * k + m2)
        return np.exp(1j * m2 * t / (w + k)) / w

    def dg(k):
        w = np.sqrt(k * k + m2)
        ddelta = -m2 * t / (w * (w + k))
        return np.exp(1j * m2 * t / (w + k)) * (1j * ddelta / w - k / w ** 3)

    if abs(c) < 1e-12:
        raise AccuracyError("point on the light cone: the oscillatory tail does not decay", math.inf)
    # remainder after two integrations by parts is at most 2|g'(K)|/c^2 <= 2/(c K)^2
    K = max(8.0, 2.0 / (abs(c) * math.sqrt(tol / 4)))
    if K > 2e7:
        raise AccuracyError(f"cutoff {K:.3g} needed for |c|={abs(c):.3g}; too close to the light cone",
                            2.0 / (abs(c) * 2e7) ** 2)
    panel = min(1.0, math.pi / abs(c))
    n_panels = int(math.ceil(K / panel))

    def f(k):
        return np.exp(1j * c * k) * g(k)

    body = _panel_integral(f, 0.0, K, n_panels, order)
    body_coarse = _panel_integral(f, 0.0, K, n_panels, order - 4)
    e = np.exp(1j * c * K)
    tail = -e * g(K) / (1j * c) + e * dg(K) / (1j * c) ** 2
    bound = 2 * abs(dg(K)) / c ** 2
    return body + tail, abs(body - body_coarse) + bound, K


def pauli_jordan_d2(m: float, x, tol: float = 1e-9, order: int = 16) -> OracleValue:
    """Free commutator function of mass ``m`` at ``x = (t, x1)`` in two dimensions."""
    if not m > 0:
        raise InvalidArgumentError("pauli_jordan_d2 needs m > 0")
    if not isinstance(x, SpacetimePoint):
        x = SpacetimePoint(float(x[0]), (float(x[1]),))
    if len(x.x) != 1:
        raise InvalidArgumentError("two-dimensional oracle: exactly one spatial component")
    t, x1 = x.t, x.x[0]
    total = 0.0
    err = 0.0
    cutoff = 0.0
    # k > 0 gives phase (t - x) k + delta, k < 0 after k -> -k gives (t + x) k + delta
    for c in (t - x1, t + x1):
        val, e, K = _half_line(m, t, c, tol, order)
        total += val.imag
        err += e
        cutoff = max(cutoff, K)
    return OracleValue(-total / (2 * math.pi), err / (2 * math.pi), cutoff)


def oracle_csv(rows) -> str:
    """CSV text with columns ``t, x, value, error``."""
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["t", "x", "value", "error"])
    for p, v in rows:
        wr.writerow([repr(p.t), repr(p.x[0]), f"{v.value:.17g}", f"{v.error:.3g}"])
    return buf.getvalue()


# -- mollified time zero -----------------------------------------------------

@dataclass(frozen=True)
class Mollifier:
    """Normalized bump ``exp(-1/(1-x^2))`` on ``[-1, 1]`` rescaled to ``eps``."""

    eps: float
    nodes: int = 200

    def __post_init__(self):
        if not self.eps > 0:
            raise InvalidArgumentError("mollifier scale must be positive")

    @staticmethod
    def _raw(x):
        x = np.asarray(x, float)
        out = np.zeros_like(x)
        inside = np.abs(x) < 1
        out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
        return out

    def _norm(self):
        x, w = _gl(self.nodes)
        return float(np.sum(w * self._raw(x)))

    def __call__(self, s):
        return self._raw(np.asarray(s) / self.eps) / (self.eps * self._norm())

    def fourier(self, p):
        """``Int phi_eps(s) exp(-i p s) ds``; real because the profile is even."""
        x, w = _gl(self.nodes)
        prof = w * self._raw(x) / self._norm()
        p = np.asarray(p, float)
        return np.cos(np.multiply.outer(p * self.eps, x)) @ prof


@dataclass(frozen=True)
class TimeZeroResult:
    eps: float
    commutator: complex
    forward: complex
    backward: complex
    limit: complex
    error: float

    @property
    def distance_to_limit(self) -> float:
        return abs(self.forward - self.limit)


def gaussian_profile(center: float = 0.0, width: float = 1.0, amplitude: float = 1.0):
    """``g(x) = A exp(-(x-c)^2/(2s^2))`` and its transform ``Int g(x) e^{ikx} dx``."""

    def g(x):
        return amplitude * np.exp(-((np.asarray(x) - center) ** 2) / (2 * width ** 2))

    def ghat(k):
        k = np.asarray(k, float)
        return amplitude * width * math.sqrt(2 * math.pi) * np.exp(1j * k * center - (k * width) ** 2 / 2)

    g.fourier = ghat
    return g


def mollified_time_zero_free_field(m: float, eps: float, g=None, kmax: float | None = None,
                                   panels: int = 400, order: int = 16) -> TimeZeroResult:
    """Free two-point commutator at ``s = t = 0`` smeared with ``phi_eps (x) phi_eps``.

    The spatial test function ``g`` acts on the separation ``x_1 - x_2``.  Both
    orderings are integrated separately in momentum space,

        W_eps(g) = (1/2pi) Int dk |phi_eps^(w)|^2 ghat(+-k) / (2w),

    and subtracted; ``limit`` is the ``eps -> 0`` value of the forward one.
    """
    if not m > 0:
        raise InvalidArgumentError("mass must be positive")
    g = g if g is not None else gaussian_profile(0.3, 1.0)
    ghat = g.fourier
    if kmax is None:
        kmax = 40.0
    moll = Mollifier(eps)

    def integrate(fn, o):
        return _panel_integral(fn, -kmax, kmax, panels, o)

    def half(sign, o, smear=True):
        def fn(k):
            w = np.sqrt(k * k + m * m)
            phi2 = moll.fourier(w.ravel()).reshape(w.shape) ** 2 if smear else 1.0
            return phi2 * ghat(sign * k) / (2 * w) / (2 * math.pi)
        return integrate(fn, o)

    fwd, bwd = half(1, order), half(-1, order)
    fwd_c = half(1, order - 4)
    lim = half(1, order, smear=False)
    # the Gaussian profile makes the |k| > kmax remainder negligible next to this
    err = abs(fwd - fwd_c) + 1e-15 * abs(fwd)
    return TimeZeroResult(eps, fwd - bwd, fwd, bwd, lim, err)


def time_zero_sequence(m: float = 1.0, eps_values=(0.4, 0.2, 0.1, 0.05), g=None):
    return [mollified_time_zero_free_field(m, e, g) for e in eps_values]


def time_zero_csv(results) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["eps", "commutator_abs", "forward_re", "distance_to_limit", "error"])
    for r in results:
        wr.writerow([repr(r.eps), f"{abs(r.commutator):.6g}", f"{r.forward.real:.17g}",
                     f"{r.distance_to_limit:.6g}", f"{r.error:.3g}"])
    return buf.getvalue()


def time_zero_converges(results, atol: float = 1e-12) -> bool:
    """Commutator magnitudes non-increasing within the quadrature error and below
    ``atol`` at the smallest ``eps``; the forward ordering approaches its limit."""
    ok = True
    for prev, cur in zip(results, results[1:]):
        ok &= abs(cur.commutator) <= abs(prev.commutator) + cur.error + prev.error
        ok &= cur.distance_to_limit < prev.distance_to_limit
    return bool(ok and abs(results[-1].commutator) <= atol + results[-1].error)

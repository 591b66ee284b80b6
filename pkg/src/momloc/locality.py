"""Polynomiality of a reduced commutator in the spatial half-difference ``q_-``.

The symbolic step can only certify ``Zero``: the energies ``w`` are algebraic
in ``q_-``, so anything that survives exact cancellation is handed to a finite
difference test along random rays.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .errors import InvalidArgumentError, SingularPointError
from .energy_reduce import A, ReducedExpr
from .momdist import momentum_symbol, omega_symbol


@dataclass(frozen=True)
class Zero:
    kind = "Zero"

    def to_dict(self):
        return {"kind": self.kind}


@dataclass(frozen=True)
class PolynomialOfDegree:
    p: int
    kind = "PolynomialOfDegree"

    def to_dict(self):
        return {"kind": self.kind, "p": self.p}


@dataclass(frozen=True)
class NonPolynomial:
    witness: dict
    kind = "NonPolynomial"

    def to_dict(self):
        return {"kind": self.kind, "witness": self.witness}


@dataclass(frozen=True)
class Undecided:
    reason: str
    kind = "Undecided"

    def to_dict(self):
        return {"kind": self.kind, "reason": self.reason}


def verdict_from_dict(d: dict):
    kind = d["kind"]
    if kind == "Zero":
        return Zero()
    if kind == "PolynomialOfDegree":
        return PolynomialOfDegree(int(d["p"]))
    if kind == "NonPolynomial":
        return NonPolynomial(d["witness"])
    if kind == "Undecided":
        return Undecided(d["reason"])
    raise InvalidArgumentError(f"unknown verdict kind {kind!r}")


@dataclass
class LocalityConfig:
    rays: int = 16
    base_points: int = 5
    step: float = 0.5
    max_degree: int = 8
    tolerance: float = 1e-9
    zero_atol: float = 1e-12
    singular_rel: float = 1e-6
    max_retries: int = 100
    radius: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.rays < 1 or self.base_points < 1 or self.max_degree < 0:
            raise InvalidArgumentError("rays, base_points must be >= 1 and max_degree >= 0")
        if not self.step > 0 or not self.tolerance > 0:
            raise InvalidArgumentError("step and tolerance must be positive")

    @classmethod
    def from_dict(cls, d: dict | None):
        return cls(**(d or {}))

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class QMinusParametrization:
    """``k_j = q_+ + q_-`` and ``k_{j+1} = q_+ - q_-`` (spatial parts)."""

    q_plus: np.ndarray
    q_minus: np.ndarray

    @classmethod
    def from_momenta(cls, kj, kj1):
        kj, kj1 = np.asarray(kj, float), np.asarray(kj1, float)
        return cls((kj + kj1) / 2, (kj - kj1) / 2)

    @property
    def k_j(self):
        return self.q_plus + self.q_minus

    @property
    def k_j1(self):
        return self.q_plus - self.q_minus


# -- finite differences -------------------------------------------------------

def _ray_degree(vals: np.ndarray, cfg: LocalityConfig):
    """Minimal ``p`` with vanishing order ``p+1`` differences, ``-1`` for zero, None if none."""
    mags = np.abs(vals)
    scale = float(mags.max())
    if scale <= cfg.zero_atol:
        return -1, []
    diffs = vals
    orders = []
    for k in range(1, cfg.max_degree + 2):
        diffs = np.diff(diffs)
        size = float(np.abs(diffs).max()) / scale
        orders.append(size)
        if size <= cfg.tolerance:
            return k - 1, orders
    return None, orders


def test_polynomiality_numeric(evaluator: Callable, dim: int, config: LocalityConfig | None = None,
                               context: dict | None = None):
    """Finite-difference polynomiality test of ``evaluator`` on ``R^dim``.

    ``evaluator`` maps an ``(M, dim)`` array of points to ``M`` values and may
    raise :class:`SingularPointError`; the offending ray is then redrawn.
    """
    cfg = config or LocalityConfig()
    rng = np.random.default_rng(cfg.seed)
    n_samples = cfg.max_degree + 5
    t = np.arange(n_samples, dtype=float) * cfg.step
    degrees = []
    retries = 0
    for ray in range(cfg.rays):
        while True:
            # rational directions keep witnesses exactly reproducible in text
            direction = rng.integers(-16, 17, size=dim).astype(float)
            if not direction.any():
                continue
            direction /= np.linalg.norm(direction)
            base = np.round(rng.uniform(-cfg.radius, cfg.radius, size=dim) * 64) / 64
            pts = base[None, :] + t[:, None] * direction[None, :]
            try:
                vals = np.asarray(evaluator(pts))
            except SingularPointError:
                retries += 1
                if retries > cfg.max_retries:
                    return Undecided(f"every resampled ray hit the singular set ({retries} retries)")
                continue
            break
        if not np.all(np.isfinite(vals)):
            return Undecided("non-finite evaluator values")
        p, orders = _ray_degree(vals, cfg)
        if p is None:
            witness = {"ray": direction.tolist(), "base_point": base.tolist(), "step": cfg.step,
                       "max_order_tested": cfg.max_degree + 1, "ray_index": ray,
                       "relative_differences": orders, "tolerance": cfg.tolerance}
            if context:
                witness["context"] = context
            return NonPolynomial(witness)
        degrees.append(p)
    top = max(degrees)
    return Zero() if top < 0 else PolynomialOfDegree(top)


test_polynomiality_numeric.__test__ = False


def combine_verdicts(verdicts):
    """Worst case: NonPolynomial > Undecided > highest degree > Zero."""
    verdicts = list(verdicts)
    for v in verdicts:
        if isinstance(v, NonPolynomial):
            return v
    for v in verdicts:
        if isinstance(v, Undecided):
            return v
    degs = [v.p for v in verdicts if isinstance(v, PolynomialOfDegree)]
    return PolynomialOfDegree(max(degs)) if degs else Zero()


# -- numeric evaluation of reduced expressions --------------------------------

def _spectator_values(r: ReducedExpr, group, spatial: dict, energies: dict, masses) -> dict:
    """Energies and ``a`` for the spectator shells of one group."""
    d = r.model.d
    vals = {}
    a = 0.0
    for slot, kind, sp in group.prefactor.spectators:
        vec = np.asarray(spatial[slot], float)
        if kind in "+-":
            e = np.sqrt(vec @ vec + masses[sp] ** 2) * (1 if kind == "+" else -1)
        else:
            e = float(energies.get(slot, 0.0))
        vals[momentum_symbol(slot, 0).name] = e
        for mu in range(1, d):
            vals[momentum_symbol(slot, mu).name] = vec[mu - 1]
        a = a + e
    vals[A.name] = a
    return vals


def _check_singular(expr, values, rel):
    den = expr.den
    if den.is_constant():
        return
    dv = np.abs(den.evaluate_array(values))
    scale = den.abs_evaluate_array(values)
    bad = dv <= rel * scale
    if np.any(bad):
        raise SingularPointError(f"denominator {den} vanishes (relative {rel}) at a sample point", den)


def evaluate_reduced(r: ReducedExpr, bindings: dict, groups: bool = False,
                     singular_rel: float = 1e-6):
    """Evaluate the coefficients of ``r`` at numeric momenta.

    ``bindings`` holds ``q_minus`` (shape ``(dim,)`` or ``(M, dim)``), the
    spatial spectator momenta ``spectators: {slot: vector}`` and optionally
    ``energies: {slot: value}`` for spectator propagators, ``masses`` and
    ``q_plus``.  Without ``q_plus`` spatial conservation fixes it to minus
    half the spectator sum.  Returns the summed value of the groups without a
    residual energy delta, or with ``groups=True`` a list of
    ``(group, value)`` for every group.
    """
    d = r.model.d
    dim = d - 1
    masses = [float(m) for m in bindings.get("masses", r.model.masses)]
    spatial = {int(k): np.asarray(v, float) for k, v in bindings.get("spectators", {}).items()}
    energies = {int(k): v for k, v in bindings.get("energies", {}).items()}
    qm = np.asarray(bindings["q_minus"], float)
    single = qm.ndim == 1
    qm = np.atleast_2d(qm)
    if qm.shape[1] != dim:
        raise InvalidArgumentError(f"q_minus must have {dim} components")
    spect_slots = [l for l in range(1, r.n + 1) if l not in (r.j, r.j + 1)]
    missing = [l for l in spect_slots if l not in spatial]
    if missing:
        raise InvalidArgumentError(f"spatial momenta missing for spectator slots {missing}")
    if "q_plus" in bindings:
        qp = np.asarray(bindings["q_plus"], float)
    else:
        qp = -sum((spatial[l] for l in spect_slots), np.zeros(dim)) / 2
    kj = qp[None, :] + qm
    kj1 = qp[None, :] - qm
    base = {}
    for mu in range(1, d):
        base[momentum_symbol(r.j, mu).name] = kj[:, mu - 1]
        base[momentum_symbol(r.j + 1, mu).name] = kj1[:, mu - 1]
    for kappa, m in enumerate(masses):
        base[r.model.mass_symbol(kappa).name] = m
        base[omega_symbol(r.j, kappa).name] = np.sqrt(np.einsum("ij,ij->i", kj, kj) + m * m)
        base[omega_symbol(r.j + 1, kappa).name] = np.sqrt(np.einsum("ij,ij->i", kj1, kj1) + m * m)
    out = []
    for g in r.terms:
        vals = dict(base)
        vals.update(_spectator_values(r, g, spatial, energies, masses))
        v = np.zeros(len(qm), dtype=complex)
        for part, factor in ((g.re, 1.0), (g.im, 1j)):
            if part.is_zero():
                continue
            _check_singular(part, vals, singular_rel)
            v = v + factor * np.broadcast_to(part.evaluate_array(vals), (len(qm),))
        out.append((g, v[0] if single else v))
    if groups:
        return out
    total = sum((v for g, v in out if g.residual is None), np.zeros(len(qm), dtype=complex))
    return total[0] if single else total


def _base_bindings(r: ReducedExpr, rng, radius: float) -> dict:
    dim = r.model.d - 1
    spect = [l for l in range(1, r.n + 1) if l not in (r.j, r.j + 1)]
    return {"spectators": {l: np.round(rng.uniform(-radius, radius, dim) * 64) / 64 for l in spect},
            "energies": {l: float(np.round(rng.uniform(-2, 2) * 64) / 64) for l in spect}}


def test_locality_symbolic(r: ReducedExpr, config: LocalityConfig | None = None):
    """Zero when every group cancelled exactly, else the numeric fallback."""
    if r.is_zero():
        return Zero()
    return test_locality_numeric(r, config)


test_locality_symbolic.__test__ = False


def test_locality_numeric(r: ReducedExpr, config: LocalityConfig | None = None):
    cfg = config or LocalityConfig()
    live = [g for g in r.terms if not g.is_zero()]
    if any(g.residual is not None for g in live):
        return Undecided("nonzero residual energy-delta groups are supported on a hypersurface "
                         "in q_-; pointwise sampling does not apply")
    rng = np.random.default_rng(cfg.seed)
    dim = r.model.d - 1
    verdicts = []
    for b in range(max(cfg.base_points, 5)):
        bind = _base_bindings(r, rng, cfg.radius)
        for gi, g in enumerate(live):
            sub = ReducedExpr(r.n, r.j, r.model, [g])

            def ev(pts, sub=sub, bind=bind):
                return evaluate_reduced(sub, dict(bind, q_minus=pts), singular_rel=cfg.singular_rel)

            sub_cfg = LocalityConfig(**dict(cfg.to_dict(), seed=cfg.seed + 1000 * b + gi))
            ctx = {"group": str(g.prefactor), "base_bindings": {
                "spectators": {str(k): v.tolist() for k, v in bind["spectators"].items()},
                "energies": {str(k): v for k, v in bind["energies"].items()}},
                "seed": sub_cfg.seed}
            v = test_polynomiality_numeric(ev, dim, sub_cfg, context=ctx)
            if isinstance(v, NonPolynomial):
                return v
            verdicts.append(v)
    return combine_verdicts(verdicts)


test_locality_numeric.__test__ = False

"""Batch front-end: build, commute, reduce and judge scenarios from a JSON config.

Config layout::

    {"schema_version": 1, "seed": 0,
     "scenarios": [{"kind": "structure", "n": 4, "masses": [1, 2], "j": "all",
                    "expect": "Zero"}, ...]}

Expectations for verdict-producing kinds are ``"Zero"``, ``"non-Zero"``,
``"NonPolynomial"``, ``"Undecided"`` or ``"PolynomialOfDegree:<p>"``; the
``jld-sumrule`` and ``oracle`` kinds expect ``"pass"`` of their own checks.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from fractions import Fraction

from . import jld, locality, numoracle
from .commutator import commutator_at
from .energy_reduce import apply_support_constraints, reduce_double_integral, reduce_free_two_point
from .errors import ConfigError, MomlocError
from .jld import SpectralFn
from .locality import LocalityConfig
from .momdist import (FieldModel, build_structure_function, build_weighted_structure_function,
                      multiply_polynomial, omega_symbol)
from .symkernel import parse_expr

SCHEMA_VERSION = 1
KINDS = ("free-field", "structure", "weighted-structure", "multiplier", "jld-sumrule", "oracle")

DEFAULT_SCENARIOS = {
    "free-field": {"kind": "free-field", "masses": [1], "d": 4, "expect": "Zero"},
    "structure": {"kind": "structure", "n": 4, "masses": [1, 2], "d": 4, "j": "all", "expect": "Zero"},
    "weighted-structure": {"kind": "weighted-structure", "n": 3, "d": 4, "j": "all",
                           "weights": [[1, [1, 2]], [2, ["-1/2", 1]], [3, [3, 0]]], "expect": "Zero"},
    "multiplier": {"kind": "multiplier", "n": 4, "d": 4, "masses": [1], "j": 1,
                   "multiplier": "search", "expect": "non-Zero"},
    "jld-sumrule": {"kind": "jld-sumrule", "n_u": 32, "n_k": 32, "sigma": 0.5, "expect": "pass"},
    "oracle-pauli-jordan": {"kind": "oracle", "oracle": "pauli-jordan", "m": 1,
                            "points": [[0, 2], [0.5, 1.5], [1, 2], [-1, 2], [0.2, 0.9], [0, 0.8],
                                       [3, 4], [-2, 3], [0.3, -1.2], [1.5, -2.5], [2, 0], [-2, 0]],
                            "expect": "pass"},
    "oracle-time-zero": {"kind": "oracle", "oracle": "time-zero", "m": 1,
                         "eps": [0.4, 0.2, 0.1, 0.05], "expect": "pass"},
}


# -- config ------------------------------------------------------------------

def load_config(path) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return validate_config(cfg)


def validate_config(cfg) -> dict:
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    version = cfg.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})")
    scenarios = cfg.get("scenarios", [])
    if not isinstance(scenarios, list):
        raise ConfigError("'scenarios' must be a list")
    for i, sc in enumerate(scenarios):
        if not isinstance(sc, dict) or sc.get("kind") not in KINDS:
            raise ConfigError(f"scenario {i}: 'kind' must be one of {', '.join(KINDS)}")
        if "expect" not in sc:
            raise ConfigError(f"scenario {i}: missing 'expect'")
    return {"schema_version": SCHEMA_VERSION, "seed": int(cfg.get("seed", 0)), "scenarios": scenarios,
            "tolerance": cfg.get("tolerance")}


def _model(sc) -> FieldModel:
    masses = sc.get("masses", [1])
    if "N" in sc and len(masses) != sc["N"]:
        raise ConfigError(f"N={sc['N']} does not match {len(masses)} masses")
    return FieldModel(tuple(Fraction(str(m)) for m in masses), d=int(sc.get("d", 4)), sigma=sc.get("sigma"))


def _js(sc, n):
    j = sc.get("j", "all")
    if j == "all":
        return list(range(1, n))
    js = j if isinstance(j, list) else [j]
    for x in js:
        if not isinstance(x, int) or not 1 <= x <= n - 1:
            raise ConfigError(f"j={x!r} outside 1..{n - 1}")
    return js


def _matches(expect: str, verdict) -> bool:
    if expect == "Zero":
        return verdict.kind == "Zero"
    if expect == "non-Zero":
        return verdict.kind in ("NonPolynomial", "PolynomialOfDegree")
    if expect.startswith("PolynomialOfDegree:"):
        return verdict.kind == "PolynomialOfDegree" and verdict.p == int(expect.split(":", 1)[1])
    if expect in ("NonPolynomial", "Undecided", "PolynomialOfDegree"):
        return verdict.kind == expect
    raise ConfigError(f"unknown expectation {expect!r}")


def _loc_config(sc, seed, tolerance):
    d = dict(sc.get("locality", {}))
    d.setdefault("seed", seed)
    if tolerance is not None:
        d.setdefault("tolerance", tolerance)
    try:
        return LocalityConfig.from_dict(d)
    except TypeError as exc:
        raise ConfigError(f"bad locality settings: {exc}") from None


# -- scenario runners -------------------------------------------------------

def _reduced_summary(red):
    return {"surviving_groups": len(red.terms), "cancelled_groups": len(red.cancelled),
            "residual_groups": len(red.residual_groups()),
            "singular_sets": sorted({str(p) for t in red.terms for p in t.singular})}


def _run_free_field(sc, seed, tol):
    model = _model(sc)
    species = int(sc.get("species", 0))
    red = reduce_free_two_point(model, species)
    before = str(red)
    red = apply_support_constraints(red, [(omega_symbol(1, species), omega_symbol(2, species))])
    v = locality.test_locality_symbolic(red, _loc_config(sc, seed, tol))
    return [{"j": 1, "verdict": v.to_dict(), "reduced_before_constraint": before,
             **_reduced_summary(red)}], [v]


def _run_dist(sc, dist, seed, tol):
    rows, verdicts = [], []
    for j in _js(sc, dist.n):
        red = reduce_double_integral(commutator_at(dist, j), j)
        v = locality.test_locality_symbolic(red, _loc_config(sc, seed, tol))
        rows.append({"j": j, "verdict": v.to_dict(), **_reduced_summary(red)})
        verdicts.append(v)
    return rows, verdicts


def _run_structure(sc, seed, tol):
    return _run_dist(sc, build_structure_function(_model(sc), int(sc.get("n", 3))), seed, tol)


def _run_weighted(sc, seed, tol):
    weights = [(Fraction(str(m)), tuple(Fraction(str(x)) for x in w) if isinstance(w, list) else Fraction(str(w)))
               for m, w in sc["weights"]]
    dist = build_weighted_structure_function(int(sc.get("n", 3)), weights, int(sc.get("d", 4)))
    return _run_dist(sc, dist, seed, tol)


def _run_multiplier(sc, seed, tol):
    n, d = int(sc.get("n", 4)), int(sc.get("d", 4))
    masses = sc.get("masses", [1])
    choice = sc.get("multiplier", "search")
    cfg = _loc_config(sc, seed, tol)
    if choice == "search":
        w = jld.search_multiplier(n, d, tuple(Fraction(str(m)) for m in masses), j=_js(sc, n)[0],
                                  min_degree=int(sc.get("min_degree", 4)),
                                  max_power=int(sc.get("max_power", 3)), config=cfg)
        if w is None:
            v = locality.Undecided("no candidate multiplier produced a non-Zero verdict")
            return [{"j": _js(sc, n)[0], "verdict": v.to_dict(), "witness": None}], [v]
        v = locality.verdict_from_dict(w["verdict"])
        return [{"j": w["j"], "verdict": w["verdict"], "witness": w}], [v]
    if isinstance(choice, dict) and "pairs" in choice:
        M = jld.symmetrized_pair_product([tuple(p) for p in choice["pairs"]], n, d)
    elif isinstance(choice, str):
        M = parse_expr(choice)
        if not M.is_polynomial():
            raise ConfigError("multiplier must be a polynomial")
        M = M.num.scale(1 / M.den.constant_value())
    else:
        raise ConfigError("multiplier must be 'search', an expression or {'pairs': [...]}")
    dist = multiply_polynomial(build_structure_function(_model(sc), n), M)
    rows, verdicts = _run_dist(sc, dist, seed, tol)
    for r in rows:
        r["multiplier"] = str(M)
    return rows, verdicts


def _run_jld(sc, seed, tol):
    if "spectral_file" in sc:
        s = SpectralFn.load(sc["spectral_file"])
    else:
        s = jld.gaussian_spectral_fn(int(sc.get("n_u", 32)), int(sc.get("n_k", 32)), float(sc.get("sigma", 0.5)),
                                     phi1=jld.smooth_phi1)
    res = jld.sum_rule(s, sc.get("q_vectors"))
    t = float(sc.get("tolerance", tol if tol is not None else 1e-6))
    ok = res["relative_error"] <= t and res["relative_spread"] <= t
    return [{"sum_rule": res, "tolerance": t, "pass": ok}], [ok]


def _run_oracle(sc, seed, tol, out_dir=None, index=0):
    which = sc.get("oracle", "pauli-jordan")
    m = float(sc.get("m", 1))
    if which == "pauli-jordan":
        rows = []
        ok = True
        t = float(sc.get("tolerance", tol if tol is not None else 1e-6))
        for pt in sc.get("points", DEFAULT_SCENARIOS["oracle-pauli-jordan"]["points"]):
            p = numoracle.SpacetimePoint(float(pt[0]), (float(pt[1]),))
            v = numoracle.pauli_jordan_d2(m, p)
            if p.interval < 0:
                ok = ok and abs(v.value) <= t
            rows.append((p, v))
        csv_text = numoracle.oracle_csv(rows)
        name = f"scenario{index:02d}_pauli_jordan.csv"
        result = {"points": [{"t": p.t, "x": p.x[0], "interval": p.interval, "value": float(v.value),
                              "error": float(v.error)} for p, v in rows], "tolerance": t,
                  "csv": name, "pass": ok}
    elif which == "time-zero":
        seq = numoracle.time_zero_sequence(m, tuple(sc.get("eps", (0.4, 0.2, 0.1, 0.05))))
        ok = numoracle.time_zero_converges(seq)
        csv_text = numoracle.time_zero_csv(seq)
        name = f"scenario{index:02d}_time_zero.csv"
        result = {"eps": [r.eps for r in seq], "commutator_abs": [abs(r.commutator) for r in seq],
                  "distance_to_limit": [r.distance_to_limit for r in seq],
                  "error": [r.error for r in seq], "csv": name, "pass": ok}
    else:
        raise ConfigError(f"unknown oracle {which!r}")
    if out_dir is not None:
        with open(os.path.join(out_dir, name), "w") as fh:
            fh.write(csv_text)
    return [result], [ok]


RUNNERS = {"free-field": _run_free_field, "structure": _run_structure, "weighted-structure": _run_weighted,
           "multiplier": _run_multiplier, "jld-sumrule": _run_jld}


def _clean(x):
    """JSON-safe and stable: Fractions as strings, floats rounded to 12 significant digits."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if hasattr(x, "item"):
        x = x.item()
    if isinstance(x, float):
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.12g}")
    return str(x)


def run_scenarios(cfg: dict, out_dir=None, tolerance=None):
    """Execute every scenario; returns ``(report, timings)``."""
    seed = cfg.get("seed", 0)
    tol = tolerance if tolerance is not None else cfg.get("tolerance")
    results, timings = [], []
    for i, sc in enumerate(cfg["scenarios"]):
        t0 = time.perf_counter()
        expect = sc["expect"]
        if sc["kind"] == "oracle":
            rows, outcomes = _run_oracle(sc, seed, tol, out_dir, i)
        else:
            rows, outcomes = RUNNERS[sc["kind"]](sc, seed, tol)
        if sc["kind"] in ("jld-sumrule", "oracle"):
            if expect != "pass":
                raise ConfigError(f"scenario {i}: {sc['kind']} only supports expect='pass'")
            matched = all(outcomes)
        else:
            matched = all(_matches(expect, v) for v in outcomes)
        results.append({"index": i, "kind": sc["kind"], "params": sc, "expect": expect,
                        "results": rows, "matched": matched})
        timings.append({"index": i, "kind": sc["kind"], "seconds": round(time.perf_counter() - t0, 3)})
    report = {"schema_version": SCHEMA_VERSION, "seed": seed, "tolerance": tol,
              "scenarios": results, "all_matched": all(r["matched"] for r in results)}
    return _clean(report), {"schema_version": SCHEMA_VERSION, "timings": timings}


def emit_report(report: dict, timings: dict | None, out_dir) -> list:
    """Write ``report.json`` (byte-stable) and ``timings.json``; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = [os.path.join(out_dir, "report.json")]
    with open(paths[0], "w") as fh:
        fh.write(json.dumps(report, indent=1, sort_keys=True) + "\n")
    if timings is not None:
        paths.append(os.path.join(out_dir, "timings.json"))
        with open(paths[1], "w") as fh:
            fh.write(json.dumps(timings, indent=1, sort_keys=True) + "\n")
    return paths


def run_scenario(path, out_dir="momloc-out", seed=None, tolerance=None):
    cfg = load_config(path)
    if seed is not None:
        cfg["seed"] = seed
    os.makedirs(out_dir, exist_ok=True)
    report, timings = run_scenarios(cfg, out_dir, tolerance)
    emit_report(report, timings, out_dir)
    return report


# -- argparse ---------------------------------------------------------------

COMMANDS = {
    "check-free-field": ["free-field"],
    "check-structure": ["structure"],
    "check-weighted": ["weighted-structure"],
    "check-multiplier": ["multiplier"],
    "jld-sumrule": ["jld-sumrule"],
    "oracle-pauli-jordan": ["oracle-pauli-jordan"],
    "oracle-time-zero": ["oracle-time-zero"],
}


def build_parser():
    p = argparse.ArgumentParser(prog="momloc", description="Momentum-space locality checks.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in list(COMMANDS) + ["run"]:
        sp = sub.add_parser(name, help="run every scenario in --config" if name == "run" else
                            f"run the {name} scenario (defaults, or matching scenarios from --config)")
        sp.add_argument("--config", help="JSON scenario file")
        sp.add_argument("--seed", type=int, help="override the config seed")
        sp.add_argument("--out", default="momloc-out", help="output directory")
        sp.add_argument("--tolerance", type=float, help="override numeric tolerances")
    return p


def _select(cmd, cfg_scenarios):
    if cmd == "run":
        return cfg_scenarios
    keys = COMMANDS[cmd]
    if cfg_scenarios is None:
        return [dict(DEFAULT_SCENARIOS[k]) for k in keys]
    kinds = {DEFAULT_SCENARIOS[k]["kind"] for k in keys}
    chosen = [s for s in cfg_scenarios if s["kind"] in kinds]
    if cmd.startswith("oracle-"):
        which = cmd[len("oracle-"):]
        chosen = [s for s in chosen if s.get("oracle", "pauli-jordan") == which]
    return chosen


def _provenance(exc) -> str:
    """Innermost package module on the traceback, else the error's own tag."""
    here = os.path.dirname(os.path.abspath(__file__))
    name = None
    tb = exc.__traceback__
    while tb is not None:
        fn = os.path.abspath(tb.tb_frame.f_code.co_filename)
        if os.path.dirname(fn) == here:
            name = os.path.splitext(os.path.basename(fn))[0]
        tb = tb.tb_next
    return name if name and name != "cli" else exc.module


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.config:
            cfg = load_config(args.config)
        elif args.command == "run":
            raise ConfigError("'run' needs --config")
        else:
            cfg = {"schema_version": SCHEMA_VERSION, "seed": 0, "scenarios": None, "tolerance": None}
        cfg["scenarios"] = _select(args.command, cfg["scenarios"])
        if args.seed is not None:
            cfg["seed"] = args.seed
        os.makedirs(args.out, exist_ok=True)
        report, timings = run_scenarios(cfg, args.out, args.tolerance)
        emit_report(report, timings, args.out)
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        print(f"momloc: config error: {exc}", file=sys.stderr)
        return 2
    except MomlocError as exc:
        print(f"momloc: error in module {_provenance(exc)}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    for sc in report["scenarios"]:
        status = "ok" if sc["matched"] else "MISMATCH"
        print(f"[{status}] scenario {sc['index']} {sc['kind']} (expect {sc['expect']})")
    print(f"report written to {os.path.join(args.out, 'report.json')}")
    return 0 if report["all_matched"] else 1


if __name__ == "__main__":
    sys.exit(main())

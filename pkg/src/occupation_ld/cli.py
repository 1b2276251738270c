"""Command-line interface: ``occld rate | audit | check``.

Exit codes: 0 pass, 1 check failure, 2 invalid input, 3 route not
applicable, 4 method/event mismatch.
"""
from __future__ import annotations

import argparse
import csv
import io as _io
import itertools
import math
import sys
from pathlib import Path

import numpy as np

from . import io
from .chain import ChainModel, ModelError, ProbMeasure, build_model, check_reversibility, is_abs_continuous, semigroup
from .entropy import contraction_rate
from .feynman_kac import (
    build_tilt,
    fk_identity_check,
    fk_monte_carlo,
    tilted_contraction_check,
    tilted_invariance_check,
    tilted_self_adjointness,
)
from .rate import RouteError, limit_check, rate_I, skeleton_dirichlet_check, spectral_rate, spectral_value_discrete
from .simulate import EventError, ThresholdEvent, bound_audit, threshold_audit

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_ROUTE, EXIT_EVENT = 0, 1, 2, 3, 4
ROUTES = ("variational", "spectral", "contraction")
SUITES = ("fk", "tilt", "limits", "dirichlet", "all")
SUITE_ALIASES = {"lemma57": "dirichlet"}


def _emit(doc, out: str | None) -> None:
    text = io.dumps(doc)
    if out:
        Path(out).write_text(text)
    sys.stdout.write(text)


# ------------------------------------------------------------------- rate

def _skeleton(model: ChainModel, h: float) -> ChainModel:
    p = semigroup(model, h)
    p = p / p.sum(axis=1, keepdims=True)
    return build_model("discrete", p, model.m, model.states)


def _route_record(model: ChainModel, mu: ProbMeasure, route: str, h: float) -> dict:
    if route == "variational":
        res = rate_I(model, mu)
        rec = res.record()
        rec.update(converged=res.converged, gradient_norm=res.gradient_norm)
        return rec
    if route == "spectral":
        if model.kind == "continuous":
            return spectral_rate(model, mu).record()
        val = spectral_value_discrete(model, mu)
        return {"route": "spectral", "value": val, "optimizer": None, "iterations": 0,
                "informational": True}
    # contraction: on a generator, run on the h-skeleton and rescale
    target = model if model.kind == "discrete" else _skeleton(model, h)
    scale = 1.0 if model.kind == "discrete" else h
    if not is_abs_continuous(mu, model):
        return {"route": "contraction", "value": math.inf, "optimizer": None, "iterations": 0}
    res = contraction_rate(target, mu)
    rec = res.record()
    rec["value"] = res.value / scale
    if model.kind == "continuous":
        rec["skeleton_h"] = h
    if "q" in res.extra:
        rec.update(kernel=res.extra["q"], gap=res.extra["gap"], solver=res.extra["method"])
    if "certificate" in res.extra:
        c = res.extra["certificate"]
        rec["certificate"] = {"rows": [model.states[i] for i in c.rows],
                              "columns": [model.states[j] for j in c.columns],
                              "row_mass": c.row_mass, "column_mass": c.column_mass}
    return rec


def cmd_rate(args) -> int:
    model = io.load_model(args.model)
    mu = io.load_measure(args.measure, model)
    routes = ROUTES if args.route == "all" else (args.route,)
    records = []
    for route in routes:
        try:
            records.append(_route_record(model, mu, route, args.h))
        except RouteError as exc:
            if args.route != "all":
                raise
            records.append({"route": route, "value": None, "not_applicable": str(exc)})
    doc = {"kind": model.kind, "records": records}
    if args.route == "all":
        vals = {r["route"]: r["value"] for r in records
                if r["value"] is not None and not r.get("informational")}
        deltas = {}
        for a, b in itertools.combinations(vals, 2):
            x, y = vals[a], vals[b]
            deltas[f"{a} vs {b}"] = 0.0 if x == y else abs(x - y)
        doc["deltas"] = deltas
    _emit(doc, args.out)
    return EXIT_OK


# ------------------------------------------------------------------ audit

def _audit_csv(model: ChainModel, series) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["start", "n", "p_n", "std_error", "method"])
    for x, n, p, se, method in series:
        w.writerow([model.states[x], n, repr(float(p)), repr(float(se)), method])
    return buf.getvalue()


def cmd_audit(args) -> int:
    exp = io.load_experiment(args.experiment)
    model = exp.model
    method = "exact" if args.exact else "mc"
    trials = args.trials if args.trials is not None else exp.trials
    seed = args.seed if args.seed is not None else exp.seed
    kw = dict(starts=exp.starts, method=method, h=exp.h, trials=trials, seed=seed,
              workers=args.workers)
    if isinstance(exp.event, ThresholdEvent):
        rep = threshold_audit(model, exp.event, exp.n_grid, **kw)
        rates = {"rate": rep.rate_I}
    else:
        rep = bound_audit(model, exp.event, exp.n_grid, **kw)
        rates = {"rate_hat": rep.rate_hat, "rate_I": rep.rate_I}
    starts = []
    for s in rep.starts:
        rec = {"start": model.states[s.start], "slope": s.slope, "exempt": s.exempt,
               "estimates": [{"n": n, "slope": e} for n, e in s.estimates]}
        if isinstance(exp.event, ThresholdEvent):
            rec.update(upper=s.upper_I, lower=s.lower)
        else:
            rec.update(upper_hat=s.upper_hat, upper_I=s.upper_I, lower=s.lower)
        starts.append(rec)
    doc = {"method": method, **rates, "tolerance": rep.tol,
           "thin_set": [model.states[i] for i in rep.thin_set],
           "mutual_reachability": rep.mutual_reachability,
           "verdicts": rep.verdicts, "starts": starts}
    if method == "mc":
        doc.update(trials=trials, seed=seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "audit.csv").write_text(_audit_csv(model, rep.series))
    (out / "audit.json").write_text(io.dumps(doc))
    sys.stdout.write(io.dumps(doc))
    return EXIT_FAIL if "fail" in rep.verdicts.values() else EXIT_OK


# ------------------------------------------------------------------ check

CHECK_TIMES = (0.1, 1.0, 10.0)
TILT_T0, TILT_ETA, TILT_EPS = 1.0, 0.5, 0.1
LIMIT_GRID = (0.2, 0.1, 0.05, 0.025)
DIRICHLET_GRID = (1.0, 0.1, 0.01)


def _not_applicable(check: str, reason: str) -> dict:
    return {"check": check, "status": "not-applicable", "reason": reason}


def _random_measure(model: ChainModel, rng: np.random.Generator) -> ProbMeasure:
    w = rng.uniform(0.1, 1.0, model.n) * (model.m > 0)
    return ProbMeasure.normalized(w)


def _suite_fk(model, tilts, args):
    out = []
    for k, tilt in enumerate(tilts):
        for t in CHECK_TIMES:
            out.append({**fk_identity_check(model, tilt, t).record(), "tilt": k, "t": t})
        if args.trials:
            est, se = fk_monte_carlo(model, tilt, 0, 1.0, args.trials, args.seed, args.workers)
            exact = float(tilt.v_eps[0])
            out.append({"check": "fk_monte_carlo", "residual": abs(est - exact),
                        "tolerance": 4 * se, "pass": abs(est - exact) <= 4 * se,
                        "tilt": k, "t": 1.0, "estimate": est, "exact": exact})
    return out


def _suite_tilt(model, tilts, reversible, reason):
    if not reversible:
        return [_not_applicable("tilted_invariance", reason),
                _not_applicable("tilted_contraction", reason),
                _not_applicable("tilted_self_adjointness", reason)]
    out = []
    for k, tilt in enumerate(tilts):
        for t in CHECK_TIMES:
            out.append({**tilted_invariance_check(model, tilt, t).record(), "tilt": k, "t": t})
            out.append({**tilted_contraction_check(model, tilt, t).record(), "tilt": k, "t": t})
            sa = tilted_self_adjointness(model, tilt.V, t)
            out.append({"check": "tilted_self_adjointness", "residual": sa, "tolerance": 1e-9,
                        "pass": sa <= 1e-9, "tilt": k, "t": t})
    return out


def _suite_limits(model, mu):
    lc = limit_check(model, mu, LIMIT_GRID)
    table = [{"h": r.h, "rate_h": r.rate_h, "scaled": r.scaled, "error": r.error} for r in lc.rows]
    worst = max(max(r.rate_h - r.h * lc.rate, 0.0) for r in lc.rows)
    errs = [r.error for r in lc.rows]
    rise = max([max(b - a, 0.0) for a, b in zip(errs, errs[1:])] + [0.0])
    checks = [
        {"check": "skeleton_rate_bound", "residual": worst, "tolerance": 1e-9, "pass": worst <= 1e-9},
        {"check": "skeleton_rate_monotone", "residual": rise, "tolerance": 1e-9, "pass": lc.monotone},
        {"check": "skeleton_rate_limit", "residual": errs[-1], "tolerance": lc.tol, "pass": lc.final_ok},
    ]
    return checks, {"rate": lc.rate, "rows": table}


def _suite_dirichlet(model, mu, reversible, reason):
    if not reversible:
        return [_not_applicable("skeleton_dirichlet", reason)], None
    dc = skeleton_dirichlet_check(model, mu, DIRICHLET_GRID)
    checks = [{"check": "skeleton_dirichlet", "residual": max(r.lhs - r.bound, 0.0),
               "tolerance": 1e-9, "pass": r.passed, "h": r.h} for r in dc.rows]
    checks.append({"check": "skeleton_dirichlet_increasing", "residual": 0.0 if dc.increasing else 1.0,
                   "tolerance": 0.0, "pass": dc.increasing})
    table = [{"h": r.h, "lhs": r.lhs, "bound": r.bound, "scaled": r.scaled} for r in dc.rows]
    return checks, {"rate": dc.rate, "rows": table}


def cmd_check(args) -> int:
    model = io.load_model(args.model)
    if model.kind != "continuous":
        raise RouteError("check suites need a continuous model (generator)")
    suite = SUITE_ALIASES.get(args.suite, args.suite)
    wanted = {"fk", "tilt", "limits", "dirichlet"} if suite == "all" else {suite}
    rng = np.random.default_rng(args.seed)
    tilts = [build_tilt(model, rng.uniform(0.0, 1.0, model.n), TILT_T0, TILT_ETA, TILT_EPS)
             for _ in range(args.tilts)]
    mu = io.load_measure(args.measure, model) if args.measure else _random_measure(model, rng)
    reversible, viol = check_reversibility(model)
    reason = f"model is not reversible (max detailed-balance violation {viol!r})"

    checks, tables = [], {}
    if "fk" in wanted:
        checks += _suite_fk(model, tilts, args)
    if "tilt" in wanted:
        checks += _suite_tilt(model, tilts, reversible, reason)
    if "limits" in wanted:
        c, tables["limits"] = _suite_limits(model, mu)
        checks += c
    if "dirichlet" in wanted:
        c, tab = _suite_dirichlet(model, mu, reversible, reason)
        checks += c
        if tab is not None:
            tables["dirichlet"] = tab
    failed = sum(1 for c in checks if c.get("pass") is False)
    doc = {"suite": suite, "seed": args.seed, "measure": mu.mu, "checks": checks,
           "tables": tables, "failed": failed}
    _emit(doc, args.out)
    return EXIT_FAIL if failed else EXIT_OK


# ----------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="occld", description="Occupation-time large deviations on finite Markov models.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("rate", help="rate function by one or all routes")
    r.add_argument("model")
    r.add_argument("measure")
    r.add_argument("--route", choices=ROUTES + ("all",), default="all")
    r.add_argument("--h", type=float, default=0.01, help="skeleton step for the contraction route on generators")
    r.add_argument("--out", help="also write the JSON report here")
    r.set_defaults(func=cmd_rate)

    a = sub.add_parser("audit", help="audit the bounds on an experiment")
    a.add_argument("experiment")
    mode = a.add_mutually_exclusive_group(required=True)
    mode.add_argument("--exact", action="store_true")
    mode.add_argument("--mc", action="store_true")
    a.add_argument("--trials", type=int)
    a.add_argument("--seed", type=int)
    a.add_argument("--workers", type=int, help="threads for Monte Carlo (default: $OCCLD_THREADS or 1)")
    a.add_argument("--out", default="audit_out", help="directory for audit.csv and audit.json")
    a.set_defaults(func=cmd_audit)

    c = sub.add_parser("check", help="identity and inequality checks on a generator")
    c.add_argument("model")
    c.add_argument("--suite", choices=SUITES + tuple(SUITE_ALIASES), default="all")
    c.add_argument("--measure", help="measure file for the limits and dirichlet suites")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--tilts", type=int, default=3, help="number of random tilts")
    c.add_argument("--trials", type=int, default=0, help="Monte Carlo paths for the fk suite (0 skips)")
    c.add_argument("--workers", type=int)
    c.add_argument("--out", help="also write the JSON report here")
    c.set_defaults(func=cmd_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RouteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ROUTE
    except EventError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EVENT
    except (ModelError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

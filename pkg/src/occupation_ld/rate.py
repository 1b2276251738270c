"""Donsker-Varadhan rate functions for occupation measures.

Three routes are provided: the variational formula over positive test
functions (discrete log-form and continuous generator-form), the
Dirichlet-form formula for reversible generators, and the short-time
rate ``rate_h`` built from the transition matrix p_h. The contraction
route lives in :mod:`occupation_ld.entropy`.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import logsumexp

from .chain import (
    ChainModel,
    ModelError,
    ProbMeasure,
    check_reversibility,
    is_abs_continuous,
    semigroup,
    worst_balance_pair,
)

log = logging.getLogger(__name__)

ROUTES = ("variational-discrete", "variational-continuous", "spectral", "contraction", "rate-h")


class RouteError(ModelError):
    """A rate route does not apply to the given model (e.g. spectral on non-reversible)."""


@dataclass(frozen=True)
class OptimizerOptions:
    tol: float = 1e-10
    max_iter: int = 10_000
    armijo_c: float = 1e-4
    shrink: float = 0.5
    cap: float = 1e6
    stall_grad: float = 1e-6
    stall_steps: int = 50
    method: str = "newton"  # or "gradient"


DEFAULT_OPTIONS = OptimizerOptions()


@dataclass
class RateResult:
    value: float
    route: str
    optimizer: np.ndarray | None = None
    iterations: int = 0
    gradient_norm: float = 0.0
    converged: bool = True
    log_optimizer: np.ndarray | None = None
    trace: list[float] = field(default_factory=list, repr=False)
    extra: dict = field(default_factory=dict, repr=False)

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.value)

    def record(self) -> dict:
        rec = {
            "route": self.route,
            "value": self.value,
            "optimizer": None if self.optimizer is None else [float(x) for x in self.optimizer],
            "iterations": self.iterations,
        }
        return rec


# objective oracles in w = log u; each returns (value, gradient, hessian)
Oracle = Callable[[np.ndarray], tuple[float, np.ndarray, np.ndarray]]


def _discrete_oracle(P: np.ndarray, mu: np.ndarray) -> Oracle:
    with np.errstate(divide="ignore"):
        logP = np.log(P)
    rows = np.flatnonzero(mu > 0)
    logP = logP[rows]
    mr = mu[rows]

    def oracle(w):
        z = logP + w[None, :]
        lpu = logsumexp(z, axis=1)
        val = float(mr @ (w[rows] - lpu))
        pi = np.exp(z - lpu[:, None])
        flow = mr @ pi
        grad = mu - flow
        hess = (pi.T * mr) @ pi - np.diag(flow)
        return val, grad, hess

    return oracle


def _continuous_oracle(Q: np.ndarray, mu: np.ndarray) -> Oracle:
    n = Q.shape[0]
    rows = np.flatnonzero(mu > 0)
    off = Q.copy()
    np.fill_diagonal(off, 0.0)
    off = off[rows]
    exit_rates = -np.diag(Q)[rows]
    mr = mu[rows]
    base = float(mr @ exit_rates)

    def oracle(w):
        with np.errstate(over="ignore", invalid="ignore"):
            A = (mr[:, None] * off) * np.exp(w[None, :] - w[rows][:, None])
        if not np.all(np.isfinite(A)):
            return -math.inf, np.zeros(n), np.zeros((n, n))
        val = base - float(A.sum())
        full = np.zeros((n, n))
        full[rows] = A
        grad = full.sum(axis=1) - full.sum(axis=0)
        W = full + full.T
        hess = W - np.diag(W.sum(axis=1))
        return val, grad, hess

    return oracle


def _line_search(oracle: Oracle, w, f, d, slope, s, opts):
    # objective differences below rounding of f cannot certify an increase
    floor = 8 * np.finfo(float).eps * max(1.0, abs(f))
    while s > 1e-30:
        w_try = w.copy()
        w_try[1:] += s * d
        out = oracle(w_try)
        if math.isfinite(out[0]) and out[0] >= f + opts.armijo_c * s * slope - floor:
            return s, w_try, out
        s *= opts.shrink
    return None


def _newton_direction(H, gr):
    negH = -H[1:, 1:]
    reg = 1e-12 * max(1.0, float(np.trace(negH)))
    try:
        d = np.linalg.solve(negH + reg * np.eye(len(gr)), gr)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(d)) or d @ gr <= 0:
        return None
    return d


def _maximize(oracle: Oracle, n: int, opts: OptimizerOptions, route: str) -> RateResult:
    """Concave ascent in w with gauge w[0] = 0 and Armijo backtracking.

    The default direction is the damped Newton step; plain gradient steps
    (with an adaptive initial step) are used when the Hessian is singular
    or the Newton search fails.
    """
    w = np.zeros(n)
    f, g, H = oracle(w)
    trace = [f]
    step = 1.0
    over_cap = 0
    it = 0
    gnorm = float(np.linalg.norm(g[1:]))
    while it < opts.max_iter and gnorm > opts.tol:
        gr = g[1:]
        found = None
        if opts.method == "newton" and n > 1:
            d = _newton_direction(H, gr)
            if d is not None:
                found = _line_search(oracle, w, f, d, float(gr @ d), 1.0, opts)
        if found is None:
            found = _line_search(oracle, w, f, gr, float(gr @ gr), step, opts)
            if found is not None:
                step = min(2.0 * found[0], 1e12)
        it += 1
        if found is None:
            log.debug("%s: line search stalled at iteration %d", route, it)
            break
        _, w, (f, g, H) = found
        trace.append(f)
        gnorm = float(np.linalg.norm(g[1:]))
        if f > opts.cap and gnorm > opts.stall_grad:
            over_cap += 1
            if over_cap >= opts.stall_steps:
                return RateResult(math.inf, route, None, it, gnorm, True, w, trace)
        else:
            over_cap = 0
    converged = gnorm <= opts.tol
    if not converged:
        log.warning("%s: stopped after %d iterations with gradient norm %.3e", route, it, gnorm)
    with np.errstate(under="ignore"):
        u = np.exp(w)
    return RateResult(max(f, 0.0), route, u, it, gnorm, converged, w, trace)


def dv_rate_discrete(model: ChainModel, mu: ProbMeasure, opts: OptimizerOptions = DEFAULT_OPTIONS,
                     *, P: np.ndarray | None = None, route: str = "variational-discrete") -> RateResult:
    """sup over u > 0 of sum_i mu_i log(u_i / (P u)_i).

    ``P`` overrides the model kernel (used by :func:`rate_h` with P = p_h).
    """
    if P is None:
        if model.kind != "discrete":
            raise RouteError("dv_rate_discrete needs a discrete model")
        P = model.P
    return _maximize(_discrete_oracle(np.asarray(P, float), mu.mu), len(mu), opts, route)


def dv_rate_continuous(model: ChainModel, mu: ProbMeasure,
                       opts: OptimizerOptions = DEFAULT_OPTIONS) -> RateResult:
    """sup over v > 0 of sum_i mu_i (-(Q v)_i / v_i)."""
    if model.kind != "continuous":
        raise RouteError("dv_rate_continuous needs a continuous model")
    return _maximize(_continuous_oracle(model.Q, mu.mu), model.n, opts, "variational-continuous")


def rate_hat(model: ChainModel, mu: ProbMeasure, opts: OptimizerOptions = DEFAULT_OPTIONS) -> RateResult:
    if model.kind == "discrete":
        return dv_rate_discrete(model, mu, opts)
    return dv_rate_continuous(model, mu, opts)


def rate_I(model: ChainModel, mu: ProbMeasure, opts: OptimizerOptions = DEFAULT_OPTIONS) -> RateResult:
    """The rate with the absolute-continuity requirement: +inf unless mu << m."""
    if not is_abs_continuous(mu, model):
        route = "variational-discrete" if model.kind == "discrete" else "variational-continuous"
        return RateResult(math.inf, route, extra={"reason": "mu not absolutely continuous w.r.t. m"})
    return rate_hat(model, mu, opts)


def rate_h(model: ChainModel, mu: ProbMeasure, h: float,
           opts: OptimizerOptions = DEFAULT_OPTIONS) -> RateResult:
    """The log-form rate of the skeleton chain p_h."""
    if model.kind != "continuous":
        raise RouteError("rate_h needs a continuous model")
    if not h > 0:
        raise ModelError(f"h must be positive, got {h!r}")
    res = dv_rate_discrete(model, mu, opts, P=semigroup(model, h), route="rate-h")
    res.extra["h"] = h
    return res


@dataclass
class LimitRow:
    h: float
    rate_h: float
    scaled: float
    error: float
    below_bound: bool  # Ihat_h <= h * Ihat + 1e-9


@dataclass
class LimitCheck:
    rate: float
    rows: list[LimitRow]
    monotone: bool
    final_ok: bool
    tol: float

    @property
    def passed(self) -> bool:
        return self.monotone and self.final_ok and all(r.below_bound for r in self.rows)


def limit_check(model: ChainModel, mu: ProbMeasure, h_grid: Sequence[float],
                tol: float | None = None, slack: float = 1e-9,
                opts: OptimizerOptions = DEFAULT_OPTIONS) -> LimitCheck:
    """Tabulate (h, Ihat_h/h, |Ihat_h/h - Ihat|) along a decreasing grid.

    Errors must not increase along the grid (up to ``slack``) and the last
    must be at most ``tol`` (default: 5% of the rate).
    """
    h_grid = [float(h) for h in h_grid]
    if any(h <= 0 for h in h_grid) or any(a <= b for a, b in zip(h_grid, h_grid[1:])):
        raise ModelError("h_grid must be strictly decreasing positive values")
    full = dv_rate_continuous(model, mu, opts).value
    if tol is None:
        tol = 0.05 * full + slack
    rows = []
    for h in h_grid:
        rh = rate_h(model, mu, h, opts).value
        rows.append(LimitRow(h, rh, rh / h, abs(rh / h - full), rh <= h * full + slack))
    errs = [r.error for r in rows]
    monotone = all(b <= a + slack for a, b in zip(errs, errs[1:]))
    return LimitCheck(full, rows, monotone, errs[-1] <= tol, tol)


def dirichlet_form(model: ChainModel, f, g) -> float:
    """E(f, g) = sum_i m_i g_i (-(Q f))_i."""
    if model.kind != "continuous":
        raise RouteError("the Dirichlet form is defined for generators")
    ok, viol = check_reversibility(model)
    if not ok:
        warnings.warn(f"model is not reversible (max detailed-balance violation {viol:.3e})",
                      stacklevel=2)
    f = np.asarray(f, float)
    g = np.asarray(g, float)
    return float(np.sum(model.m * g * -(model.Q @ f)))


def density_root(model: ChainModel, mu: ProbMeasure) -> np.ndarray:
    """f = sqrt(dmu/dm) on {m > 0}, zero elsewhere."""
    f = np.zeros(model.n)
    pos = model.m > 0
    f[pos] = np.sqrt(mu.mu[pos] / model.m[pos])
    return f


def _require_reversible(model: ChainModel) -> None:
    ok, _ = check_reversibility(model)
    if not ok:
        i, j, v = worst_balance_pair(model)
        raise RouteError(
            f"model is not reversible: detailed balance fails for states "
            f"({model.states[i]}, {model.states[j]}) with violation {v:.3e}")


def spectral_rate(model: ChainModel, mu: ProbMeasure) -> RateResult:
    """Rate of a reversible generator as the Dirichlet form of sqrt(dmu/dm)."""
    if model.kind != "continuous":
        raise RouteError("spectral route needs a continuous model")
    _require_reversible(model)
    if not is_abs_continuous(mu, model):
        return RateResult(math.inf, "spectral", extra={"reason": "mu not absolutely continuous w.r.t. m"})
    f = density_root(model, mu)
    val = float(np.sum(model.m * f * -(model.Q @ f)))
    return RateResult(max(val, 0.0), "spectral")


def spectral_value_discrete(model: ChainModel, mu: ProbMeasure) -> float:
    """sum_i m_i f_i ((I - P) f)_i for a reversible discrete model.

    Informational only; no identity with the discrete rate is claimed.
    """
    _require_reversible(model)
    if not is_abs_continuous(mu, model):
        return math.inf
    f = density_root(model, mu)
    return float(np.sum(model.m * f * (f - model.P @ f)))


@dataclass
class SkeletonDirichletRow:
    h: float
    lhs: float
    bound: float
    scaled: float
    passed: bool


@dataclass
class SkeletonDirichletCheck:
    rate: float
    rows: list[SkeletonDirichletRow]
    increasing: bool

    @property
    def passed(self) -> bool:
        return self.increasing and all(r.passed for r in self.rows)


def skeleton_dirichlet_check(model: ChainModel, mu: ProbMeasure, h_grid: Sequence[float],
                             slack: float = 1e-9,
                             opts: OptimizerOptions = DEFAULT_OPTIONS) -> SkeletonDirichletCheck:
    """Check sum m f (f - p_h f) <= h I(mu) with f = sqrt(dmu/dm).

    Also checks that lhs / h is nondecreasing as h decreases along the grid.
    """
    _require_reversible(model)
    if not is_abs_continuous(mu, model):
        raise ModelError("mu must be absolutely continuous w.r.t. m")
    rate = rate_I(model, mu, opts).value
    f = density_root(model, mu)
    rows = []
    for h in h_grid:
        lhs = float(np.sum(model.m * f * (f - semigroup(model, h) @ f)))
        bound = h * rate
        rows.append(SkeletonDirichletRow(float(h), lhs, bound, lhs / h, lhs <= bound + slack))
    order = sorted(rows, key=lambda r: -r.h)
    increasing = all(b.scaled >= a.scaled - slack for a, b in zip(order, order[1:]))
    return SkeletonDirichletCheck(rate, rows, increasing)


# name used by the documented interface
lemma57_check = skeleton_dirichlet_check

"""Contraction route: minimal entropy rate over stationary Markov sources.

For a discrete model with kernel P the problem

    minimize   sum_ij nu_ij log(nu_ij / (mu_i P_ij))
    subject to nu >= 0, row sums = mu, column sums = mu

is an I-projection of mu (x) P onto a transportation polytope. It is
solved by alternating row/column scaling (Sinkhorn-type multiplicative
updates) with a duality-gap stopping rule, and by SLSQP when the
scaling iteration does not settle.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import networkx as nx
import numpy as np
from scipy.optimize import minimize

from .chain import ChainModel, ProbMeasure
from .rate import RateResult, RouteError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MarkovSource:
    """Stationary Markov law with marginal ``mu`` and kernel ``q``."""

    mu: ProbMeasure
    q: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=float)
        if q.shape != (len(self.mu), len(self.mu)):
            raise ValueError("kernel shape does not match the marginal")
        if np.any(q < 0) or np.max(np.abs(q.sum(axis=1) - 1)) > 1e-10:
            raise ValueError("kernel rows must be probability vectors")
        if np.max(np.abs(self.mu.mu @ q - self.mu.mu)) > 1e-10:
            raise ValueError("marginal is not stationary for the kernel")
        q.setflags(write=False)
        object.__setattr__(self, "q", q)


def entropy_rate(mu, q, model: ChainModel) -> float:
    """sum_ij mu_i q_ij log(q_ij / P_ij), with 0 log 0 = 0.

    ``mu`` may be a :class:`ProbMeasure` or a :class:`MarkovSource` (then
    ``q`` is ignored and may be None). Returns +inf when a row carrying
    mass uses a transition forbidden by P.
    """
    if isinstance(mu, MarkovSource):
        mu, q = mu.mu, mu.q
    P = model.P
    mu = mu.mu
    q = np.asarray(q, float)
    total = 0.0
    for i in np.flatnonzero(mu > 0):
        for j in np.flatnonzero(q[i] > 0):
            if P[i, j] <= 0:
                return math.inf
            total += mu[i] * q[i, j] * math.log(q[i, j] / P[i, j])
    return total


def pair_entropy(nu: np.ndarray, mu: np.ndarray, P: np.ndarray) -> float:
    """sum nu log(nu / (mu (x) P)) over the positive entries of nu."""
    ref = mu[:, None] * P
    pos = nu > 0
    if np.any(pos & (ref <= 0)):
        return math.inf
    return float(np.sum(nu[pos] * np.log(nu[pos] / ref[pos])))


@dataclass(frozen=True)
class Infeasibility:
    """Hall-type obstruction: rows ``rows`` carry more mass than their allowed columns."""

    rows: list[int]
    columns: list[int]
    row_mass: float
    column_mass: float


def find_obstruction(mu: np.ndarray, P: np.ndarray) -> Infeasibility | None:
    """Look for a set A with mu(A) > mu(N(A)), N(A) the P-successors of A.

    A stationary pair measure with marginal mu and support inside that of
    mu (x) P exists iff no such A exists. The set is read off a minimum
    cut of the bipartite transport network.
    """
    supp = np.flatnonzero(mu > 0)
    G = nx.DiGraph()
    for i in supp:
        G.add_edge("s", ("r", int(i)), capacity=float(mu[i]))
        G.add_edge(("c", int(i)), "t", capacity=float(mu[i]))
        for j in supp:
            if P[i, j] > 0:
                G.add_edge(("r", int(i)), ("c", int(j)))  # unbounded
    if "t" not in G or "s" not in G:
        return None
    cut, (src_side, _) = nx.minimum_cut(G, "s", "t")
    total = float(mu[supp].sum())
    if cut >= total - 1e-12:
        return None
    rows = sorted(i for kind, i in (x for x in src_side if isinstance(x, tuple)) if kind == "r")
    cols = sorted({int(j) for i in rows for j in supp if P[i, j] > 0})
    return Infeasibility(rows, cols, float(mu[rows].sum()), float(mu[cols].sum()))


def _sinkhorn(K: np.ndarray, mu: np.ndarray, tol: float, max_iter: int):
    a = np.ones(len(mu))
    b = np.ones(len(mu))
    gap = math.inf
    for it in range(1, max_iter + 1):
        a = mu / (K @ b)
        b = mu / (K.T @ a)
        nu = a[:, None] * K * b[None, :]
        row_err = nu.sum(axis=1) - mu
        # columns are exact after the b-update; the gap is sum (row - mu) log a
        gap = abs(float(row_err @ np.log(a)))
        if gap <= tol and np.abs(row_err).sum() <= tol:
            return nu, a, b, gap, it, True
    return nu, a, b, gap, max_iter, False


def _slsqp(K: np.ndarray, mu: np.ndarray, nu0: np.ndarray):
    n = len(mu)
    pat = K > 0
    idx = np.flatnonzero(pat.ravel())
    logK = np.log(K.ravel()[idx])

    def unpack(x):
        nu = np.zeros(n * n)
        nu[idx] = x
        return nu.reshape(n, n)

    def fun(x):
        x = np.maximum(x, 1e-300)
        return float(np.sum(x * (np.log(x) - logK)))

    def jac(x):
        x = np.maximum(x, 1e-300)
        return np.log(x) - logK + 1.0

    cons = [
        {"type": "eq", "fun": lambda x: unpack(x).sum(axis=1) - mu},
        {"type": "eq", "fun": lambda x: unpack(x).sum(axis=0)[:-1] - mu[:-1]},
    ]
    res = minimize(fun, np.maximum(nu0.ravel()[idx], 1e-12), jac=jac, method="SLSQP",
                   bounds=[(0.0, 1.0)] * len(idx), constraints=cons,
                   options={"ftol": 1e-14, "maxiter": 2000})
    return unpack(np.maximum(res.x, 0.0)), bool(res.success)


def contraction_rate(model: ChainModel, mu: ProbMeasure, tol: float = 1e-9,
                     max_iter: int = 200_000) -> RateResult:
    """Minimal entropy rate over Markov sources with stationary marginal mu.

    ``extra`` carries the optimal kernel ``q``, the duality ``gap``, the
    ``method`` used and, when infeasible, the obstruction certificate.
    """
    if model.kind != "discrete":
        raise RouteError("contraction route needs a discrete model")
    P = model.P
    n = model.n
    m = mu.mu
    supp = np.flatnonzero(m > 0)
    obstruction = find_obstruction(m, P)
    if obstruction is not None:
        return RateResult(math.inf, "contraction", extra={"certificate": obstruction})
    Ks = m[supp][:, None] * P[np.ix_(supp, supp)]
    nu_s, a, b, gap, its, ok = _sinkhorn(Ks, m[supp], tol, max_iter)
    method = "scaling"
    if not ok:
        log.info("scaling iteration did not reach gap %.1e (gap %.3e); using SLSQP", tol, gap)
        nu_s, sq_ok = _slsqp(Ks, m[supp], nu_s)
        method = "slsqp"
        ok = sq_ok
    nu = np.zeros((n, n))
    nu[np.ix_(supp, supp)] = nu_s
    q = P.copy()
    q[supp] = nu[supp] / m[supp][:, None]
    value = pair_entropy(nu, m, P)
    return RateResult(max(value, 0.0), "contraction", None, its, gap, ok,
                      extra={"q": q, "gap": gap, "method": method, "nu": nu})


@dataclass
class KernelReport:
    q: np.ndarray
    stationarity_residual: float
    entropy: float
    value_residual: float
    boundary: bool
    passed: bool
    note: str = ""


def optimal_kernel(P: np.ndarray, u: np.ndarray) -> np.ndarray:
    """q_ij = P_ij u_j / (P u)_i."""
    u = np.asarray(u, float)
    return P * u[None, :] / (P @ u)[:, None]


def verify_optimal_kernel(model: ChainModel, mu: ProbMeasure, u_star, dv_value: float,
                          tol: float = 1e-5, boundary_span: float = 20.0) -> KernelReport:
    """Link the variational optimizer to the contraction route.

    The tilted kernel built from ``u_star`` should leave mu stationary and
    have entropy rate equal to the variational value. When ``u_star`` spans
    more than ``boundary_span`` in log scale the optimum sits on the
    boundary; stationarity is then reported but not asserted.
    """
    u = np.asarray(u_star, float)
    P = model.P
    with np.errstate(divide="ignore"):
        logs = np.log(u)
    boundary = bool(np.any(u <= 0) or np.ptp(logs[np.isfinite(logs)]) > boundary_span)
    q = optimal_kernel(P, np.maximum(u, np.finfo(float).tiny))
    stat = float(np.abs(mu.mu @ q - mu.mu).sum())
    ent = entropy_rate(mu, q, model)
    vres = abs(ent - dv_value)
    if boundary:
        return KernelReport(q, stat, ent, vres, True, True,
                            "boundary optimum: stationarity not asserted")
    return KernelReport(q, stat, ent, vres, False, stat <= tol and vres <= tol)

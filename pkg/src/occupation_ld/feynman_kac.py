"""Tilted (Feynman-Kac) semigroups and their exact finite-state identities.

For a smoothed test function v with generator image Lv and eps > 0, the
potential V = Lv / (v + eps) makes v + eps harmonic for Q - diag(V), so

    exp(t (Q - diag V)) (v + eps) = v + eps      for all t.

The checks here evaluate that identity, invariance of (v + eps) m under
the tilted semigroup, and L2(m)-contraction, by direct linear algebra.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import ChainModel, ModelError, check_reversibility, expm, semigroup
from .rate import RouteError


@dataclass(frozen=True)
class D1Element:
    v: np.ndarray
    Lhat_v: np.ndarray
    u_tilde: np.ndarray
    t0: float
    eta: float


@dataclass(frozen=True)
class TiltSpec:
    v: np.ndarray
    epsilon: float
    V: np.ndarray
    t0: float
    eta: float
    u_tilde: np.ndarray

    @property
    def v_eps(self) -> np.ndarray:
        return self.v + self.epsilon

    @property
    def bound(self) -> float:
        """2 ||u_tilde||_inf / (t0 eps), the a-priori bound on |V|."""
        return 2.0 * float(np.max(np.abs(self.u_tilde))) / (self.t0 * self.epsilon)


@dataclass(frozen=True)
class CheckResult:
    check: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance

    def record(self) -> dict:
        return {"check": self.check, "residual": self.residual,
                "tolerance": self.tolerance, "pass": self.passed}


def _require_continuous(model: ChainModel) -> None:
    if model.kind != "continuous":
        raise RouteError("tilted semigroups are built from a generator (continuous model)")


def integrated_semigroup(model: ChainModel, t0: float) -> np.ndarray:
    """int_0^t0 p_s ds via the block exponential exp(t0 [[Q, I], [0, 0]])."""
    n = model.n
    A = np.zeros((2 * n, 2 * n))
    A[:n, :n] = model.Q
    A[:n, n:] = np.eye(n)
    return expm(t0 * A)[:n, n:]


def integrated_semigroup_simpson(model: ChainModel, t0: float, x: np.ndarray,
                                 tol: float = 1e-11, start: int = 512,
                                 max_intervals: int = 1 << 20) -> np.ndarray:
    """int_0^t0 p_s x ds by composite Simpson with Richardson halving.

    Refines until successive extrapolated values differ by less than ``tol``.
    """

    def simpson(N):
        dt = t0 / N
        step = semigroup(model, dt)
        vals = np.empty((N + 1, model.n))
        vals[0] = x
        for k in range(N):
            vals[k + 1] = step @ vals[k]
        w = np.ones(N + 1)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        return dt / 3.0 * (w @ vals)

    N = start
    prev_s = simpson(N)
    prev_r = None
    while N < max_intervals:
        N *= 2
        s = simpson(N)
        r = s + (s - prev_s) / 15.0
        if prev_r is not None and np.max(np.abs(r - prev_r)) < tol:
            return r
        prev_s, prev_r = s, r
    return prev_r


def construct_D1_element(model: ChainModel, u, t0: float, eta: float = 0.0,
                         method: str = "exact") -> D1Element:
    """Smooth u: u_tilde = p_eta u, v = (1/t0) int_0^t0 p_s u_tilde ds.

    Also returns Lhat_v = (p_t0 u_tilde - u_tilde) / t0.
    """
    _require_continuous(model)
    u = np.asarray(u, float)
    if np.any(u < 0):
        raise ModelError("u must be nonnegative")
    if not t0 > 0 or eta < 0:
        raise ModelError("need t0 > 0 and eta >= 0")
    u_tilde = semigroup(model, eta) @ u
    if method == "exact":
        v = integrated_semigroup(model, t0) @ u_tilde / t0
    elif method == "quadrature":
        v = integrated_semigroup_simpson(model, t0, u_tilde) / t0
    else:
        raise ValueError(f"unknown method {method!r}")
    Lhat = (semigroup(model, t0) @ u_tilde - u_tilde) / t0
    return D1Element(v, Lhat, u_tilde, float(t0), float(eta))


def build_tilt(model: ChainModel, u, t0: float, eta: float, epsilon: float) -> TiltSpec:
    """Potential V = Lhat_v / (v + eps) for the smoothed element built from u."""
    if not epsilon > 0:
        raise ModelError("epsilon must be positive")
    el = construct_D1_element(model, u, t0, eta)
    V = el.Lhat_v / (el.v + epsilon)
    return TiltSpec(el.v, float(epsilon), V, el.t0, el.eta, el.u_tilde)


def tilted_semigroup(model: ChainModel, V, t: float) -> np.ndarray:
    """exp(t (Q - diag V))."""
    _require_continuous(model)
    if t < 0:
        raise ModelError("time must be nonnegative")
    V = np.asarray(V, float)
    return expm(t * (model.Q - np.diag(V)))


def fk_identity_check(model: ChainModel, tilt: TiltSpec, t: float,
                      tolerance: float = 1e-9) -> CheckResult:
    ve = tilt.v_eps
    res = np.max(np.abs(ve - tilted_semigroup(model, tilt.V, t) @ ve))
    return CheckResult("fk_identity", float(res), tolerance)


def _require_reversible(model: ChainModel) -> None:
    _require_continuous(model)
    ok, viol = check_reversibility(model)
    if not ok:
        raise RouteError(f"model is not reversible (max detailed-balance violation {viol:.3e})")


def tilted_invariance_check(model: ChainModel, tilt: TiltSpec, t: float,
                            tolerance: float = 1e-9, weight=None) -> CheckResult:
    """|| (m * w)^T p~_t - (m * w)^T ||_1 with w = v + eps by default.

    Passing another ``weight`` gives the negative control.
    """
    _require_reversible(model)
    w = tilt.v_eps if weight is None else np.asarray(weight, float)
    row = model.m * w
    res = np.abs(row @ tilted_semigroup(model, tilt.V, t) - row).sum()
    return CheckResult("tilted_invariance", float(res), tolerance)


def tilted_contraction_norm(model: ChainModel, V, t: float) -> float:
    """Operator norm of p~_t on L2(m), restricted to the support of m."""
    _require_reversible(model)
    if isinstance(V, TiltSpec):
        V = V.V
    pt = tilted_semigroup(model, V, t)
    supp = np.flatnonzero(model.m > 0)
    s = np.sqrt(model.m[supp])
    A = s[:, None] * pt[np.ix_(supp, supp)] / s[None, :]
    return float(np.linalg.norm(A, 2))


def tilted_contraction_check(model: ChainModel, tilt, t: float,
                             tolerance: float = 1e-9) -> CheckResult:
    norm = tilted_contraction_norm(model, tilt, t)
    return CheckResult("tilted_contraction", max(norm - 1.0, 0.0), tolerance)


def tilted_self_adjointness(model: ChainModel, V, t: float) -> float:
    """max |D_m p~_t - p~_t^T D_m|."""
    pt = tilted_semigroup(model, V, t)
    Dm = np.diag(model.m)
    return float(np.max(np.abs(Dm @ pt - pt.T @ Dm)))


def fk_monte_carlo(model: ChainModel, tilt: TiltSpec, start: int, t: float,
                   trials: int, seed: int, workers: int | None = None):
    """Path average of (v + eps)(X_t) exp(-int_0^t V(X_s) ds) from ``start``.

    Returns (estimate, standard error); the exact value is (v + eps)[start].
    """
    from .simulate import simulate_continuous

    final, occ = simulate_continuous(model, start, t, trials, seed, workers=workers)
    vals = tilt.v_eps[final] * np.exp(-(occ @ tilt.V))
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(trials))

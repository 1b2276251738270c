"""Paths, empirical measures, exact occupation laws and Monte Carlo.

Randomness is counter-based: trial ``k`` under seed ``s`` draws from a
Philox generator keyed by ``(s, k)``, and the j-th draw of that stream
drives step j. Any split of the trials across workers therefore produces
the same per-trial outcomes, and reductions run in trial order.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .chain import ChainModel, ModelError, ProbMeasure, StateSet, semigroup

CHUNK = 8192
DP_CAP = 2000
THREADS_ENV = "OCCLD_THREADS"


class EventError(ModelError):
    """The requested method cannot evaluate this kind of event."""


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def trial_stream(seed: int, trial: int) -> np.random.Generator:
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, trial], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _map_chunks(fn, trials: int, workers: int | None):
    chunks = [(lo, min(lo + CHUNK, trials)) for lo in range(0, trials, CHUNK)]
    workers = workers or default_workers()
    if workers <= 1 or len(chunks) <= 1:
        return [fn(lo, hi) for lo, hi in chunks]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(lambda c: fn(*c), chunks))


# ---------------------------------------------------------------- neighborhoods

@dataclass(frozen=True)
class TauNeighborhood:
    """{nu : max_j |<f_j, nu> - <f_j, center>| < radius}."""

    test_functions: tuple
    center: ProbMeasure
    radius: float

    def __post_init__(self):
        fs = np.atleast_2d(np.asarray(self.test_functions, dtype=float))
        if fs.shape[0] == 0:
            raise ModelError("a neighborhood needs at least one test function")
        if fs.shape[1] != len(self.center):
            raise ModelError("test functions and center have different lengths")
        if not np.all(np.isfinite(fs)):
            raise ModelError("test functions must be finite")
        if not self.radius > 0:
            raise ModelError("radius must be positive")
        fs.setflags(write=False)
        object.__setattr__(self, "test_functions", fs)

    @classmethod
    def single_set(cls, target: StateSet, center: ProbMeasure, radius: float) -> "TauNeighborhood":
        return cls(target.indicator.astype(float)[None, :], center, radius)

    def indicator_target(self) -> StateSet | None:
        """The set A when the neighborhood is defined by the single function 1_A."""
        fs = self.test_functions
        if fs.shape[0] == 1 and np.all((fs[0] == 0) | (fs[0] == 1)):
            return StateSet(fs[0] == 1)
        return None

    def center_values(self) -> np.ndarray:
        return self.test_functions @ self.center.mu


def in_neighborhood(nu, nbhd: TauNeighborhood) -> bool:
    nu = nu.mu if isinstance(nu, ProbMeasure) else np.asarray(nu, float)
    return bool(np.all(np.abs(nbhd.test_functions @ nu - nbhd.center_values()) < nbhd.radius))


def _in_neighborhood_rows(L: np.ndarray, nbhd: TauNeighborhood, scale: float = 1.0) -> np.ndarray:
    """Row-wise membership; discrete callers pass visit counts with ``scale = n``.

    Comparing in count units keeps boundary cases such as |4/10 - 1/2| = 0.1
    on the excluded side, as exact arithmetic would.
    """
    vals = L @ nbhd.test_functions.T
    return np.all(np.abs(vals - scale * nbhd.center_values()[None, :]) < scale * nbhd.radius, axis=1)


# ---------------------------------------------------------------------- paths

@dataclass(frozen=True)
class PathSample:
    """A sampled trajectory.

    Discrete: ``states`` holds X_0..X_horizon and ``times`` is None.
    Continuous: ``states[k]`` is occupied on [times[k], times[k+1]) with
    ``times[-1] == horizon``.
    """

    start: int
    horizon: float
    states: np.ndarray
    times: np.ndarray | None
    stream: tuple[int, int]


def _step_discrete(cum: np.ndarray, x: np.ndarray, u: np.ndarray) -> np.ndarray:
    nxt = (cum[x] <= u[:, None]).sum(axis=1)
    return np.minimum(nxt, cum.shape[1] - 1)


def _uniformization(Q: np.ndarray) -> tuple[float, np.ndarray]:
    rate = float(np.max(-np.diag(Q)))
    if rate <= 0:
        rate = 1.0
    J = np.eye(Q.shape[0]) + Q / rate
    return rate, np.clip(J, 0.0, None)


PAIR_BLOCK = 64


def sample_path(model: ChainModel, start: int, horizon, stream: tuple[int, int] = (0, 0)) -> PathSample:
    """One trajectory from ``start``; ``stream = (seed, trial)`` fixes the draws."""
    if not 0 <= start < model.n:
        raise ModelError(f"start state {start} out of range")
    if not horizon > 0:
        raise ModelError("horizon must be positive")
    g = trial_stream(*stream)
    if model.kind == "discrete":
        n = int(horizon)
        cum = np.cumsum(model.P, axis=1)
        u = g.random(n)
        xs = np.empty(n + 1, dtype=np.int64)
        xs[0] = start
        for k in range(n):
            xs[k + 1] = _step_discrete(cum, xs[k:k + 1], u[k:k + 1])[0]
        return PathSample(start, n, xs, None, tuple(stream))
    rate, J = _uniformization(model.Q)
    cum = np.cumsum(J, axis=1)
    t, x = 0.0, start
    states, times = [start], [0.0]
    buf = g.random((PAIR_BLOCK, 2))
    k = 0
    while True:
        if k == PAIR_BLOCK:
            buf, k = g.random((PAIR_BLOCK, 2)), 0
        hold = -math.log1p(-buf[k, 0]) / rate
        if t + hold >= horizon:
            break
        t += hold
        y = int(_step_discrete(cum, np.array([x]), buf[k, 1:2])[0])
        k += 1
        if y != x:
            states.append(y)
            times.append(t)
            x = y
    times.append(float(horizon))
    return PathSample(start, float(horizon), np.array(states), np.array(times), tuple(stream))


def empirical_measure(path: PathSample, n: int | None = None, shift: int = 0, n_states: int | None = None) -> ProbMeasure:
    """Occupation fractions.

    Discrete: visits among X_shift..X_{shift+n-1} (n defaults to the
    horizon). Continuous: time fractions over [0, horizon].
    """
    S = n_states if n_states is not None else int(path.states.max()) + 1
    if path.times is None:
        n = int(path.horizon) - shift if n is None else n
        seg = path.states[shift:shift + n]
        if len(seg) != n or n <= 0:
            raise ModelError("path too short for the requested window")
        return ProbMeasure(np.bincount(seg, minlength=S) / n)
    occ = np.zeros(S)
    np.add.at(occ, path.states, np.diff(path.times))
    occ = occ / path.horizon
    return ProbMeasure(occ / occ.sum())


def shift_discrepancy(path: PathSample, f, t0: int, n: int) -> float:
    """|<f, L_n(theta_t0 w)> - <f, L_n(w)>| for a discrete path."""
    f = np.asarray(f, float)
    a = f[path.states[t0:t0 + n]].mean()
    b = f[path.states[:n]].mean()
    return float(abs(a - b))


def simulate_discrete(kernel: np.ndarray, start: int, n: int, trials: int, seed: int,
                      workers: int | None = None, log_ratio: np.ndarray | None = None):
    """Visit counts over X_0..X_{n-1} for each trial.

    With ``log_ratio`` (an S x S matrix) also returns the per-trial sum of
    log_ratio[X_k, X_{k+1}] over the n - 1 transitions.
    """
    cum = np.cumsum(kernel, axis=1)
    S = kernel.shape[0]

    def run(lo, hi):
        m = hi - lo
        U = np.stack([trial_stream(seed, k).random(n) for k in range(lo, hi)]) if n > 1 else None
        x = np.full(m, start, dtype=np.int64)
        counts = np.zeros((m, S), dtype=np.int64)
        lw = np.zeros(m)
        rows = np.arange(m)
        counts[rows, x] += 1
        for k in range(n - 1):
            y = _step_discrete(cum, x, U[:, k])
            if log_ratio is not None:
                lw += log_ratio[x, y]
            x = y
            counts[rows, x] += 1
        return counts, lw

    parts = _map_chunks(run, trials, workers)
    counts = np.concatenate([p[0] for p in parts])
    lw = np.concatenate([p[1] for p in parts])
    return (counts, lw) if log_ratio is not None else counts


def simulate_continuous(model: ChainModel, start: int, horizon: float, trials: int, seed: int,
                        workers: int | None = None):
    """Uniformized paths: returns (X_horizon, occupation times) per trial."""
    rate, J = _uniformization(model.Q)
    cum = np.cumsum(J, axis=1)
    S = model.n

    def run(lo, hi):
        m = hi - lo
        gens = [trial_stream(seed, k) for k in range(lo, hi)]
        x = np.full(m, start, dtype=np.int64)
        t = np.zeros(m)
        occ = np.zeros((m, S))
        active = np.arange(m)
        buf = None
        k = PAIR_BLOCK
        while active.size:
            if k == PAIR_BLOCK:
                buf = np.zeros((m, PAIR_BLOCK, 2))
                for i in active:
                    buf[i] = gens[i].random((PAIR_BLOCK, 2))
                k = 0
            u = buf[active, k]
            hold = -np.log1p(-u[:, 0]) / rate
            done = t[active] + hold >= horizon
            stay = np.where(done, horizon - t[active], hold)
            np.add.at(occ, (active, x[active]), stay)
            t[active] += stay
            go = active[~done]
            if go.size:
                x[go] = _step_discrete(cum, x[go], u[~done, 1])
            active = go
            k += 1
        return x, occ

    parts = _map_chunks(run, trials, workers)
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


# ------------------------------------------------------------- exact DP law

@dataclass(frozen=True)
class OccupationLaw:
    """Law of the visit count to ``target`` among X_0..X_{n-1} from ``start``."""

    start: int
    n: int
    target: StateSet
    log_pmf: np.ndarray

    @property
    def pmf(self) -> np.ndarray:
        with np.errstate(under="ignore"):
            return np.exp(self.log_pmf)

    def log_probability(self, mask: np.ndarray) -> float:
        mask = np.asarray(mask, bool)
        if not mask.any():
            return -math.inf
        with np.errstate(divide="ignore"):
            return float(logsumexp(self.log_pmf[mask]))

    def probability(self, mask) -> float:
        return math.exp(self.log_probability(mask))


def occupation_law_exact(model: ChainModel, start: int, n: int, target: StateSet,
                         cap: int = DP_CAP, kernel: np.ndarray | None = None) -> OccupationLaw:
    """Forward DP over (state, count) in log space; O(n^2 |S|^2)."""
    if n > cap:
        raise ModelError(f"horizon {n} exceeds the exact-DP cap {cap}")
    if n < 1:
        raise ModelError("horizon must be at least 1")
    if kernel is None:
        if model.kind != "discrete":
            raise EventError("exact occupation laws need a discrete model (or a skeleton kernel)")
        kernel = model.P
    with np.errstate(divide="ignore"):
        logP = np.log(kernel)
    ind = target.indicator
    S = len(ind)
    dp = np.full((S, n + 1), -np.inf)
    dp[start, int(ind[start])] = 0.0
    with np.errstate(invalid="ignore", divide="ignore"):
        for k in range(1, n):
            width = k + 1  # counts 0..k are reachable before this step
            z = dp[:, None, :width] + logP[:, :, None]
            moved = logsumexp(z, axis=0)
            new = np.full((S, n + 1), -np.inf)
            new[~ind, :width] = moved[~ind]
            new[ind, 1:width + 1] = moved[ind]
            dp = new
        log_pmf = logsumexp(dp, axis=0)
    return OccupationLaw(start, n, target, log_pmf)


def count_window(nbhd: TauNeighborhood, n: int) -> np.ndarray:
    """Counts c in 0..n with c/n inside a single-indicator neighborhood."""
    target = nbhd.indicator_target()
    if target is None:
        raise EventError("exact evaluation needs a neighborhood given by one indicator function")
    c = np.arange(n + 1)
    return np.abs(c - n * nbhd.center_values()[0]) < n * nbhd.radius


@dataclass(frozen=True)
class ThresholdEvent:
    """{L_n(target) >= threshold}."""

    target: StateSet
    threshold: float

    def window(self, n: int) -> np.ndarray:
        c = np.arange(n + 1)
        return c >= self.threshold * n - 1e-9 * n


def _event_target_window(event, n):
    if isinstance(event, ThresholdEvent):
        return event.target, event.window(n)
    return event.indicator_target(), count_window(event, n)


def exact_log_probability(model: ChainModel, start: int, n: int, event,
                          kernel: np.ndarray | None = None) -> float:
    target, window = _event_target_window(event, n)
    return occupation_law_exact(model, start, n, target, kernel=kernel).log_probability(window)


# --------------------------------------------------------------- Monte Carlo

@dataclass(frozen=True)
class MCEstimate:
    estimate: float
    std_error: float
    trials: int
    effective_sample_size: float | None = None


def mc_probability(model: ChainModel, start: int, horizon, nbhd: TauNeighborhood,
                   trials: int, seed: int, workers: int | None = None) -> MCEstimate:
    """Fraction of trials whose empirical measure lies in ``nbhd``."""
    if model.kind == "discrete":
        n = int(horizon)
        counts = simulate_discrete(model.P, start, n, trials, seed, workers)
        hits = _in_neighborhood_rows(counts, nbhd, scale=n)
    else:
        _, occ = simulate_continuous(model, start, float(horizon), trials, seed, workers)
        hits = _in_neighborhood_rows(occ / float(horizon), nbhd)
    p = float(hits.mean())
    return MCEstimate(p, math.sqrt(p * (1 - p) / trials), trials)


def tilted_kernel(P: np.ndarray, u: np.ndarray) -> np.ndarray:
    """q_ij = P_ij u_j / (P u)_i."""
    u = np.asarray(u, float)
    return P * u[None, :] / (P @ u)[:, None]


def tilted_importance_sampler(model: ChainModel, start: int, n: int, event, u_star,
                              trials: int, seed: int, workers: int | None = None) -> MCEstimate:
    """Sample under the tilted kernel and reweight by prod P/q along each path.

    ``event`` is a :class:`TauNeighborhood` or a :class:`ThresholdEvent`.
    """
    if model.kind != "discrete":
        raise EventError("importance sampling is implemented for discrete models")
    u = np.asarray(u_star, float)
    if np.any(u <= 0):
        raise ModelError("u_star must be strictly positive")
    P = model.P
    q = tilted_kernel(P, u)
    with np.errstate(divide="ignore", invalid="ignore"):
        # log(P_ij / q_ij) = log((P u)_i / u_j) wherever P_ij > 0
        lr = np.log(P @ u)[:, None] - np.log(u)[None, :]
    lr = np.where(P > 0, lr, 0.0)
    counts, lw = simulate_discrete(q, start, n, trials, seed, workers, log_ratio=lr)
    if isinstance(event, ThresholdEvent):
        hits = event.window(n)[counts[:, event.target.indicator].sum(axis=1)]
    else:
        hits = _in_neighborhood_rows(counts, event, scale=n)
    w = np.exp(lw)
    vals = np.where(hits, w, 0.0)
    est = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(trials)) if trials > 1 else math.inf
    ess = float(w.sum() ** 2 / np.sum(w ** 2))
    return MCEstimate(est, se, trials, ess)


# ---------------------------------------------------------------- decay slopes

@dataclass
class SlopeResult:
    slope: float
    estimates: list[tuple[int, float]]
    log_p: dict[int, float]
    first_zero: int | None = None
    regression: float | None = None


def slope_from_log_probs(log_p: dict, n_grid: Sequence[int]) -> SlopeResult:
    """(log p_2n - log p_n) / n for each n in the grid; the last one is the slope."""
    ns = sorted(log_p)
    zeros = [n for n in ns if log_p[n] == -math.inf]
    estimates = []
    for n in n_grid:
        a, b = log_p[n], log_p[2 * n]
        if a == -math.inf or b == -math.inf:
            estimates.append((n, -math.inf))
        else:
            estimates.append((n, (b - a) / n))
    fin = [n for n in ns if math.isfinite(log_p[n])]
    reg = float(np.polyfit(fin, [log_p[n] for n in fin], 1)[0]) if len(fin) >= 2 else None
    return SlopeResult(estimates[-1][1], estimates, dict(log_p), zeros[0] if zeros else None, reg)


def decay_slope(model: ChainModel, start: int, event, n_grid: Sequence[int],
                kernel: np.ndarray | None = None) -> SlopeResult:
    """Exponential decay rate of P^start(event at horizon n) by exact DP."""
    n_grid = sorted(int(n) for n in n_grid)
    need = sorted(set(n_grid) | {2 * n for n in n_grid})
    log_p = {n: exact_log_probability(model, start, n, event, kernel) for n in need}
    return slope_from_log_probs(log_p, n_grid)


def relaxation_steps(model: ChainModel) -> float:
    """1 / (1 - |second eigenvalue|) of P (discrete) or 1 / gap of Q."""
    lam = np.linalg.eigvals(model.matrix)
    if model.kind == "discrete":
        mods = np.sort(np.abs(lam))[::-1]
        gap = 1.0 - mods[1] if len(mods) > 1 else 1.0
    else:
        re = np.sort(-lam.real)
        gap = re[1] if len(re) > 1 else 1.0
    return math.inf if gap <= 1e-12 else 1.0 / gap


# --------------------------------------------------------- occupation rate

def log_spectral_radius(K: np.ndarray) -> float:
    return float(np.log(np.max(np.abs(np.linalg.eigvals(K)))))


def threshold_rate(model: ChainModel, target: StateSet, x: float) -> float:
    """inf of the rate over {nu : nu(target) >= x} via the Legendre transform.

    Uses the scaled cumulant log rho(P diag(exp(lam 1_A))) (discrete) or
    the top eigenvalue of Q + lam diag(1_A) (continuous), maximized over
    lam >= 0. Assumes an irreducible model.
    """
    from scipy.optimize import minimize_scalar

    out = (~target.indicator).astype(float)

    def neg(lam):
        # lam x - Lambda(lam) with the exp(lam) factor pulled out for stability
        if model.kind == "discrete":
            lr = log_spectral_radius(model.P * np.exp(-lam * out)[None, :])
        else:
            lr = float(np.max(np.linalg.eigvals(model.Q - lam * np.diag(out)).real))
        return -(lam * (x - 1.0) - lr)

    hi = 1.0
    while hi < 1e4 and neg(hi) < neg(hi / 2) - 1e-15:
        hi *= 2
    res = minimize_scalar(neg, bounds=(0.0, hi), method="bounded", options={"xatol": 1e-12})
    return max(-float(res.fun), -neg(0.0), 0.0)


# ------------------------------------------------------------------ bound audit

@dataclass
class StartAudit:
    start: int
    slope: float
    upper_hat: str
    upper_I: str
    lower: str
    exempt: bool
    estimates: list[tuple[int, float]] = field(default_factory=list)


@dataclass
class AuditReport:
    rate_hat: float
    rate_I: float
    thin_set: list[int]
    mutual_reachability: bool
    starts: list[StartAudit]
    verdicts: dict[str, str]
    series: list[tuple[int, int, float, float, str]]
    method: str
    tol: float


def _verdict(items: list[str]) -> str:
    if any(x == "fail" for x in items):
        return "fail"
    if items and all(x == "not-applicable" for x in items):
        return "not-applicable"
    if any(x == "inconclusive" for x in items):
        return "inconclusive"
    return "pass"


def mc_event_probability(model: ChainModel, start: int, horizon, event, trials: int, seed: int,
                         workers: int | None = None) -> MCEstimate:
    """Monte Carlo for either a neighborhood or a threshold event."""
    if isinstance(event, TauNeighborhood):
        return mc_probability(model, start, horizon, event, trials, seed, workers)
    if model.kind == "discrete":
        n = int(horizon)
        counts = simulate_discrete(model.P, start, n, trials, seed, workers)
        hits = event.window(n)[counts[:, event.target.indicator].sum(axis=1)]
    else:
        _, occ = simulate_continuous(model, start, float(horizon), trials, seed, workers)
        hits = occ[:, event.target.indicator].sum(axis=1) / float(horizon) >= event.threshold
    p = float(hits.mean())
    return MCEstimate(p, math.sqrt(p * (1 - p) / trials), trials)


def _collect_slopes(model, event, starts, n_grid, method, h, trials, seed, workers):
    need = sorted(set(n_grid) | {2 * n for n in n_grid})
    if method == "exact":
        if isinstance(event, TauNeighborhood) and event.indicator_target() is None:
            raise EventError("exact audit needs an event given by one indicator function")
        kernel = semigroup(model, h) if model.kind == "continuous" else None
        label = "exact" if model.kind == "discrete" else f"exact-skeleton-h={h!r}"
        if kernel is not None:
            # horizons are times; the skeleton needs an integer number of steps
            bad = [n for n in need if abs(n / h - round(n / h)) > 1e-9]
            if bad:
                raise ModelError(f"horizons {bad} are not multiples of the skeleton step {h!r}")
    elif method != "mc":
        raise ValueError(f"unknown method {method!r}")
    series, slopes = [], []
    for x in starts:
        log_p = {}
        for n in need:
            if method == "exact":
                steps = n if kernel is None else int(round(n / h))
                lp = exact_log_probability(model, x, steps, event, kernel)
                p, se = math.exp(lp), 0.0
            else:
                est = mc_event_probability(model, x, n, event, trials, seed, workers)
                p, se, label = est.estimate, est.std_error, "mc"
                lp = math.log(p) if p > 0 else -math.inf
            log_p[n] = lp
            series.append((x, n, p, se, label))
        slopes.append(slope_from_log_probs(log_p, n_grid))
    return series, slopes


def bound_audit(model: ChainModel, nbhd: TauNeighborhood, n_grid: Sequence[int], *,
                starts: Sequence[int] | None = None, method: str = "exact",
                tol_rel: float = 0.1, tol_abs: float = 1e-3, h: float = 0.1,
                trials: int = 10_000, seed: int = 0, workers: int | None = None) -> AuditReport:
    """Compare finite-n decay slopes of P^x(L_n in nbhd) with the rates at the center.

    Per start x: upper bound with Ihat (all x), upper bound with I and
    lower bound with I (both exempt on the m-thin set built from the null
    states). For continuous models the grid holds time horizons T, audited
    exactly on the h-skeleton with T / h steps or by Monte Carlo. A Monte
    Carlo lower-bound check with zero hits at some horizon is reported as
    "inconclusive".
    """
    from .chain import check_mutual_reachability
    from .rate import rate_I, rate_hat
    from .thinset import null_states, thin_set

    center = nbhd.center
    rh = rate_hat(model, center).value
    ri = rate_I(model, center).value
    thin = thin_set(model, null_states(model))
    cond = check_mutual_reachability(model).holds
    tol_u = tol_rel * (rh if math.isfinite(rh) else 0.0) + tol_abs
    tol_l = tol_rel * (ri if math.isfinite(ri) else 0.0) + tol_abs
    starts = list(range(model.n)) if starts is None else [int(s) for s in starts]
    n_grid = sorted(int(n) for n in n_grid)
    series, slopes = _collect_slopes(model, nbhd, starts, n_grid, method, h, trials, seed, workers)

    results = []
    for x, sl in zip(starts, slopes):
        slope = sl.slope
        upper_hat = "pass" if slope <= -rh + tol_u else "fail"
        upper_I = "pass" if slope <= -ri + tol_l else "fail"
        if not math.isfinite(ri):
            lower = "pass"
        elif not cond:
            lower = "not-applicable"
        elif method == "mc" and sl.first_zero is not None:
            lower = "inconclusive"
        else:
            lower = "pass" if slope >= -ri - tol_l else "fail"
        results.append(StartAudit(x, slope, upper_hat, upper_I, lower, x in thin, sl.estimates))

    verdicts = {
        "upper_hat": _verdict([r.upper_hat for r in results]),
        "upper_I": _verdict([r.upper_I for r in results if not r.exempt]),
        "lower": _verdict([r.lower for r in results if not r.exempt]),
    }
    return AuditReport(rh, ri, thin.indices, cond, results, verdicts, series, method, tol_l)


def threshold_audit(model: ChainModel, event: ThresholdEvent, n_grid: Sequence[int], *,
                    starts: Sequence[int] | None = None, method: str = "exact",
                    tol_rel: float = 0.1, tol_abs: float = 1e-3, h: float = 0.1,
                    trials: int = 10_000, seed: int = 0, workers: int | None = None) -> AuditReport:
    """Decay slopes of P^x(L_n(A) >= threshold) against -inf{I(nu) : nu(A) >= threshold}."""
    from .chain import check_mutual_reachability
    from .thinset import null_states, thin_set

    J = threshold_rate(model, event.target, event.threshold)
    thin = thin_set(model, null_states(model))
    cond = check_mutual_reachability(model).holds
    tol = tol_rel * J + tol_abs
    starts = list(range(model.n)) if starts is None else [int(s) for s in starts]
    n_grid = sorted(int(n) for n in n_grid)
    series, slopes = _collect_slopes(model, event, starts, n_grid, method, h, trials, seed, workers)
    results = []
    for x, sl in zip(starts, slopes):
        upper = "pass" if sl.slope <= -J + tol else "fail"
        if not cond:
            lower = "not-applicable"
        elif method == "mc" and sl.first_zero is not None:
            lower = "inconclusive"
        else:
            lower = "pass" if sl.slope >= -J - tol else "fail"
        results.append(StartAudit(x, sl.slope, upper, upper, lower, x in thin, sl.estimates))
    verdicts = {
        "upper": _verdict([r.upper_I for r in results if not r.exempt]),
        "lower": _verdict([r.lower for r in results if not r.exempt]),
    }
    return AuditReport(J, J, thin.indices, cond, results, verdicts, series, method, tol)

"""Finite-state Markov models: validation, semigroups, resolvents and structural checks."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
import scipy.linalg

Kind = Literal["discrete", "continuous"]

ROW_TOL = 1e-12
REVERSIBILITY_TOL = 1e-10
INVARIANCE_TOL = 1e-10
POSITIVITY_TOL = 1e-14


class ModelError(ValueError):
    """Raised when a model, measure or state set violates its invariants."""


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ChainModel:
    """A finite-state Markov model.

    ``matrix`` is the row-stochastic kernel P for ``kind == "discrete"`` and
    the generator Q (units 1/time) for ``kind == "continuous"``. ``m`` is the
    reference measure; zero entries mark m-null states.
    """

    kind: Kind
    states: tuple[str, ...]
    matrix: np.ndarray
    m: np.ndarray

    @property
    def n(self) -> int:
        return len(self.states)

    @property
    def P(self) -> np.ndarray:
        if self.kind != "discrete":
            raise ModelError("continuous model has no one-step kernel P")
        return self.matrix

    @property
    def Q(self) -> np.ndarray:
        if self.kind != "continuous":
            raise ModelError("discrete model has no generator Q")
        return self.matrix

    def index(self, label) -> int:
        try:
            return self.states.index(str(label))
        except ValueError:
            raise ModelError(f"unknown state label {label!r}") from None


@dataclass(frozen=True)
class ProbMeasure:
    mu: np.ndarray

    def __post_init__(self):
        mu = _frozen(self.mu)
        if mu.ndim != 1:
            raise ModelError("measure must be a vector")
        if np.any(mu < 0):
            raise ModelError(f"negative mass at index {int(np.argmin(mu))}")
        if abs(mu.sum() - 1.0) > ROW_TOL:
            raise ModelError(f"measure sums to {mu.sum()!r}, not 1")
        object.__setattr__(self, "mu", mu)

    def __len__(self):
        return len(self.mu)

    @classmethod
    def delta(cls, model: ChainModel, label) -> "ProbMeasure":
        mu = np.zeros(model.n)
        mu[model.index(label)] = 1.0
        return cls(mu)

    @classmethod
    def normalized(cls, weights) -> "ProbMeasure":
        w = np.asarray(weights, dtype=float)
        return cls(w / w.sum())

    def support(self) -> np.ndarray:
        return self.mu > 0


@dataclass(frozen=True)
class StateSet:
    """Subset of the state space held as a boolean indicator vector."""

    indicator: np.ndarray = field()

    def __post_init__(self):
        ind = np.array(self.indicator, dtype=bool)
        ind.setflags(write=False)
        object.__setattr__(self, "indicator", ind)

    @classmethod
    def from_indices(cls, n: int, indices: Sequence[int]) -> "StateSet":
        ind = np.zeros(n, dtype=bool)
        ind[list(indices)] = True
        return cls(ind)

    @classmethod
    def from_labels(cls, model: ChainModel, labels: Sequence) -> "StateSet":
        return cls.from_indices(model.n, [model.index(x) for x in labels])

    @property
    def indices(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.indicator)]

    def labels(self, model: ChainModel) -> list[str]:
        return [model.states[i] for i in self.indices]

    def __contains__(self, i) -> bool:
        return bool(self.indicator[i])

    def __len__(self) -> int:
        return int(self.indicator.sum())

    def __or__(self, other: "StateSet") -> "StateSet":
        return StateSet(self.indicator | other.indicator)

    def issubset(self, other: "StateSet") -> bool:
        return not np.any(self.indicator & ~other.indicator)

    def __eq__(self, other) -> bool:
        return isinstance(other, StateSet) and np.array_equal(self.indicator, other.indicator)

    def __hash__(self):
        return hash(self.indicator.tobytes())

    def __repr__(self):
        return f"StateSet({self.indices})"


def build_model(kind: Kind, matrix, m, labels: Sequence | None = None) -> ChainModel:
    """Validate and freeze a model.

    Errors name the offending row so a bad input file can be fixed quickly.
    """
    if kind not in ("discrete", "continuous"):
        raise ModelError(f"kind must be 'discrete' or 'continuous', got {kind!r}")
    K = np.array(matrix, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ModelError(f"matrix must be square, got shape {K.shape}")
    n = K.shape[0]
    if n == 0:
        raise ModelError("empty state space")
    if not np.all(np.isfinite(K)):
        raise ModelError("matrix has non-finite entries")
    m = np.array(m, dtype=float)
    if m.shape != (n,):
        raise ModelError(f"m must have length {n}, got shape {m.shape}")
    if labels is None:
        labels = [str(i) for i in range(n)]
    labels = tuple(str(x) for x in labels)
    if len(labels) != n or len(set(labels)) != n:
        raise ModelError("state labels must be unique and match the matrix size")

    if kind == "discrete":
        for i in range(n):
            if np.any(K[i] < 0):
                raise ModelError(f"row {i}: negative transition probability")
            if abs(K[i].sum() - 1.0) > ROW_TOL:
                raise ModelError(f"row {i}: sums to {K[i].sum()!r}, not 1")
    else:
        for i in range(n):
            off = np.delete(K[i], i)
            if np.any(off < 0):
                raise ModelError(f"row {i}: negative off-diagonal rate")
            if abs(K[i].sum()) > ROW_TOL:
                raise ModelError(f"row {i}: generator row sums to {K[i].sum()!r}, not 0")
    if not np.all(np.isfinite(m)) or np.any(m < 0):
        raise ModelError(f"m: negative or non-finite entry at index {int(np.argmin(m))}")
    if m.sum() <= 0:
        raise ModelError("m: total mass must be positive")
    return ChainModel(kind, labels, _frozen(K), _frozen(m))


def expm(A: np.ndarray) -> np.ndarray:
    """Matrix exponential (scaling and squaring, degree-13 Pade)."""
    return scipy.linalg.expm(np.asarray(A, dtype=float))


def _symmetric_expm(Q: np.ndarray, m: np.ndarray, t: float) -> np.ndarray:
    # D^{1/2} Q D^{-1/2} is symmetric under detailed balance with m > 0
    s = np.sqrt(m)
    S = (s[:, None] * Q) / s[None, :]
    S = 0.5 * (S + S.T)
    lam, U = np.linalg.eigh(S)
    E = (U * np.exp(t * lam)) @ U.T
    return E / s[:, None] * s[None, :]


def _clean_stochastic(M: np.ndarray) -> np.ndarray:
    M = np.where(M < 0, 0.0, M)
    return M


def semigroup(model: ChainModel, t) -> np.ndarray:
    """Transition matrix p_t.

    Discrete models require integer ``t`` and return P**t. Continuous models
    return exp(tQ), using an eigendecomposition when the model is reversible
    with strictly positive m.
    """
    if t < 0:
        raise ModelError(f"time must be nonnegative, got {t!r}")
    if model.kind == "discrete":
        if int(t) != t:
            raise ModelError(f"discrete model needs an integer time, got {t!r}")
        return np.linalg.matrix_power(model.P, int(t))
    if t == 0:
        return np.eye(model.n)
    if np.all(model.m > 0) and check_reversibility(model)[0]:
        pt = _symmetric_expm(model.Q, model.m, float(t))
    else:
        pt = expm(float(t) * model.Q)
    return _clean_stochastic(pt)


def resolvent(model: ChainModel) -> np.ndarray:
    """Resolvent kernel.

    Continuous: (I - Q)^{-1} = int_0^inf e^{-t} p_t dt.
    Discrete: sum_{n>=1} 2^{-n} P^n = (P/2)(I - P/2)^{-1}.
    """
    eye = np.eye(model.n)
    if model.kind == "continuous":
        return np.linalg.solve(eye - model.Q, eye)
    half = 0.5 * model.P
    return np.linalg.solve(eye - half, half)


def check_reversibility(model: ChainModel) -> tuple[bool, float]:
    """Detailed balance m_i K_ij = m_j K_ji; returns (holds, max violation)."""
    F = model.m[:, None] * model.matrix
    viol = float(np.max(np.abs(F - F.T)))
    return viol <= REVERSIBILITY_TOL, viol


def worst_balance_pair(model: ChainModel) -> tuple[int, int, float]:
    F = model.m[:, None] * model.matrix
    D = np.abs(F - F.T)
    i, j = np.unravel_index(int(np.argmax(D)), D.shape)
    return int(min(i, j)), int(max(i, j)), float(D[i, j])


def check_invariance(model: ChainModel) -> bool:
    """True iff m^T P = m^T (discrete) or m^T Q = 0 (continuous)."""
    r = model.m @ model.matrix
    if model.kind == "discrete":
        r = r - model.m
    return bool(np.max(np.abs(r)) <= INVARIANCE_TOL)


@dataclass(frozen=True)
class IrreducibilityReport:
    holds: bool
    violating_pairs: list[tuple[int, int]]


def check_mutual_reachability(model: ChainModel, threshold: float = POSITIVITY_TOL) -> IrreducibilityReport:
    """m-irreducibility: every m-positive state reaches every m-positive state.

    Uses the resolvent of the model's kind, so the discrete version is the
    sum over n >= 1 of p_n(x, A) being positive.
    """
    R = resolvent(model)
    pos = np.flatnonzero(model.m > 0)
    bad = [(int(i), int(j)) for i in pos for j in pos if not R[i, j] > threshold]
    return IrreducibilityReport(not bad, bad)


def is_abs_continuous(mu: ProbMeasure, model: ChainModel) -> bool:
    """mu << m on a finite space: mu_i > 0 only where m_i > 0."""
    return not np.any((mu.mu > 0) & (model.m <= 0))


# name used by the documented interface
check_condition_114 = check_mutual_reachability

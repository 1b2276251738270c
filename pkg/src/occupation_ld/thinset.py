"""m-thin exceptional sets and the isolated-point scenario.

On a finite space, a set is m-thin when it lies inside
{x : (R 1_B)(x) > 0} for some m-null B, with R the kind-appropriate
resolvent. The functions below return that maximal positivity set.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .chain import (
    POSITIVITY_TOL,
    ChainModel,
    ModelError,
    ProbMeasure,
    StateSet,
    build_model,
    check_mutual_reachability,
    resolvent,
)


def null_states(model: ChainModel) -> StateSet:
    return StateSet(model.m <= 0)


def thin_set(model: ChainModel, B: StateSet, threshold: float = POSITIVITY_TOL) -> StateSet:
    """{x : (R 1_B)(x) > threshold} for an m-null set B."""
    if not B.issubset(null_states(model)):
        bad = [model.states[i] for i in B.indices if model.m[i] > 0]
        raise ModelError(f"B is not m-null: states {bad} have positive m")
    if len(B) == 0:
        return StateSet(np.zeros(model.n, dtype=bool))
    r = resolvent(model) @ B.indicator.astype(float)
    return StateSet(r > threshold)


def thin_closure(model: ChainModel, sets: Sequence[StateSet]) -> StateSet:
    """Union of the thin sets of each null set in ``sets``.

    The union is checked against the thin set of the union of the null
    sets, which must contain it.
    """
    out = StateSet(np.zeros(model.n, dtype=bool))
    union_b = StateSet(np.zeros(model.n, dtype=bool))
    for B in sets:
        out = out | thin_set(model, B)
        union_b = union_b | B
    if not out.issubset(thin_set(model, union_b)):
        raise AssertionError("closure is not contained in the thin set of the union")
    return out


def null_structure_closed(model: ChainModel, threshold: float = POSITIVITY_TOL) -> bool:
    """True when m-null states are unreachable from m-positive states.

    Exactly then every thin set is itself m-null.
    """
    B = null_states(model)
    if len(B) == 0:
        return True
    r = resolvent(model) @ B.indicator.astype(float)
    return not np.any(r[model.m > 0] > threshold)


def isolated_point_model(k: int) -> ChainModel:
    """Symmetric walk on a k-cycle plus an isolated absorbing state theta (m_theta = 0)."""
    if k < 3:
        raise ModelError("cycle size must be at least 3")
    P = np.zeros((k + 1, k + 1))
    for i in range(k):
        P[i, (i + 1) % k] += 0.5
        P[i, (i - 1) % k] += 0.5
    P[k, k] = 1.0
    m = np.r_[np.ones(k), 0.0]
    return build_model("discrete", P, m, [f"c{i}" for i in range(k)] + ["theta"])


@dataclass
class ScenarioReport:
    k: int
    items: dict[str, bool]
    values: dict = field(default_factory=dict)
    thin_set: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.items.values())


def isolated_point_scenario(k: int, n_grid: Sequence[int] = (1, 10, 50)) -> ScenarioReport:
    """Run the six assertions of the isolated-point scenario for a k-cycle."""
    from .rate import dv_rate_discrete, rate_I
    from .simulate import occupation_law_exact

    model = isolated_point_model(k)
    theta = k
    delta = ProbMeasure.delta(model, "theta")
    target = StateSet.from_indices(model.n, [theta])
    hat = dv_rate_discrete(model, delta).value
    full = rate_I(model, delta).value
    thin = thin_set(model, target)
    items = {
        "a_rate_hat_zero": hat == 0.0,
        "b_rate_I_infinite": math.isinf(full) and full > 0,
        "c_thin_set_is_theta": thin == target,
    }
    from_theta = [occupation_law_exact(model, theta, n, target).pmf for n in n_grid]
    items["d_theta_stays"] = all(abs(p[-1] - 1.0) <= 1e-12 for p in from_theta)
    from_cycle = []
    for x in range(k):
        for n in n_grid:
            p = occupation_law_exact(model, x, n, target).pmf
            from_cycle.append(float(p[1:].sum()))
    items["e_cycle_never_visits"] = max(from_cycle) == 0.0
    items["f_mutual_reachability"] = check_mutual_reachability(model).holds
    return ScenarioReport(k, items, {"rate_hat": hat, "rate_I": full,
                                     "max_cycle_visit_probability": max(from_cycle)},
                          thin.labels(model))


# names used by the documented interface
example35_model = isolated_point_model
example35_scenario = isolated_point_scenario

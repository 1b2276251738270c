import math

import numpy as np
import pytest

from occupation_ld.chain import ModelError, StateSet, build_model
from occupation_ld.thinset import (
    example35_scenario,
    isolated_point_model,
    isolated_point_scenario,
    null_states,
    null_structure_closed,
    thin_closure,
    thin_set,
)


def _leaky():
    # a <-> b with a small leak from b into the m-null absorbing state z
    P = [[0.5, 0.5, 0.0], [0.4, 0.5, 0.1], [0.0, 0.0, 1.0]]
    return build_model("discrete", P, [1, 1, 0], ["a", "b", "z"])


def test_null_states():
    model = isolated_point_model(4)
    assert null_states(model).labels(model) == ["theta"]


def test_isolated_point_thin_set():
    model = isolated_point_model(6)
    B = StateSet.from_labels(model, ["theta"])
    assert thin_set(model, B) == B
    assert null_structure_closed(model)


def test_thin_set_reaches_back_from_positive_states():
    model = _leaky()
    T = thin_set(model, null_states(model))
    assert T.labels(model) == ["a", "b", "z"]
    assert not null_structure_closed(model)


def test_thin_set_continuous():
    Q = [[-1, 1, 0], [1, -1, 0], [0, 2, -2]]  # c is m-null and flows into the rest
    model = build_model("continuous", Q, [1, 1, 0], ["a", "b", "c"])
    assert thin_set(model, null_states(model)).labels(model) == ["c"]
    assert null_structure_closed(model)


def test_thin_set_rejects_non_null():
    model = isolated_point_model(3)
    with pytest.raises(ModelError, match="not m-null"):
        thin_set(model, StateSet.from_indices(model.n, [0]))
    assert len(thin_set(model, StateSet(np.zeros(model.n, bool)))) == 0


def test_thin_closure_union():
    P = np.eye(4)
    model = build_model("discrete", P, [1, 1, 0, 0])
    a = StateSet.from_indices(4, [2])
    b = StateSet.from_indices(4, [3])
    assert thin_closure(model, [a, b]).indices == [2, 3]


@pytest.mark.parametrize("k", [3, 4, 7])
def test_scenario(k):
    rep = isolated_point_scenario(k)
    assert rep.passed, rep.items
    assert set(rep.items) == {"a_rate_hat_zero", "b_rate_I_infinite", "c_thin_set_is_theta",
                              "d_theta_stays", "e_cycle_never_visits", "f_mutual_reachability"}
    assert rep.thin_set == ["theta"]
    assert rep.values["rate_hat"] == 0.0 and math.isinf(rep.values["rate_I"])
    assert rep.values["max_cycle_visit_probability"] == 0.0


def test_aliases():
    assert example35_scenario is isolated_point_scenario
    with pytest.raises(ModelError):
        isolated_point_model(2)

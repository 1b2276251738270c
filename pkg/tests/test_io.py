import json
import math

import numpy as np
import pytest

from conftest import DATA
from occupation_ld.chain import ModelError
from occupation_ld.io import dumps, jsonable, load_experiment, load_measure, load_model, model_to_dict
from occupation_ld.simulate import TauNeighborhood, ThresholdEvent


def test_model_round_trip():
    model = load_model(DATA / "birth_death.json")
    again = load_model(model_to_dict(model))
    assert again.states == model.states
    np.testing.assert_array_equal(again.matrix, model.matrix)


def test_model_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"kind": "discrete", "matrix": [[0.5, 0.4], [0.5, 0.5]], "m": [1, 1]}')
    with pytest.raises(ModelError, match="row 0"):
        load_model(bad)
    bad.write_text("{not json")
    with pytest.raises(ModelError, match="invalid JSON"):
        load_model(bad)
    with pytest.raises(ModelError, match="missing field 'm'"):
        load_model({"kind": "discrete", "matrix": [[1.0]]})
    with pytest.raises(ModelError):
        load_model(tmp_path / "absent.json")


def test_measures():
    model = load_model(DATA / "two_state_discrete.json")
    np.testing.assert_array_equal(load_measure({"delta": "s1"}, model).mu, [0, 1])
    np.testing.assert_array_equal(load_measure([0.25, 0.75], model).mu, [0.25, 0.75])
    with pytest.raises(ModelError, match="entries"):
        load_measure({"mu": [1.0]}, model)
    with pytest.raises(ModelError):
        load_measure({"nu": [1.0]}, model)


def test_experiments():
    exp = load_experiment(DATA / "exp_isolated_point.json")
    assert isinstance(exp.event, TauNeighborhood)
    assert exp.starts == list(range(6)) and exp.seed == 7
    exp = load_experiment(DATA / "exp_threshold.json")
    assert isinstance(exp.event, ThresholdEvent) and exp.event.threshold == 0.9
    exp = load_experiment(DATA / "exp_two_functions.json")
    assert exp.event.test_functions.shape == (2, 4) and exp.h == 0.1


def test_experiment_errors():
    model = str(DATA / "two_state_discrete.json")
    with pytest.raises(ModelError, match="n_grid"):
        load_experiment({"model": model, "event": {"target": ["s1"], "threshold": 0.5}, "n_grid": [0]})
    with pytest.raises(ModelError, match="missing field"):
        load_experiment({"model": model, "n_grid": [5]})


def test_serialization():
    doc = {"a": math.inf, "b": -math.inf, "c": np.float64(0.1), "d": np.arange(2), "e": np.bool_(True)}
    assert jsonable(doc) == {"a": "+inf", "b": "-inf", "c": 0.1, "d": [0, 1], "e": True}
    text = dumps({"x": 1 / 3})
    assert text.endswith("\n") and json.loads(text)["x"] == 1 / 3  # shortest round-trip repr

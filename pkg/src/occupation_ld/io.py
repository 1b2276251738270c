"""JSON model/measure/experiment files and report serialization."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .chain import ChainModel, ModelError, ProbMeasure, StateSet, build_model
from .simulate import TauNeighborhood, ThresholdEvent


def _read(source) -> Any:
    if isinstance(source, (dict, list)):
        return source
    try:
        return json.loads(Path(source).read_text())
    except json.JSONDecodeError as exc:
        raise ModelError(f"{source}: invalid JSON ({exc})") from None
    except OSError as exc:
        raise ModelError(f"{source}: {exc.strerror}") from None


def load_model(source) -> ChainModel:
    """{"kind", "states", "matrix", "m"} -> validated model."""
    doc = _read(source)
    try:
        return build_model(doc["kind"], doc["matrix"], doc["m"], doc.get("states"))
    except KeyError as exc:
        raise ModelError(f"model file is missing field {exc.args[0]!r}") from None


def model_to_dict(model: ChainModel) -> dict:
    return {"kind": model.kind, "states": list(model.states),
            "matrix": model.matrix.tolist(), "m": model.m.tolist()}


def parse_measure(doc, model: ChainModel) -> ProbMeasure:
    if isinstance(doc, list):
        doc = {"mu": doc}
    if "mu" in doc:
        mu = ProbMeasure(doc["mu"])
        if len(mu) != model.n:
            raise ModelError(f"measure has {len(mu)} entries, model has {model.n} states")
        return mu
    if "delta" in doc:
        return ProbMeasure.delta(model, doc["delta"])
    raise ModelError('measure needs "mu" or "delta"')


def load_measure(source, model: ChainModel) -> ProbMeasure:
    """{"mu": [...]} or {"delta": "<state label>"}."""
    return parse_measure(_read(source), model)


@dataclass
class Experiment:
    model: ChainModel
    starts: list[int]
    event: Any  # TauNeighborhood or ThresholdEvent
    n_grid: list[int]
    trials: int
    seed: int
    h: float


def parse_event(doc: dict, model: ChainModel):
    if "threshold" in doc:
        return ThresholdEvent(StateSet.from_labels(model, doc["target"]), float(doc["threshold"]))
    center = parse_measure(doc["center"], model)
    eps = float(doc["epsilon"])
    if "target" in doc:
        return TauNeighborhood.single_set(StateSet.from_labels(model, doc["target"]), center, eps)
    if "test_functions" in doc:
        return TauNeighborhood(np.asarray(doc["test_functions"], float), center, eps)
    raise ModelError('event needs "target" + "threshold", or a center with "target"/"test_functions"')


def load_experiment(source) -> Experiment:
    doc = _read(source)
    base = Path(source).parent if not isinstance(source, dict) else Path(".")
    try:
        mref = doc["model"]
        if isinstance(mref, str):
            mref = base / mref
        model = load_model(mref)
        starts = [model.index(s) for s in doc.get("start_states", model.states)]
        event = parse_event(doc["event"], model)
        n_grid = [int(n) for n in doc["n_grid"]]
    except KeyError as exc:
        raise ModelError(f"experiment file is missing field {exc.args[0]!r}") from None
    if not n_grid or min(n_grid) < 1:
        raise ModelError("n_grid must hold positive integers")
    return Experiment(model, starts, event, n_grid, int(doc.get("trials", 10_000)),
                      int(doc.get("seed", 0)), float(doc.get("h", 0.1)))


def jsonable(obj):
    """Plain-JSON view: numpy to lists, infinities as "+inf"/"-inf"."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "+inf" if x > 0 else "-inf"
        return x
    return obj


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), indent=2) + "\n"

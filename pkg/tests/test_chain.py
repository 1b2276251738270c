import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_discrete, random_generator, random_reversible, series_expm
from occupation_ld.chain import (
    ModelError,
    ProbMeasure,
    StateSet,
    build_model,
    check_invariance,
    check_mutual_reachability,
    check_reversibility,
    is_abs_continuous,
    resolvent,
    semigroup,
    worst_balance_pair,
)


# ---------------------------------------------------------------- validation

@pytest.mark.parametrize("matrix, msg", [
    ([[0.5, 0.6], [0.5, 0.5]], "row 0"),
    ([[1.0, 0.0], [-0.1, 1.1]], "row 1"),
])
def test_build_model_names_bad_row(matrix, msg):
    with pytest.raises(ModelError, match=msg):
        build_model("discrete", matrix, [1, 1])


def test_build_model_generator_rows():
    with pytest.raises(ModelError, match="row 1"):
        build_model("continuous", [[-1, 1], [1, -0.5]], [1, 1])
    with pytest.raises(ModelError, match="off-diagonal"):
        build_model("continuous", [[1, -1], [1, -1]], [1, 1])


@pytest.mark.parametrize("kwargs, msg", [
    (dict(kind="sideways"), "kind"),
    (dict(matrix=[[1.0, 0.0]]), "square"),
    (dict(m=[1.0]), "length"),
    (dict(m=[0.0, 0.0]), "total mass"),
    (dict(m=[1.0, -1.0]), "negative"),
    (dict(labels=["a", "a"]), "unique"),
    (dict(matrix=[[np.nan, 1.0], [0.0, 1.0]]), "non-finite"),
])
def test_build_model_rejects(kwargs, msg):
    args = dict(kind="discrete", matrix=[[1.0, 0.0], [0.0, 1.0]], m=[1.0, 1.0], labels=None)
    args.update(kwargs)
    with pytest.raises(ModelError, match=msg):
        build_model(args["kind"], args["matrix"], args["m"], args["labels"])


def test_model_is_frozen(two_state_discrete):
    with pytest.raises(ValueError):
        two_state_discrete.matrix[0, 0] = 0.0
    with pytest.raises(ModelError):
        two_state_discrete.Q
    assert two_state_discrete.index("s1") == 1
    with pytest.raises(ModelError, match="unknown"):
        two_state_discrete.index("nope")


def test_prob_measure_validation(two_state_discrete):
    with pytest.raises(ModelError):
        ProbMeasure([0.5, 0.6])
    with pytest.raises(ModelError):
        ProbMeasure([1.5, -0.5])
    d = ProbMeasure.delta(two_state_discrete, "s1")
    np.testing.assert_array_equal(d.mu, [0.0, 1.0])
    np.testing.assert_allclose(ProbMeasure.normalized([1, 3]).mu, [0.25, 0.75])


def test_state_set_operations():
    a = StateSet.from_indices(4, [0, 2])
    b = StateSet.from_indices(4, [2])
    assert b.issubset(a) and not a.issubset(b)
    assert (a | StateSet.from_indices(4, [3])).indices == [0, 2, 3]
    assert 2 in a and 1 not in a
    assert len(a) == 2
    assert a == StateSet.from_indices(4, [2, 0])
    assert len({a, StateSet.from_indices(4, [0, 2])}) == 1


# ----------------------------------------------------------------- semigroup

def test_semigroup_matches_power_series(rng):
    for make in (random_reversible, random_generator):
        for _ in range(5):
            model = make(rng, int(rng.integers(2, 6)))
            for t in (0.05, 0.5, 1.5):
                np.testing.assert_allclose(semigroup(model, t), series_expm(t * model.Q),
                                           atol=1e-12)


def test_semigroup_zero_time_and_errors(two_state_continuous, two_state_discrete):
    np.testing.assert_array_equal(semigroup(two_state_continuous, 0), np.eye(2))
    with pytest.raises(ModelError):
        semigroup(two_state_continuous, -1.0)
    with pytest.raises(ModelError, match="integer"):
        semigroup(two_state_discrete, 0.5)


def test_discrete_semigroup_is_matrix_power(rng):
    model = random_discrete(rng, 4)
    P = model.P
    np.testing.assert_allclose(semigroup(model, 3), P @ P @ P, atol=1e-15)
    np.testing.assert_array_equal(semigroup(model, 0), np.eye(4))


def test_two_state_closed_form(two_state_continuous):
    # p_t(0, 0) = 1/2 + e^{-2t}/2 for unit rates
    for t in (0.1, 1.0, 3.0):
        assert semigroup(two_state_continuous, t)[0, 0] == pytest.approx(0.5 + 0.5 * np.exp(-2 * t),
                                                                        abs=1e-15)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 6),
       s=st.floats(0.0, 3.0), t=st.floats(0.0, 3.0), reversible=st.booleans())
def test_semigroup_law(seed, n, s, t, reversible):
    rng = np.random.default_rng(seed)
    model = (random_reversible if reversible else random_generator)(rng, n)
    ps, pt, pst = semigroup(model, s), semigroup(model, t), semigroup(model, s + t)
    np.testing.assert_allclose(ps @ pt, pst, atol=1e-12)
    assert np.all(pst >= 0)
    np.testing.assert_allclose(pst.sum(axis=1), 1.0, atol=1e-12)


# ----------------------------------------------------------------- resolvent

def _simpson_resolvent(model, T=40.0, dt=1e-3):
    N = int(round(T / dt))
    step = semigroup(model, dt)
    decay = np.exp(-dt)
    acc = np.zeros((model.n, model.n))
    cur = np.eye(model.n)  # e^{-t} p_t at t = k dt
    for k in range(N + 1):
        w = 1.0 if k in (0, N) else (4.0 if k % 2 else 2.0)
        acc += w * cur
        cur = decay * (cur @ step)
    return acc * dt / 3.0


def test_continuous_resolvent_matches_quadrature(rng):
    model = random_generator(rng, 3)
    np.testing.assert_allclose(resolvent(model), _simpson_resolvent(model), atol=1e-9)


def test_discrete_resolvent_matches_series(rng):
    model = random_discrete(rng, 4, zeros=True)
    P = model.P
    acc, Pn = np.zeros_like(P), np.eye(4)
    for k in range(1, 80):
        Pn = Pn @ P
        acc += 0.5**k * Pn
    np.testing.assert_allclose(resolvent(model), acc, atol=1e-14)


# ------------------------------------------------------------ structure checks

def test_reversibility(rng, cycle3):
    ok, viol = check_reversibility(random_reversible(rng, 5))
    assert ok and viol < 1e-12
    ok, viol = check_reversibility(cycle3)
    assert not ok and viol == pytest.approx(2 / 3)
    i, j, v = worst_balance_pair(cycle3)
    assert i < j and v == pytest.approx(2 / 3)


def test_invariance(rng, cycle3, two_state_discrete):
    assert check_invariance(random_reversible(rng, 4))
    assert check_invariance(cycle3)
    assert check_invariance(two_state_discrete)
    skew = build_model("discrete", [[0.9, 0.1], [0.5, 0.5]], [0.5, 0.5])
    assert not check_invariance(skew)


def test_mutual_reachability():
    P = np.eye(3)
    P[0] = [0.5, 0.5, 0.0]
    P[1] = [0.5, 0.5, 0.0]
    split = build_model("discrete", P, [1, 1, 1])
    rep = check_mutual_reachability(split)
    assert not rep.holds
    assert (0, 2) in rep.violating_pairs and (2, 0) in rep.violating_pairs
    # the same chain passes once the unreachable state is m-null
    assert check_mutual_reachability(build_model("discrete", P, [1, 1, 0])).holds


def test_abs_continuity(two_state_discrete):
    model = build_model("discrete", two_state_discrete.P, [1.0, 0.0])
    assert is_abs_continuous(ProbMeasure([1.0, 0.0]), model)
    assert not is_abs_continuous(ProbMeasure([0.5, 0.5]), model)

import random

import pytest
from hypothesis import given, settings

from monoprob import (
    Closed,
    InvalidWeight,
    Open,
    SampleReport,
    WeightTable,
    at_least,
    bucketize,
    dist,
    exact_reify,
    fail,
    importance_sample,
    rejection_sample,
    sampling_as_model,
    with_counter,
)
from monoprob.core import WeightSumExceedsOne
from monoprob.inference import importance_run, run_seed
from monoprob.models import hmm
from monoprob.models.grass import grass_model
from monoprob.oracle import oracle_enumerate
from monoprob.stdlib import flip

from .trees import programs, run_program

GRASS = {True: 0.4581, False: 0.189}


def hand_tree():
    d = Open(lambda: ((1.0, Closed("E")),))
    b = Open(lambda: ((0.3, Closed("C")), (0.7, d)))
    return Open(lambda: ((0.5, Closed("A")), (0.5, b)))


# -- WeightTable -----------------------------------------------------------------

def test_weight_table_basics():
    t = WeightTable({"a": 0.25, "b": 0.5, "z": 0.0})
    assert list(t) == ["a", "b"]
    assert t.total == 0.75
    assert t.weight("missing") == 0.0
    assert t.normalized() == pytest.approx({"a": 1 / 3, "b": 2 / 3})
    with pytest.raises(WeightSumExceedsOne):
        WeightTable({"a": 0.7, "b": 0.7})
    with pytest.raises(InvalidWeight):
        WeightTable({"a": -0.1})


# -- exact -----------------------------------------------------------------------

def test_exact_grass():
    table = exact_reify(grass_model)
    assert table.close_to(GRASS, 1e-12)
    # 0.4581 / (0.4581 + 0.189)
    assert table.normalized()[True] == pytest.approx(0.7079276773296245, abs=1e-12)


@pytest.mark.parametrize("biased, expected", [
    (True, {True: 1.0}),
    (False, {True: 0.5, False: 0.5}),
])
def test_exact_flip_or_biased(biased, expected):
    table = exact_reify(lambda: flip(0.5).map(lambda f: f or biased))
    assert table.close_to(expected, 1e-12)


def test_exact_leaf_order_is_depth_first():
    model = lambda: flip(0.5).bind(  # noqa: E731
        lambda a: flip(0.5).map(lambda b: ("b", b)) if a else "c")
    assert list(exact_reify(model)) == [("b", True), ("b", False), "c"]


def test_exact_accepts_open_tree():
    assert exact_reify(hand_tree()).close_to({"A": 0.5, "C": 0.15, "E": 0.35}, 1e-15)


@settings(max_examples=60, deadline=None)
@given(programs())
def test_exact_equals_oracle_on_random_programs(prog):
    model = lambda: run_program(prog)  # noqa: E731
    assert exact_reify(model).close_to(oracle_enumerate(model), 1e-9)


def test_oracle_trivial_cases():
    assert dict(oracle_enumerate(lambda: "v")) == {"v": 1.0}
    assert len(oracle_enumerate(fail)) == 0
    assert oracle_enumerate(grass_model).close_to(GRASS, 1e-12)


# -- rejection -------------------------------------------------------------------

def test_rejection_deterministic_and_failing_models():
    rep = rejection_sample(lambda: 7, 20, seed=3)
    assert all(run == ((7, 1.0),) for run in rep.runs)
    rep = rejection_sample(fail, 20, seed=3)
    assert all(run == () for run in rep.runs)


def test_rejection_grass_statistics():
    rep = rejection_sample(grass_model, 100_000, seed=11)
    successes = [run for run in rep.runs if run]
    frac = len(successes) / rep.n
    true_frac = sum(run[0][0] for run in successes) / len(successes)
    assert frac == pytest.approx(0.6471, abs=0.005)
    assert true_frac == pytest.approx(0.70785, abs=0.01)


def test_rejection_treats_deficit_as_failure():
    rep = rejection_sample(lambda: dist({"x": 0.25}), 20_000, seed=5)
    assert rep.estimate()["x"] == pytest.approx(0.25, abs=5 * (0.25 * 0.75 / 20_000) ** 0.5)


# -- importance ------------------------------------------------------------------

def test_importance_hand_tree_has_zero_variance():
    rep = importance_sample(hand_tree(), 50, seed=0)
    for run in rep.runs:
        assert dict(run) == {"A": 0.5, "C": 0.15, "E": 0.35}


def test_importance_fixes_immediately_observed_choice():
    def model():
        return dist([(0.2, "a"), (0.3, "b"), (0.5, "c")]).bind(
            lambda v: v if v == "b" else fail())

    rep = importance_sample(model, 10, seed=1)
    assert all(run == (("b", 0.3),) for run in rep.runs)


def test_importance_deterministic_model():
    rep = importance_sample(lambda: "x", 5)
    assert all(run == (("x", 1.0),) for run in rep.runs)


def test_importance_is_reproducible():
    a = importance_sample(grass_model, 300, seed=99)
    b = importance_sample(grass_model, 300, seed=99)
    assert a.runs == b.runs
    c = importance_sample(grass_model, 300, seed=100)
    assert a.runs != c.runs


def test_importance_chunks_match_single_job():
    whole = importance_sample(grass_model, 200, seed=4)
    parts = importance_sample(grass_model, 120, seed=4).merge(
        importance_sample(grass_model, 80, seed=4, start=120))
    assert whole.runs == parts.runs


def test_importance_grass_unbiased():
    rep = importance_sample(grass_model, 20_000, seed=2)
    est = rep.estimate()
    for v, exact in GRASS.items():
        assert abs(est.weight(v) - exact) <= 5 * rep.standard_error(v)


@settings(max_examples=40, deadline=None)
@given(programs())
def test_importance_per_run_mass_bound(prog):
    model = lambda: run_program(prog)  # noqa: E731
    rep = importance_sample(model, 30, seed=0)
    for run in rep.runs:
        assert sum(w for _, w in run) <= 1 + 1e-9
        assert all(w > 0 for _, w in run)


@settings(max_examples=40, deadline=None)
@given(programs(allow_fail=False))
def test_importance_fail_free_runs_carry_full_mass(prog):
    rep = importance_sample(lambda: run_program(prog), 20, seed=0)
    for run in rep.runs:
        assert sum(w for _, w in run) == pytest.approx(1.0, abs=1e-9)


def test_importance_never_reports_failed_mass():
    # the right subtree fails one level below the look-ahead
    def model():
        return flip(0.5).bind(
            lambda a: flip(0.5).bind(lambda b: "y" if b else fail()) if a
            else dist([(0.5, 0), (0.5, 1)]).bind(lambda _: fail()))

    for run in importance_sample(model, 20, seed=3).runs:
        assert all(v == "y" and w > 0 for v, w in run)


def test_importance_rejects_bad_hand_weights():
    tree = Open(lambda: ((0.5, Closed("a")), (-0.5, Closed("b"))))
    with pytest.raises(InvalidWeight):
        importance_run(tree, random.Random(0))


def test_seed_derivation_wraps_at_64_bits():
    assert run_seed(2 ** 64 - 1, 1) == 0
    assert run_seed(10, 5) == 15


def test_sample_report_merge_is_associative():
    a, b, c = (SampleReport([((i, 0.5),)]) for i in range(3))
    assert a.merge(b).merge(c).runs == a.merge(b.merge(c)).runs
    est = a.merge(b).merge(c).estimate()
    assert est.close_to({0: 0.5 / 3, 1: 0.5 / 3, 2: 0.5 / 3}, 1e-15)


# -- nested inference ------------------------------------------------------------

@pytest.mark.parametrize("threshold, table, expected", [
    (0.3, {True: 0.5, False: 0.5}, True),
    (0.3, {False: 1.0}, False),
    (0.0, {}, True),
])
def test_at_least(threshold, table, expected):
    assert at_least(threshold, True, WeightTable(table)) is expected


def test_sampling_as_model_deterministic():
    for k in (1, 3, 5):
        table = exact_reify(lambda: sampling_as_model(k, lambda: "v"))
        assert dict(table) == {WeightTable({"v": 1.0}): 1.0}


def test_sampling_as_model_seven_eighths():
    def model():
        def with_bias(biased):
            coin = lambda: flip(0.5).map(lambda f: f or biased)  # noqa: E731
            return sampling_as_model(2, coin).map(lambda t: at_least(0.3, True, t))
        return flip(0.5).bind(with_bias)

    assert exact_reify(model).close_to({True: 0.875, False: 0.125}, 1e-12)


def test_sampling_as_model_frequencies():
    est = exact_reify(
        lambda: sampling_as_model(2, lambda: flip(0.5)).map(lambda t: t.weight(True)))
    assert est.close_to({1.0: 0.25, 0.5: 0.5, 0.0: 0.25}, 1e-12)


def test_sampling_as_model_failure_fails_outer():
    inner = lambda: flip(0.5).bind(lambda b: b or fail())  # noqa: E731
    table = exact_reify(lambda: sampling_as_model(2, inner).map(lambda t: len(t)))
    assert table.close_to({1: 0.25}, 1e-12)


def test_sampling_as_model_rejects_nonpositive_k():
    with pytest.raises(ValueError):
        sampling_as_model(0, lambda: 1)


# -- bucketize ---------------------------------------------------------------------

def test_bucketize_coin_is_transparent():
    f = bucketize(lambda _: flip(0.5))
    assert exact_reify(lambda: f(0)).close_to({True: 0.5, False: 0.5}, 1e-12)


def test_bucketize_computes_each_bucket_once():
    calls = []
    f = bucketize(lambda x: calls.append(x) or flip(x))
    model = lambda: f(0.25).bind(lambda a: f(0.25).map(lambda b: (a, b)))  # noqa: E731
    table = exact_reify(model)
    # not memo: two independent draws from the same bucket
    assert table.close_to({(True, True): 1 / 16, (True, False): 3 / 16,
                           (False, True): 3 / 16, (False, False): 9 / 16}, 1e-12)
    assert calls == [0.25]


def test_bucketize_all_failing_bucket_is_failure():
    f = bucketize(lambda x: fail())
    assert len(exact_reify(lambda: f(1))) == 0


def test_bucketized_hmm_matches_naive():
    ev = hmm.observed_at(5)
    step = hmm.bucketized_runner(ev)
    for n in (1, 3, 5, 7):
        naive = oracle_enumerate(lambda: hmm.run(n, ev))
        assert exact_reify(lambda: step(n)).close_to(naive, 1e-9)


def _dist_calls(thunk):
    m, counter = with_counter(thunk)
    exact_reify(m)
    return counter.dist_calls


def test_bucketize_choice_growth():
    ev = hmm.observed_at(5)
    naive = _dist_calls(lambda: hmm.run(10, ev)) / _dist_calls(lambda: hmm.run(5, ev))
    b8 = _dist_calls(lambda: hmm.bucketized_runner(ev)(8))
    b16 = _dist_calls(lambda: hmm.bucketized_runner(ev)(16))
    assert naive > 10
    assert b16 / b8 < 3


@pytest.mark.slow
def test_bucketize_choice_growth_from_eight():
    ev = hmm.observed_at(5)
    naive = _dist_calls(lambda: hmm.run(16, ev)) / _dist_calls(lambda: hmm.run(8, ev))
    assert naive > 10

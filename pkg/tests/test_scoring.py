import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import rel_entr

from bayesvis import samples as se
from bayesvis import scoring, tasks
from bayesvis.errors import EmptyResponse, InvalidResponse, SchemaMismatch
from conftest import make_store


def dist(probs, labels=None):
    if labels is None:
        labels = tuple(f"o{i}" for i in range(len(probs)))
    return scoring.CategoricalDistribution(labels=tuple(labels),
                                           probs=tuple(probs))


class TestCategorical:
    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            dist([1.2, -0.2])

    def test_rejects_non_normalized(self):
        with pytest.raises(ValueError):
            dist([0.5, 0.4])

    def test_bernoulli_clamps(self):
        assert scoring.bernoulli(1.3).probs == (1.0, 0.0)
        assert scoring.bernoulli(-0.1).probs == (0.0, 1.0)


class TestMultiBetDisplay:
    def test_fresh_state(self):
        st4 = scoring.MultiBetState(s=(0, 0, 0, 0), m=3)
        for col in range(4):
            for row in (1, 2, 3):
                assert st4.button_state(col, row) == "deselected"

    def test_partial_allocation(self):
        # s = (2, 0, 1, 0), M = 3: no chips remain, so nothing above a
        # selected run is clickable
        st4 = scoring.MultiBetState(s=(2, 0, 1, 0), m=3)
        assert st4.button_state(0, 1) == "selected"
        assert st4.button_state(0, 2) == "selected"
        assert st4.button_state(0, 3) == "disabled"
        assert st4.button_state(1, 1) == "disabled"
        assert st4.button_state(2, 1) == "selected"
        assert st4.button_state(2, 2) == "disabled"

    def test_one_chip_left(self):
        st3 = scoring.MultiBetState(s=(1, 1, 0), m=3)
        assert st3.button_state(0, 2) == "deselected"
        assert st3.button_state(0, 3) == "disabled"
        assert st3.button_state(2, 1) == "deselected"
        assert st3.button_state(2, 2) == "disabled"

    def test_out_of_grid(self):
        st2 = scoring.MultiBetState(s=(0, 0), m=2)
        with pytest.raises(ValueError):
            st2.button_state(2, 1)
        with pytest.raises(ValueError):
            st2.button_state(0, 3)

    def test_overfull_rejected(self):
        with pytest.raises(ValueError):
            scoring.MultiBetState(s=(2, 2), m=3)


class TestMultiBetClicks:
    def test_deselected_click_sets_row(self):
        st4 = scoring.MultiBetState(s=(0, 0, 0, 0), m=3)
        out = scoring.multibet_click(st4, 1, 2)
        assert out.s == (0, 2, 0, 0)

    def test_selected_click_drops_to_row_minus_one(self):
        st4 = scoring.MultiBetState(s=(3, 0), m=3)
        assert scoring.multibet_click(st4, 0, 3).s == (2, 0)
        assert scoring.multibet_click(st4, 0, 1).s == (0, 0)

    def test_disabled_click_is_noop(self):
        st4 = scoring.MultiBetState(s=(2, 1), m=3)
        out = scoring.multibet_click(st4, 0, 3)
        assert out.s == (2, 1)

    def test_budget_invariant_under_random_clicks(self):
        rng = np.random.default_rng(0)
        state = scoring.MultiBetState(s=(0,) * 5, m=4)
        for _ in range(2000):
            col = int(rng.integers(0, 5))
            row = int(rng.integers(1, 5))
            state = scoring.multibet_click(state, col, row)
            assert all(x >= 0 for x in state.s)
            assert state.total <= 4

    def test_any_state_reachable(self):
        # click each column up to its target allocation
        state = scoring.MultiBetState(s=(0, 0, 0), m=5)
        for col, target in enumerate((2, 2, 1)):
            state = scoring.multibet_click(state, col, target)
        assert state.s == (2, 2, 1)


class TestEntailed:
    def test_raw_proportions(self):
        st4 = scoring.MultiBetState(s=(9, 1, 0, 0), m=10)
        d = scoring.entailed_distribution(st4)
        assert d.probs == pytest.approx((0.9, 0.1, 0.0, 0.0))

    def test_smoothed(self):
        # eps = 0.5 pseudo-chips: (9.5, 1.5, 0.5, 0.5) / 12
        st4 = scoring.MultiBetState(s=(9, 1, 0, 0), m=10)
        d = scoring.entailed_distribution(st4, epsilon=0.5)
        assert d.probs == pytest.approx((9.5 / 12, 1.5 / 12, 0.5 / 12, 0.5 / 12))

    def test_empty_rejected(self):
        with pytest.raises(EmptyResponse):
            scoring.entailed_distribution(scoring.MultiBetState(s=(0, 0), m=3))


class TestDivergences:
    def test_kl_frozen_value(self):
        # D((.5,.5) || (.9,.1)) = .5 ln(.5/.9) + .5 ln(.5/.1)
        expected = 0.5 * math.log(0.5 / 0.9) + 0.5 * math.log(0.5 / 0.1)
        assert expected == pytest.approx(0.510825624, abs=1e-8)
        got = scoring.kl_divergence(dist([0.5, 0.5]), dist([0.9, 0.1]))
        assert got == pytest.approx(expected, abs=1e-12)

    def test_symmetric_frozen_value(self):
        got = scoring.symmetric_kl(dist([0.5, 0.5]), dist([0.9, 0.1]))
        assert got == pytest.approx(0.878889831, abs=1e-8)

    def test_kl_identity_zero(self):
        d = dist([0.2, 0.3, 0.5])
        assert scoring.kl_divergence(d, d) == 0.0
        assert scoring.symmetric_kl(d, d) == 0.0

    def test_kl_zero_handling(self):
        assert scoring.kl_divergence(dist([0.0, 1.0]), dist([0.5, 0.5])) == \
            pytest.approx(math.log(2))
        assert scoring.kl_divergence(dist([0.5, 0.5]), dist([0.0, 1.0])) == math.inf

    def test_kl_matches_scipy(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            p = rng.dirichlet(np.ones(4))
            q = rng.dirichlet(np.ones(4))
            ours = scoring.kl_divergence(dist(p), dist(q))
            assert ours == pytest.approx(rel_entr(p, q).sum(), abs=1e-12)

    def test_label_mismatch(self):
        with pytest.raises(SchemaMismatch):
            scoring.kl_divergence(dist([0.5, 0.5], labels=("a", "b")),
                                  dist([0.5, 0.5], labels=("b", "a")))

    def test_absolute_bias_bernoulli(self):
        got = scoring.absolute_bias(scoring.bernoulli(0.7), scoring.bernoulli(0.4))
        assert got == pytest.approx(0.3)

    def test_binary_criterion(self):
        p, q = scoring.bernoulli(0.7), scoring.bernoulli(0.62)
        assert scoring.binary_criterion(p, q, 0.1) == 1
        assert scoring.binary_criterion(p, q, 0.05) == 0


class TestSmoothCategorical:
    def test_matches_chip_scheme(self):
        # a point mass over 4 options with budget 10 smooths exactly like
        # the all-in chip allocation
        d = scoring.smooth_categorical(dist([1.0, 0.0, 0.0, 0.0]), budget=10)
        chips = scoring.entailed_distribution(
            scoring.MultiBetState(s=(10, 0, 0, 0), m=10), epsilon=0.5)
        assert d.probs == pytest.approx(chips.probs)

    def test_strictly_positive(self):
        d = scoring.smooth_categorical(dist([0.0, 1.0]), budget=5)
        assert all(p > 0 for p in d.probs)
        assert sum(d.probs) == pytest.approx(1.0)


class TestRewards:
    def test_comprehension_anchor_points(self):
        assert scoring.comprehension_reward(0.0) == 10.0
        assert scoring.comprehension_reward(math.log(2)) == 5.0
        assert scoring.comprehension_reward(100.0) == 0.0

    def test_comprehension_monotone(self):
        xs = np.linspace(0, 5, 200)
        rewards = [scoring.comprehension_reward(x) for x in xs]
        assert all(a >= b for a, b in zip(rewards, rewards[1:]))

    def test_rationality_endpoints(self):
        vals = [2.0, 5.0, 10.0]
        assert scoring.rationality_reward(10.0, vals) == 10.0
        assert scoring.rationality_reward(2.0, vals) == 0.0
        assert scoring.rationality_reward(6.0, vals) == 5.0

    def test_rationality_constant_options(self):
        assert scoring.rationality_reward(3.0, [3.0, 3.0]) == 10.0


class TestExpectedUtility:
    def _store(self):
        return make_store(np.column_stack([
            np.array([1.0, 2.0, 3.0, 4.0]),
            np.array([10.0, 10.0, 0.0, 0.0]),
        ]), names=["x", "y"])

    def test_threshold_option(self):
        u = scoring.OptionUtility(label="bet", kind="threshold", variable="x",
                                  threshold=2.5, payoff_hit=4.0,
                                  payoff_miss=-1.0)
        # P(x >= 2.5) = 0.5 -> 0.5*4 + 0.5*(-1) = 1.5
        assert u.mean_utility(self._store()) == pytest.approx(1.5)

    def test_linear_and_constant_options(self):
        lin = scoring.OptionUtility(label="l", kind="linear", variable="y",
                                    scale=0.5, offset=1.0)
        const = scoring.OptionUtility(label="c", kind="constant", value=2.0)
        js = self._store()
        assert lin.mean_utility(js) == pytest.approx(0.5 * 5.0 + 1.0)
        assert const.mean_utility(js) == 2.0

    def test_expected_utility_mixes(self):
        spec = scoring.UtilitySpec(options=(
            scoring.OptionUtility(label="a", kind="constant", value=4.0),
            scoring.OptionUtility(label="b", kind="constant", value=0.0),
        ))
        choice = dist([0.75, 0.25], labels=("a", "b"))
        assert scoring.expected_utility(self._store(), spec, choice) == \
            pytest.approx(3.0)


def slider_task(quantity="value", objective=None, conditions=(),
                vis="boxplot"):
    obj = objective or tasks.ObjectiveSpec(
        kind="kl", variable="x", direction="ge", target_confidence=0.5,
        conditions=conditions)
    return tasks.TaskSpec(
        id="t1", context="", query="", visualisation=vis,
        answer_input=tasks.SliderInput(0.0, 20.0, 0.05),
        query_meta=tasks.QueryMeta(observability="observable",
                                   quantity=quantity),
        objective=obj, model_ref="m", query_id="q1")


def multibet_task(objective, labels=("A", "B"), budget=10):
    return tasks.TaskSpec(
        id="t2", context="", query="", visualisation="hop",
        answer_input=tasks.MultiBetInput(n_options=len(labels), budget=budget,
                                         labels=labels),
        query_meta=tasks.QueryMeta(observability="observable", quantity="id"),
        objective=objective, model_ref="m", query_id="q2")


class TestEvaluateResponse:
    def test_value_query_optimal_slider(self):
        js = make_store([float(i) for i in range(1, 101)], names=["x"])
        task = slider_task(objective=tasks.ObjectiveSpec(
            kind="kl", variable="x", direction="ge", target_confidence=0.95))
        # tau = 6 gives P(x >= 6) = 0.95 exactly: reward 10
        rec = scoring.evaluate_response(task, {"type": "slider", "value": 6.0}, js)
        assert rec.reward == 10.0
        assert rec.objective_value == pytest.approx(0.0, abs=1e-12)

    def test_value_query_off_target(self):
        js = make_store([float(i) for i in range(1, 101)], names=["x"])
        task = slider_task(objective=tasks.ObjectiveSpec(
            kind="kl", variable="x", direction="ge", target_confidence=0.95))
        rec = scoring.evaluate_response(task, {"type": "slider", "value": 15.0}, js)
        assert rec.reward < 10.0
        # objective is D(target || model-at-slider)
        expected = scoring.kl_divergence(scoring.bernoulli(0.95),
                                         scoring.bernoulli(0.86))
        assert rec.objective_value == pytest.approx(expected)

    def test_confidence_query_exact(self):
        js = make_store([1.0, 2.0, 3.0, 4.0], names=["x"])
        task = slider_task(quantity="confidence", objective=tasks.ObjectiveSpec(
            kind="symmetric_kl", variable="x", threshold=2.5, direction="ge"))
        task = tasks.TaskSpec(**{**task.__dict__,
                                 "answer_input": tasks.SliderInput(0.0, 1.0, 0.01)})
        rec = scoring.evaluate_response(task, {"type": "slider", "value": 0.5}, js)
        assert rec.reward == 10.0

    def test_slider_out_of_range(self):
        js = make_store([1.0], names=["x"])
        task = slider_task()
        with pytest.raises(InvalidResponse):
            scoring.evaluate_response(task, {"type": "slider", "value": 30.0}, js)

    def test_wrong_payload_type(self):
        js = make_store([1.0], names=["x"])
        with pytest.raises(InvalidResponse):
            scoring.evaluate_response(slider_task(),
                                      {"type": "multibet", "s": [1]}, js)

    def test_id_comprehension(self):
        rng = np.random.default_rng(2)
        vals = np.column_stack([rng.normal(0, 1, 4000), rng.normal(5, 1, 4000)])
        js = make_store(vals, names=["A", "B"])
        obj = tasks.ObjectiveSpec(kind="symmetric_kl", candidates=("A", "B"),
                                  observed=0.0, window=0.5,
                                  target="identity_posterior")
        task = multibet_task(obj)
        # nearly all mass near 0 comes from column A
        rec = scoring.evaluate_response(
            task, {"type": "multibet", "s": [10, 0]}, js)
        assert rec.reward >= 9.0
        bad = scoring.evaluate_response(
            task, {"type": "multibet", "s": [0, 10]}, js)
        assert bad.reward < rec.reward

    def test_id_rationality(self):
        js = make_store(np.column_stack([
            np.linspace(0, 10, 100), np.linspace(0, 1, 100)]),
            names=["x", "y"])
        spec = scoring.UtilitySpec(options=(
            scoring.OptionUtility(label="A", kind="constant", value=5.0),
            scoring.OptionUtility(label="B", kind="constant", value=1.0),
        ))
        obj = tasks.ObjectiveSpec(kind="expected_utility", utility=spec)
        task = multibet_task(obj)
        best = scoring.evaluate_response(task, {"type": "multibet", "s": [10, 0]}, js)
        worst = scoring.evaluate_response(task, {"type": "multibet", "s": [0, 10]}, js)
        split = scoring.evaluate_response(task, {"type": "multibet", "s": [5, 5]}, js)
        assert best.reward == 10.0
        assert worst.reward == 0.0
        assert split.reward == 5.0

    def test_empty_multibet(self):
        js = make_store([[1.0, 2.0]], names=["A", "B"])
        obj = tasks.ObjectiveSpec(kind="symmetric_kl", candidates=("A", "B"),
                                  observed=1.0, window=0.5,
                                  target="identity_posterior")
        with pytest.raises(EmptyResponse):
            scoring.evaluate_response(multibet_task(obj),
                                      {"type": "multibet", "s": [0, 0]}, js)

    def test_conditioning_changes_target(self, correlated_store):
        cond = (se.IntervalCondition("a", 11.0, 14.0),)
        task_c = slider_task(quantity="confidence",
                             objective=tasks.ObjectiveSpec(
                                 kind="kl", variable="b", threshold=12.0,
                                 direction="ge", conditions=cond))
        task_c = tasks.TaskSpec(**{**task_c.__dict__,
                                   "answer_input": tasks.SliderInput(0.0, 1.0, 0.01)})
        # a > 11 pulls b upward (positive correlation), so the optimal
        # slider under the condition is higher than unconditionally
        p_unc = se.prob_event(correlated_store, "b", 12.0, "ge")
        rec = scoring.evaluate_response(
            task_c, {"type": "slider", "value": round(p_unc, 2)},
            correlated_store)
        assert rec.optimal.probs[0] > p_unc + 0.05

    def test_conditioned_scoring_deterministic(self, correlated_store):
        cond = (se.IntervalCondition("a", 9.0, 11.0),)
        task_c = slider_task(quantity="confidence",
                             objective=tasks.ObjectiveSpec(
                                 kind="kl", variable="b", threshold=12.0,
                                 direction="ge", conditions=cond))
        task_c = tasks.TaskSpec(**{**task_c.__dict__,
                                   "answer_input": tasks.SliderInput(0.0, 1.0, 0.01)})
        payload = {"type": "slider", "value": 0.4}
        a = scoring.evaluate_response(task_c, payload, correlated_store)
        b = scoring.evaluate_response(task_c, payload, correlated_store)
        assert a.objective_value == b.objective_value


class TestTaskSeed:
    def test_stable(self):
        assert scoring.task_seed("Q01__boxplot") == scoring.task_seed("Q01__boxplot")

    def test_distinct_tasks_distinct_seeds(self):
        seeds = {scoring.task_seed(f"Q{i:02d}") for i in range(48)}
        assert len(seeds) == 48

    def test_base_seed_mixes(self):
        assert scoring.task_seed("Q01", 0) != scoring.task_seed("Q01", 12345)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 6).flatmap(
    lambda n: st.tuples(st.just(n), st.lists(
        st.integers(0, 4), min_size=n, max_size=n))),
    st.integers(0, 5), st.integers(1, 8))
def test_click_always_yields_valid_state(n_and_s, col, row):
    n, s = n_and_s
    m = max(sum(s), 1) + 2
    state = scoring.MultiBetState(s=tuple(s), m=m)
    if col >= n or row > m:
        return
    out = scoring.multibet_click(state, col, row)
    assert all(x >= 0 for x in out.s)
    assert out.total <= m
